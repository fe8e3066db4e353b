use crate::error::{Error, Result};
use crate::exec::{self, Execution};

use super::SymOperator;

#[derive(Clone, Debug)]
pub struct CgOutcome {
    pub x: Vec<f64>,
    pub iterations: usize,
    /// `‖b − A x‖₂ / ‖b‖₂` of the recurrence residual at exit.
    pub relative_residual: f64,
}

/// Jacobi-preconditioned conjugate gradients for SPD `A`.
pub fn pcg<O: SymOperator + ?Sized>(
    exec: Execution,
    op: &O,
    b: &[f64],
    x0: Option<&[f64]>,
    tol: f64,
    max_iter: usize,
) -> Result<CgOutcome> {
    let n = op.dim();
    let inv_diag: Vec<f64> = op
        .diagonal()
        .iter()
        .map(|&d| if d > 0.0 { 1.0 / d } else { 1.0 })
        .collect();
    let b_norm = exec::dot(exec, b, b).sqrt();
    if b_norm == 0.0 {
        return Ok(CgOutcome {
            x: vec![0.0; n],
            iterations: 0,
            relative_residual: 0.0,
        });
    }
    let mut x = match x0 {
        Some(v) => v.to_vec(),
        None => vec![0.0; n],
    };
    let mut r = vec![0.0; n];
    op.apply(exec, &x, &mut r);
    for (ri, bi) in r.iter_mut().zip(b) {
        *ri = bi - *ri;
    }
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(a, d)| a * d).collect();
    let mut p = z.clone();
    let mut ap = vec![0.0; n];
    let mut rz = exec::dot(exec, &r, &z);
    let mut rel = exec::dot(exec, &r, &r).sqrt() / b_norm;
    let mut it = 0;
    while rel > tol {
        if it >= max_iter {
            return Err(Error::NoConvergence(format!(
                "conjugate gradients stopped at relative residual {rel:.3e} after {it} iterations"
            )));
        }
        op.apply(exec, &p, &mut ap);
        let pap = exec::dot(exec, &p, &ap);
        if !(pap > 0.0) {
            return Err(Error::Singular(format!(
                "conjugate gradients met non-positive curvature {pap:.3e}"
            )));
        }
        let step = rz / pap;
        exec::axpy(exec, step, &p, &mut x);
        exec::axpy(exec, -step, &ap, &mut r);
        exec::fill_indexed(exec, &mut z, |i| r[i] * inv_diag[i]);
        let rz_next = exec::dot(exec, &r, &z);
        let beta = rz_next / rz;
        rz = rz_next;
        exec::fill_indexed(exec, &mut ap, |i| z[i] + beta * p[i]);
        std::mem::swap(&mut p, &mut ap);
        rel = exec::dot(exec, &r, &r).sqrt() / b_norm;
        it += 1;
        // Guard against recurrence drift on long runs.
        if it % 500 == 0 && rel <= 10.0 * tol {
            op.apply(exec, &x, &mut ap);
            for i in 0..n {
                r[i] = b[i] - ap[i];
            }
            rel = exec::dot(exec, &r, &r).sqrt() / b_norm;
        }
    }
    Ok(CgOutcome {
        x,
        iterations: it,
        relative_residual: rel,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::WeightedGraph;
    use crate::linalg::DirichletOperator;

    #[test]
    fn solves_one_dimensional_dirichlet_problem() {
        // −u'' = 0 with u = 1 at one end enters as a unit load next to it.
        let g = WeightedGraph::unit_lattice_box(1, 10).unwrap();
        let op = DirichletOperator::new(&g, &vec![0.0; g.len()]).unwrap();
        let mut b = vec![0.0; op.dim()];
        b[0] = 1.0;
        let out = pcg(Execution::Sequential, &op, &b, None, 1e-14, 1000).unwrap();
        let n = op.dim() as f64;
        for (i, v) in out.x.iter().enumerate() {
            let exact = (n - i as f64) / (n + 1.0);
            assert!((v - exact).abs() < 1e-12);
        }
    }
}
