//! Symmetric operators on Dirichlet truncations and the solvers behind the
//! Green function and criticality computations.

mod cg;
mod envelope;
mod lanczos;

pub use cg::{pcg, CgOutcome};
pub use envelope::EnvelopeLdl;
pub use lanczos::{lanczos_smallest, LanczosOutcome, SignVerdict};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::graph::{LatticeKernel, WeightedGraph};

/// A real symmetric matrix available through products and row access.
pub trait SymOperator: Sync {
    fn dim(&self) -> usize;

    /// `y = A x`
    fn apply(&self, exec: Execution, x: &[f64], y: &mut [f64]);

    fn diagonal(&self) -> Vec<f64>;

    /// Calls `f(j, a_ij)` for every stored entry of row `i`, diagonal included.
    fn for_each_in_row(&self, i: usize, f: &mut dyn FnMut(usize, f64));
}

/// The interior block of `m(Δ + V/m)` on a truncation with zero boundary
/// values:
/// `(A u)(x) = Σ_y b(x,y)(u(x) − u(y)) + κ(x) u(x) + s(x) u(x)`
/// where the sum runs over all neighbours (boundary ones contribute only to
/// the diagonal), `κ` is the exterior mass and `s` the caller's diagonal
/// shift, typically `V + α m`.
#[derive(Clone, Debug)]
pub struct DirichletOperator<'g> {
    graph: &'g WeightedGraph,
    interior: Vec<usize>,
    local: Vec<usize>,
    diag: Vec<f64>,
    /// Side of the centered interior sub-box of a kernel graph.
    sub_box: Option<usize>,
}

const NOT_INTERIOR: usize = usize::MAX;

impl<'g> DirichletOperator<'g> {
    pub fn new(graph: &'g WeightedGraph, shift: &[f64]) -> Result<Self> {
        Self::with_exec(Execution::preferred(), graph, shift)
    }

    pub fn with_exec(exec: Execution, graph: &'g WeightedGraph, shift: &[f64]) -> Result<Self> {
        if shift.len() != graph.len() {
            return Err(Error::DimensionMismatch {
                expected: graph.len(),
                found: shift.len(),
            });
        }
        let interior: Vec<usize> = graph.interior().collect();
        let mut local = vec![NOT_INTERIOR; graph.len()];
        for (i, &x) in interior.iter().enumerate() {
            local[x] = i;
        }
        let mut diag = vec![0.0; interior.len()];
        exec::fill_indexed(exec, &mut diag, |i| {
            let x = interior[i];
            graph.degree(x) + graph.exterior_mass(x) + shift[x]
        });
        let sub_box = graph.kernel().and_then(|k| centered_sub_box(k, &interior));
        Ok(DirichletOperator {
            graph,
            interior,
            local,
            diag,
            sub_box,
        })
    }

    pub fn graph(&self) -> &'g WeightedGraph {
        self.graph
    }

    /// Global vertex index of each unknown.
    pub fn interior(&self) -> &[usize] {
        &self.interior
    }

    /// Unknown index of a global vertex, `None` on the boundary.
    pub fn local_index(&self, x: usize) -> Option<usize> {
        match self.local[x] {
            NOT_INTERIOR => None,
            i => Some(i),
        }
    }

    /// Extends an interior vector by zero to all vertices.
    pub fn to_global(&self, u: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.graph.len()];
        for (i, &x) in self.interior.iter().enumerate() {
            out[x] = u[i];
        }
        out
    }

    pub fn restrict(&self, f: &[f64]) -> Vec<f64> {
        self.interior.iter().map(|&x| f[x]).collect()
    }
}

/// Side `2r + 1` when the interior is exactly `[−r, r]^d` inside the box.
fn centered_sub_box(k: &LatticeKernel, interior: &[usize]) -> Option<usize> {
    let d = k.dim;
    let side = (0..=k.radius).map(|r| 2 * r + 1).find(|s| s.checked_pow(d as u32) == Some(interior.len()))?;
    let r = (side - 1) / 2;
    let shift = k.radius - r;
    let mut pos = vec![0usize; d];
    for &x in interior {
        k.unrank(x, &mut pos);
        if pos.iter().any(|&p| p < shift || p > shift + 2 * r) {
            return None;
        }
    }
    Some(side)
}

/// `Σ_q w(|p − q|) x_q` over the sub-box, recursing over dimensions with a
/// contiguous innermost loop.
fn convolve(k: &LatticeKernel, side: usize, p: &[usize], level: usize, tidx: usize, prefix: usize, x: &[f64]) -> f64 {
    let c = k.cutoff;
    let pl = p[level];
    let reach = c.min(side - 1);
    if level + 1 == p.len() {
        let row = &k.table[tidx * (c + 1)..(tidx + 1) * (c + 1)];
        let xs = &x[prefix * side..(prefix + 1) * side];
        let mut acc = row[0] * xs[pl];
        for a in 1..=reach {
            let w = row[a];
            if pl >= a {
                acc += w * xs[pl - a];
            }
            if pl + a < side {
                acc += w * xs[pl + a];
            }
        }
        return acc;
    }
    let lo = pl.saturating_sub(c);
    let hi = (pl + c).min(side - 1);
    let mut acc = 0.0;
    for q in lo..=hi {
        let a = q.abs_diff(pl);
        acc += convolve(k, side, p, level + 1, tidx * (c + 1) + a, prefix * side + q, x);
    }
    acc
}

/// Entry count of the envelope `LDLᵀ` factor in the operator's ordering.
pub fn envelope_size<O: SymOperator + ?Sized>(op: &O) -> usize {
    let mut total = 0usize;
    for i in 0..op.dim() {
        let mut first = i;
        op.for_each_in_row(i, &mut |j, _| first = first.min(j));
        total += i - first + 1;
    }
    total
}

impl SymOperator for DirichletOperator<'_> {
    fn dim(&self) -> usize {
        self.interior.len()
    }

    fn apply(&self, exec: Execution, x: &[f64], y: &mut [f64]) {
        let g = self.graph;
        if let (Some(side), Some(k)) = (self.sub_box, g.kernel()) {
            let d = k.dim;
            exec::fill_indexed(exec, y, |i| {
                let mut p = vec![0usize; d];
                let mut v = i;
                for j in (0..d).rev() {
                    p[j] = v % side;
                    v /= side;
                }
                // the table entry at offset zero is never an edge
                let off = convolve(k, side, &p, 0, 0, 0, x) - k.table[0] * x[i];
                self.diag[i] * x[i] - off
            });
            return;
        }
        exec::fill_indexed(exec, y, |i| {
            let mut acc = self.diag[i] * x[i];
            g.for_each_neighbor(self.interior[i], |v, w| {
                let j = self.local[v];
                if j != NOT_INTERIOR {
                    acc -= w * x[j];
                }
            });
            acc
        });
    }

    fn diagonal(&self) -> Vec<f64> {
        self.diag.clone()
    }

    fn for_each_in_row(&self, i: usize, f: &mut dyn FnMut(usize, f64)) {
        f(i, self.diag[i]);
        self.graph.for_each_neighbor(self.interior[i], |v, w| {
            let j = self.local[v];
            if j != NOT_INTERIOR {
                f(j, -w);
            }
        });
    }
}

/// `A − c e_k e_kᵀ`
pub struct RankOneShift<'a, O: SymOperator> {
    pub base: &'a O,
    pub index: usize,
    pub c: f64,
}

impl<O: SymOperator> SymOperator for RankOneShift<'_, O> {
    fn dim(&self) -> usize {
        self.base.dim()
    }

    fn apply(&self, exec: Execution, x: &[f64], y: &mut [f64]) {
        self.base.apply(exec, x, y);
        y[self.index] -= self.c * x[self.index];
    }

    fn diagonal(&self) -> Vec<f64> {
        let mut d = self.base.diagonal();
        d[self.index] -= self.c;
        d
    }

    fn for_each_in_row(&self, i: usize, f: &mut dyn FnMut(usize, f64)) {
        let (k, c) = (self.index, self.c);
        self.base.for_each_in_row(i, &mut |j, a| {
            if i == k && j == k {
                f(j, a - c)
            } else {
                f(j, a)
            }
        });
    }
}

/// How linear systems are solved.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Largest envelope (entries of the factor) handled by the direct solver.
    pub direct_limit: usize,
    /// Relative residual target for conjugate gradients.
    pub cg_tol: f64,
    pub cg_max_iter: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            direct_limit: 25_000_000,
            cg_tol: 1e-12,
            cg_max_iter: 200_000,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveMethod {
    Envelope,
    ConjugateGradient,
}

#[derive(Clone, Debug)]
pub struct Solution {
    pub x: Vec<f64>,
    pub method: SolveMethod,
    pub iterations: usize,
    /// `‖b − A x‖_∞`
    pub residual: f64,
}

/// Solves `A x = b` for an SPD operator: envelope `LDLᵀ` when the factor is
/// small enough, Jacobi-preconditioned CG otherwise.
pub fn solve_spd<O: SymOperator>(exec: Execution, op: &O, b: &[f64], cfg: &SolverConfig) -> Result<Solution> {
    let n = op.dim();
    if b.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: b.len(),
        });
    }
    let (x, method, iterations) = if envelope_size(op) <= cfg.direct_limit {
        let f = EnvelopeLdl::factor(op)?;
        if f.negative_pivots() > 0 {
            return Err(Error::Singular("operator is not positive definite".into()));
        }
        (f.solve(b), SolveMethod::Envelope, 0)
    } else {
        let out = pcg(exec, op, b, None, cfg.cg_tol, cfg.cg_max_iter)?;
        (out.x, SolveMethod::ConjugateGradient, out.iterations)
    };
    let mut ax = vec![0.0; n];
    op.apply(exec, &x, &mut ax);
    let residual = ax
        .iter()
        .zip(b)
        .map(|(a, bb)| (a - bb).abs())
        .fold(0.0, f64::max);
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Singular("solution is not finite".into()));
    }
    Ok(Solution {
        x,
        method,
        iterations,
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{LatticeKernel, WeightedGraph};

    #[test]
    fn dirichlet_operator_is_symmetric() {
        let g = WeightedGraph::unit_lattice_box(2, 4).unwrap();
        let op = DirichletOperator::new(&g, &vec![0.3; g.len()]).unwrap();
        let n = op.dim();
        let mut dense = vec![vec![0.0; n]; n];
        for (i, row) in dense.iter_mut().enumerate() {
            op.for_each_in_row(i, &mut |j, a| row[j] += a);
        }
        for i in 0..n {
            for j in 0..n {
                assert_eq!(dense[i][j], dense[j][i]);
            }
        }
    }

    #[test]
    fn direct_and_iterative_agree() {
        let g = WeightedGraph::unit_lattice_box(2, 10).unwrap();
        let op = DirichletOperator::new(&g, &vec![0.0; g.len()]).unwrap();
        let b: Vec<f64> = (0..op.dim()).map(|i| ((i * 7) % 5) as f64).collect();
        let direct = solve_spd(Execution::Sequential, &op, &b, &SolverConfig::default()).unwrap();
        let cfg = SolverConfig {
            direct_limit: 0,
            ..SolverConfig::default()
        };
        let iter = solve_spd(Execution::Parallel, &op, &b, &cfg).unwrap();
        assert_eq!(direct.method, SolveMethod::Envelope);
        assert_eq!(iter.method, SolveMethod::ConjugateGradient);
        for (a, c) in direct.x.iter().zip(&iter.x) {
            assert!((a - c).abs() < 1e-9 * (1.0 + a.abs()));
        }
    }

    #[test]
    fn kernel_convolution_matches_row_access() {
        for (dim, radius, cutoff, inner) in [(1usize, 9usize, 3usize, 5usize), (2, 6, 2, 3), (2, 5, 10, 2), (3, 4, 2, 2)] {
            let side = cutoff + 1;
            let table: Vec<f64> = (0..side.pow(dim as u32)).map(|i| if i == 0 { 0.0 } else { 1.0 / (1.0 + i as f64) }).collect();
            let kernel = LatticeKernel {
                dim,
                radius,
                cutoff,
                table,
            };
            let n = (2 * radius + 1).pow(dim as u32);
            let labels = crate::graph::VertexLabels::LatticeBox { dim, radius };
            let boundary: Vec<bool> = (0..n)
                .map(|v| labels.point(v).unwrap().iter().any(|x| x.unsigned_abs() as usize > inner))
                .collect();
            let ext: Vec<f64> = (0..n).map(|v| (v % 3) as f64 * 0.1).collect();
            let g = WeightedGraph::from_kernel(kernel, boundary, Some(ext)).unwrap();
            let op = DirichletOperator::new(&g, &vec![0.5; n]).unwrap();
            assert!(op.sub_box.is_some());
            let x: Vec<f64> = (0..op.dim()).map(|i| ((i * 13) % 7) as f64 - 3.0).collect();
            let mut fast = vec![0.0; op.dim()];
            op.apply(Execution::Parallel, &x, &mut fast);
            for (i, f) in fast.iter().enumerate() {
                let mut slow = 0.0;
                op.for_each_in_row(i, &mut |j, a| slow += a * x[j]);
                assert!((f - slow).abs() < 1e-12 * (1.0 + slow.abs()), "dim {dim} row {i}");
            }
        }
    }
}
