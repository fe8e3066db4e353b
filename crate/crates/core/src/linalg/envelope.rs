use crate::error::{Error, Result};

use super::SymOperator;

/// `A = L D Lᵀ` in envelope (profile) storage, without pivoting.
///
/// On symmetric M-matrices the factorization involves no cancellation, so the
/// solution keeps high relative accuracy even where it is many orders of
/// magnitude below its peak. The pivot signs give the inertia of `A`.
#[derive(Clone, Debug)]
pub struct EnvelopeLdl {
    first: Vec<usize>,
    start: Vec<usize>,
    lower: Vec<f64>,
    pivots: Vec<f64>,
}

impl EnvelopeLdl {
    pub fn factor<O: SymOperator + ?Sized>(op: &O) -> Result<Self> {
        let n = op.dim();
        let mut first = vec![0usize; n];
        let mut start = vec![0usize; n + 1];
        for i in 0..n {
            let mut f = i;
            op.for_each_in_row(i, &mut |j, _| f = f.min(j));
            first[i] = f;
            start[i + 1] = start[i] + (i - f);
        }
        let mut lower = vec![0.0; start[n]];
        let mut pivots = vec![0.0; n];
        let mut row = Vec::new();
        for i in 0..n {
            let fi = first[i];
            row.clear();
            row.resize(i - fi + 1, 0.0);
            op.for_each_in_row(i, &mut |j, a| {
                if j <= i {
                    row[j - fi] += a;
                }
            });
            // row[k - fi] becomes s_k = L_ik D_k for k < i.
            for j in fi..i {
                let fj = first[j];
                let lo = fi.max(fj);
                let lj = &lower[start[j]..start[j + 1]];
                let mut s = row[j - fi];
                for k in lo..j {
                    s -= row[k - fi] * lj[k - fj];
                }
                row[j - fi] = s;
            }
            let mut d = row[i - fi];
            let li = &mut lower[start[i]..start[i + 1]];
            for j in fi..i {
                let s = row[j - fi];
                let l = s / pivots[j];
                li[j - fi] = l;
                d -= s * l;
            }
            if d == 0.0 || !d.is_finite() {
                return Err(Error::Singular(format!("zero or non-finite pivot at row {i}")));
            }
            pivots[i] = d;
        }
        Ok(EnvelopeLdl {
            first,
            start,
            lower,
            pivots,
        })
    }

    pub fn dim(&self) -> usize {
        self.pivots.len()
    }

    /// Number of negative eigenvalues of `A` (Sylvester's law of inertia).
    pub fn negative_pivots(&self) -> usize {
        self.pivots.iter().filter(|&&d| d < 0.0).count()
    }

    pub fn pivots(&self) -> &[f64] {
        &self.pivots
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let mut y = b.to_vec();
        for i in 0..n {
            let fi = self.first[i];
            let li = &self.lower[self.start[i]..self.start[i + 1]];
            let mut s = y[i];
            for (k, l) in li.iter().enumerate() {
                s -= l * y[fi + k];
            }
            y[i] = s;
        }
        for (yi, d) in y.iter_mut().zip(&self.pivots) {
            *yi /= d;
        }
        for i in (0..n).rev() {
            let fi = self.first[i];
            let li = &self.lower[self.start[i]..self.start[i + 1]];
            let yi = y[i];
            for (k, l) in li.iter().enumerate() {
                y[fi + k] -= l * yi;
            }
        }
        y
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec::Execution;

    struct Dense(Vec<Vec<f64>>);

    impl SymOperator for Dense {
        fn dim(&self) -> usize {
            self.0.len()
        }
        fn apply(&self, _: Execution, x: &[f64], y: &mut [f64]) {
            for (i, row) in self.0.iter().enumerate() {
                y[i] = row.iter().zip(x).map(|(a, b)| a * b).sum();
            }
        }
        fn diagonal(&self) -> Vec<f64> {
            (0..self.dim()).map(|i| self.0[i][i]).collect()
        }
        fn for_each_in_row(&self, i: usize, f: &mut dyn FnMut(usize, f64)) {
            for (j, &a) in self.0[i].iter().enumerate() {
                if a != 0.0 {
                    f(j, a);
                }
            }
        }
    }

    #[test]
    fn solves_and_counts_inertia() {
        let a = Dense(vec![
            vec![4.0, -1.0, 0.0, -1.0],
            vec![-1.0, 4.0, -1.0, 0.0],
            vec![0.0, -1.0, 4.0, -1.0],
            vec![-1.0, 0.0, -1.0, 4.0],
        ]);
        let f = EnvelopeLdl::factor(&a).unwrap();
        assert_eq!(f.negative_pivots(), 0);
        let b = [1.0, 2.0, 3.0, 4.0];
        let x = f.solve(&b);
        let mut ax = [0.0; 4];
        a.apply(Execution::Sequential, &x, &mut ax);
        for (u, v) in ax.iter().zip(&b) {
            assert!((u - v).abs() < 1e-14);
        }
        // eigenvalues 2, 4, 4, 6; shifting by 4.5 leaves exactly one positive
        let shifted = Dense(
            a.0.iter()
                .enumerate()
                .map(|(i, r)| r.iter().enumerate().map(|(j, &v)| if i == j { v - 4.5 } else { v }).collect())
                .collect(),
        );
        assert_eq!(EnvelopeLdl::factor(&shifted).unwrap().negative_pivots(), 3);
    }
}
