//! Execution policy for the data-parallel inner loops.
//!
//! With the `parallel` feature the hot loops (sparse operator application,
//! lemma sweeps, weight tabulation, random identity batteries) run on the
//! rayon pool. Without it every policy degrades to the sequential path, so
//! results never depend on the feature set.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Which code path a data-parallel loop takes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

impl Execution {
    /// The policy the crate uses when callers don't choose one.
    pub fn preferred() -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel
        } else {
            Execution::Sequential
        }
    }

    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }
}

/// Minimum chunk length handed to a rayon task.
const MIN_CHUNK: usize = 512;

/// `out[i] = f(i)` for every index.
pub fn fill_indexed<F>(exec: Execution, out: &mut [f64], f: F)
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        out.par_iter_mut()
            .with_min_len(MIN_CHUNK)
            .enumerate()
            .for_each(|(i, o)| *o = f(i));
        return;
    }
    let _ = exec;
    for (i, o) in out.iter_mut().enumerate() {
        *o = f(i);
    }
}

/// Maps `0..n` through `f` and collects in index order.
pub fn map_range<T, F>(exec: Execution, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        return (0..n).into_par_iter().map(f).collect();
    }
    let _ = exec;
    (0..n).map(f).collect()
}

/// Maps a slice through `f` and collects in order.
pub fn map_slice<S, T, F>(exec: Execution, items: &[S], f: F) -> Vec<T>
where
    S: Sync,
    T: Send,
    F: Fn(&S) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        return items.par_iter().map(f).collect();
    }
    let _ = exec;
    items.iter().map(f).collect()
}

/// Sum of `f(i)` over `0..n`. The parallel path sums fixed-size blocks and
/// then adds the block sums in order, so the result is reproducible for a
/// given `n` regardless of thread count.
pub fn sum_range<F>(exec: Execution, n: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    const BLOCK: usize = 4096;
    let blocks = n.div_ceil(BLOCK);
    let block_sum = |b: usize| {
        let lo = b * BLOCK;
        let hi = (lo + BLOCK).min(n);
        (lo..hi).map(&f).sum::<f64>()
    };
    map_range(exec, blocks, block_sum).into_iter().sum()
}

/// Dot product with the same blocking as [`sum_range`].
pub fn dot(exec: Execution, a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    sum_range(exec, a.len(), |i| a[i] * b[i])
}

/// `y += s * x`
pub fn axpy(exec: Execution, s: f64, x: &[f64], y: &mut [f64]) {
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        y.par_iter_mut()
            .with_min_len(MIN_CHUNK)
            .zip(x.par_iter())
            .for_each(|(yi, xi)| *yi += s * xi);
        return;
    }
    let _ = exec;
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += s * xi;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sequential_and_parallel_sums_agree_bitwise() {
        let n = 100_003;
        let f = |i: usize| ((i as f64) * 0.37).sin();
        let a = sum_range(Execution::Sequential, n, f);
        let b = sum_range(Execution::Parallel, n, f);
        assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn map_range_preserves_order() {
        let v = map_range(Execution::Parallel, 1000, |i| i * 2);
        assert!(v.iter().enumerate().all(|(i, &x)| x == 2 * i));
    }
}
