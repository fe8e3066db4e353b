use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{self, Execution};

use super::SymOperator;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignVerdict {
    /// A Ritz value below zero was found, so `λ_min < 0`.
    Negative,
    /// The smallest Ritz value minus its residual bound is nonnegative.
    NonNegative,
    /// The iteration budget ran out before the sign was settled.
    Undetermined,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LanczosOutcome {
    /// Smallest Ritz value, an upper bound for `λ_min`.
    pub theta: f64,
    /// `β_k |s_k|`, the residual norm of the Ritz pair.
    pub residual_bound: f64,
    pub iterations: usize,
    pub verdict: SignVerdict,
}

/// Number of eigenvalues of the tridiagonal matrix `(alpha, beta)` below `x`.
fn sturm_count(alpha: &[f64], beta: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut q = 1.0;
    for i in 0..alpha.len() {
        let off = if i == 0 { 0.0 } else { beta[i - 1] * beta[i - 1] / q };
        q = alpha[i] - x - off;
        if q == 0.0 {
            q = -f64::EPSILON * (alpha[i].abs() + x.abs() + 1.0);
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

fn smallest_tridiagonal_eigenvalue(alpha: &[f64], beta: &[f64]) -> f64 {
    let k = alpha.len();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..k {
        let r = if i > 0 { beta[i - 1].abs() } else { 0.0 } + if i + 1 < k { beta[i].abs() } else { 0.0 };
        lo = lo.min(alpha[i] - r);
        hi = hi.max(alpha[i] + r);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if sturm_count(alpha, beta, mid) >= 1 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Last component of the normalized eigenvector for eigenvalue `theta`, by
/// inverse iteration with a shift just below it.
fn last_eigvec_component(alpha: &[f64], beta: &[f64], theta: f64) -> f64 {
    let k = alpha.len();
    let scale = alpha.iter().map(|a| a.abs()).fold(1e-300, f64::max);
    let shift = theta - 1e-10 * scale;
    let mut y = vec![1.0; k];
    for _ in 0..3 {
        // Thomas algorithm on T − shift I, which is positive definite.
        let mut c = vec![0.0; k];
        let mut d = vec![0.0; k];
        let mut piv = alpha[0] - shift;
        c[0] = if k > 1 { beta[0] / piv } else { 0.0 };
        d[0] = y[0] / piv;
        for i in 1..k {
            piv = alpha[i] - shift - beta[i - 1] * c[i - 1];
            c[i] = if i + 1 < k { beta[i] / piv } else { 0.0 };
            d[i] = (y[i] - beta[i - 1] * d[i - 1]) / piv;
        }
        for i in (0..k - 1).rev() {
            d[i] -= c[i] * d[i + 1];
        }
        let norm = d.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            break;
        }
        y = d.into_iter().map(|v| v / norm).collect();
    }
    y[k - 1]
}

/// Smallest eigenvalue sign test for a symmetric operator by Lanczos
/// iteration without reorthogonalization.
///
/// Returns as soon as the sign of `λ_min` is settled: a negative Ritz value
/// proves `λ_min < 0`; a Ritz pair with `θ − ρ ≥ 0` is taken as `λ_min ≥ 0`.
pub fn lanczos_smallest<O: SymOperator + ?Sized>(
    exec: Execution,
    op: &O,
    start: &[f64],
    max_iter: usize,
    check_every: usize,
) -> Result<LanczosOutcome> {
    let n = op.dim();
    if start.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: start.len(),
        });
    }
    let norm = exec::dot(exec, start, start).sqrt();
    if !(norm > 0.0) {
        return Err(Error::InvalidArgument("Lanczos start vector is zero".into()));
    }
    let scale = op.diagonal().iter().map(|d| d.abs()).fold(0.0, f64::max).max(1e-300);
    let neg_tol = 1e-13 * scale;
    let mut q: Vec<f64> = start.iter().map(|v| v / norm).collect();
    let mut q_prev = vec![0.0; n];
    let mut w = vec![0.0; n];
    let mut alpha = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut last = LanczosOutcome {
        theta: f64::INFINITY,
        residual_bound: f64::INFINITY,
        iterations: 0,
        verdict: SignVerdict::Undetermined,
    };
    let steps = max_iter.min(n).max(1);
    for k in 0..steps {
        op.apply(exec, &q, &mut w);
        let a = exec::dot(exec, &q, &w);
        let b_prev = if k > 0 { beta[k - 1] } else { 0.0 };
        exec::axpy(exec, -a, &q, &mut w);
        exec::axpy(exec, -b_prev, &q_prev, &mut w);
        let b = exec::dot(exec, &w, &w).sqrt();
        alpha.push(a);
        let done = b <= 1e-14 * scale || k + 1 == steps;
        if (k + 1) % check_every.max(1) == 0 || done {
            let theta = smallest_tridiagonal_eigenvalue(&alpha, &beta);
            let s = last_eigvec_component(&alpha, &beta, theta);
            let rho = b * s.abs();
            let verdict = if theta < -neg_tol {
                SignVerdict::Negative
            } else if theta - rho >= 0.0 || (done && b <= 1e-14 * scale) {
                if theta < 0.0 {
                    SignVerdict::Negative
                } else {
                    SignVerdict::NonNegative
                }
            } else {
                SignVerdict::Undetermined
            };
            last = LanczosOutcome {
                theta,
                residual_bound: rho,
                iterations: k + 1,
                verdict,
            };
            if verdict != SignVerdict::Undetermined || done {
                return Ok(last);
            }
        }
        beta.push(b);
        std::mem::swap(&mut q_prev, &mut q);
        let inv = 1.0 / b;
        exec::fill_indexed(exec, &mut q, |i| w[i] * inv);
    }
    Ok(last)
}
