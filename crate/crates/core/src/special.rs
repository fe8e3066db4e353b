//! Exponentially scaled modified Bessel functions of integer order and the
//! lattice heat kernel built from them.

use statrs::function::gamma::ln_gamma;

const SERIES_LIMIT: f64 = 25.0;

/// `ln(e^{−x} I_n(x))` for `x ≥ 0`; `−∞` at `x = 0, n > 0`.
pub fn ln_bessel_i_scaled(n: u32, x: f64) -> f64 {
    assert!(x >= 0.0, "argument must be nonnegative");
    if x == 0.0 {
        return if n == 0 { 0.0 } else { f64::NEG_INFINITY };
    }
    if x <= SERIES_LIMIT {
        return ln_series(n, x);
    }
    if let Some(v) = hankel(n, x) {
        return v.ln();
    }
    miller(n, x).ln()
}

/// `e^{−x} I_n(x)` for `x ≥ 0`.
pub fn bessel_i_scaled(n: u32, x: f64) -> f64 {
    ln_bessel_i_scaled(n, x).exp()
}

/// Ascending series `I_n(x) = Σ_k (x/2)^{n+2k} / (k! (n+k)!)` in log form.
fn ln_series(n: u32, x: f64) -> f64 {
    let q = 0.25 * x * x;
    let nf = n as f64;
    let mut term = 1.0;
    let mut rest = 0.0;
    let mut k = 0.0;
    loop {
        k += 1.0;
        term *= q / (k * (nf + k));
        rest += term;
        if term < 1e-17 * (1.0 + rest) {
            break;
        }
    }
    let half = 0.5 * x;
    if n <= 60 && half.ln() * nf > -600.0 {
        let mut lead = 1.0;
        for j in 1..=n {
            lead *= half / j as f64;
        }
        return lead.ln() - x + rest.ln_1p();
    }
    nf * half.ln() - ln_gamma(nf + 1.0) - x + rest.ln_1p()
}

/// Large-argument expansion
/// `e^{−x} I_n(x) ~ (2πx)^{−1/2} Σ_k (−1)^k a_k(n) / x^k`.
/// Returns `None` when the terms do not fall below working precision
/// without cancellation.
fn hankel(n: u32, x: f64) -> Option<f64> {
    let mu = 4.0 * (n as f64) * (n as f64);
    let mut term = 1.0f64;
    let mut sum = 1.0f64;
    let mut biggest = 1.0f64;
    for k in 1..200 {
        let j = (2 * k - 1) as f64;
        term *= -(mu - j * j) / (k as f64 * 8.0 * x);
        if term == 0.0 {
            break;
        }
        sum += term;
        biggest = biggest.max(term.abs());
        if term.abs() < 1e-17 * sum.abs() {
            if biggest > 10.0 {
                return None;
            }
            return Some(sum / (2.0 * std::f64::consts::PI * x).sqrt());
        }
    }
    None
}

/// Miller backward recurrence normalized by `e^{−x}(I_0 + 2 Σ_{k≥1} I_k) = 1`.
fn miller(n: u32, x: f64) -> f64 {
    let start = n as usize + (12.0 * x.sqrt()).ceil() as usize + 40;
    let mut next = 0.0f64;
    let mut cur = 1e-280f64;
    let mut total = 0.0f64;
    let mut at_n = 0.0f64;
    for k in (1..=start).rev() {
        if k as u32 == n {
            at_n = cur;
        }
        total += 2.0 * cur;
        let prev = (2.0 * k as f64 / x) * cur + next;
        next = cur;
        cur = prev;
        if cur > 1e250 {
            next *= 1e-250;
            cur *= 1e-250;
            total *= 1e-250;
            at_n *= 1e-250;
        }
    }
    total += cur;
    if n == 0 {
        at_n = cur;
    }
    at_n / total
}

/// Continuous-time simple random walk kernel on ℤ^d for the generator
/// `Δf(x) = Σ_{|y−x|=1} (f(x) − f(y))`: `p_t(z) = Π_i e^{−2t} I_{z_i}(2t)`.
pub fn heat_kernel(t: f64, z: &[i64]) -> f64 {
    ln_heat_kernel(t, z).exp()
}

pub fn ln_heat_kernel(t: f64, z: &[i64]) -> f64 {
    assert!(t >= 0.0, "time must be nonnegative");
    let x = 2.0 * t;
    z.iter().map(|&zi| ln_bessel_i_scaled(zi.unsigned_abs() as u32, x)).sum()
}
