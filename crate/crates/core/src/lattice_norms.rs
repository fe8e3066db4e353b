//! The direction-dependent lattice norm `|x|_a` that governs the decay of the
//! ℤ^d resolvent, and checks of its comparison inequalities.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::graph::WeightedGraph;
use crate::resolvent::GreenTable;

/// `m_a = acosh(1 + d a²)`
pub fn m_a(d: usize, a: f64) -> f64 {
    (1.0 + d as f64 * a * a).acosh()
}

fn check_a(a: f64) -> Result<()> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::InvalidArgument(format!("a must be positive, got {a}")));
    }
    Ok(())
}

fn root_lhs(x: &[i64], r: f64) -> f64 {
    x.iter().map(|&xi| (xi as f64 * r).hypot(1.0)).sum::<f64>() / x.len() as f64
}

/// The positive root of `(1/d) Σ √(1 + x_i² r²) = 1 + a²`.
pub fn solve_r(x: &[i64], a: f64) -> Result<f64> {
    check_a(a)?;
    if x.is_empty() || x.iter().all(|&v| v == 0) {
        return Err(Error::InvalidArgument("r(x) is undefined at x = 0".into()));
    }
    let target = 1.0 + a * a;
    let f = |r: f64| root_lhs(x, r) - target;
    let (mut lo, mut hi) = (0.0, 1.0);
    while f(hi) < 0.0 {
        lo = hi;
        hi *= 2.0;
    }
    while hi - lo > 1e-3 * hi {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut r = 0.5 * (lo + hi);
    let d = x.len() as f64;
    for _ in 0..100 {
        let fr = f(r);
        let df: f64 = x
            .iter()
            .map(|&xi| {
                let xi = xi as f64;
                xi * xi * r / (xi * r).hypot(1.0)
            })
            .sum::<f64>()
            / d;
        let next = (r - fr / df).clamp(lo, hi);
        if f(next) < 0.0 {
            lo = next;
        } else {
            hi = next;
        }
        let done = (next - r).abs() <= 1e-15 * r;
        r = next;
        if done {
            break;
        }
    }
    Ok(r)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatticeNormEval {
    pub x: Vec<i64>,
    pub d: usize,
    pub a: f64,
    /// Root of the defining equation; zero at the origin.
    pub r: f64,
    pub norm_a: f64,
    pub m_a: f64,
    /// `log C_a(x)`, absent at the origin.
    pub log_asymptotic: Option<f64>,
    pub asymptotic: Option<f64>,
}

/// `|x|_a = (1/m_a) Σ x_i asinh(x_i r(x))`, with `|0|_a = 0`.
pub fn norm_a(x: &[i64], a: f64) -> Result<LatticeNormEval> {
    check_a(a)?;
    let d = x.len();
    if d == 0 {
        return Err(Error::InvalidArgument("empty point".into()));
    }
    let ma = m_a(d, a);
    if x.iter().all(|&v| v == 0) {
        return Ok(LatticeNormEval {
            x: x.to_vec(),
            d,
            a,
            r: 0.0,
            norm_a: 0.0,
            m_a: ma,
            log_asymptotic: None,
            asymptotic: None,
        });
    }
    let r = solve_r(x, a)?;
    let norm = x
        .iter()
        .map(|&xi| {
            let xi = (xi as f64).abs();
            xi * (xi * r).asinh()
        })
        .sum::<f64>()
        / ma;
    let log_c = log_from_norm(d, ma, norm);
    Ok(LatticeNormEval {
        x: x.to_vec(),
        d,
        a,
        r,
        norm_a: norm,
        m_a: ma,
        log_asymptotic: Some(log_c),
        asymptotic: Some(log_c.exp()),
    })
}

fn log_from_norm(d: usize, ma: f64, norm: f64) -> f64 {
    let df = d as f64;
    0.5 * (df - 3.0) * ma.ln() - 0.5 * (df - 1.0) * norm.ln() - ma * norm
}

/// `log C_a(x) = ((d−3)/2) log m_a − ((d−1)/2) log |x|_a − m_a |x|_a`.
pub fn log_asymptotic_resolvent(x: &[i64], a: f64) -> Result<f64> {
    if x.iter().all(|&v| v == 0) {
        return Err(Error::InvalidArgument("the asymptotic form is undefined at x = 0".into()));
    }
    let e = norm_a(x, a)?;
    Ok(log_from_norm(e.d, e.m_a, e.norm_a))
}

/// Leading term `C_a(x)` of the resolvent kernel; may underflow to zero,
/// see [`log_asymptotic_resolvent`].
pub fn asymptotic_resolvent(x: &[i64], a: f64) -> Result<f64> {
    log_asymptotic_resolvent(x, a).map(f64::exp)
}

/// `a` with `a² = α / (2d)`.
pub fn a_for_alpha(d: usize, alpha: f64) -> f64 {
    (alpha / (2.0 * d as f64)).sqrt()
}

/// An entry of the `a²` grid, either fixed or `1/(2d)` for each dimension.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum A2Param {
    Fixed(f64),
    Named(A2Named),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum A2Named {
    #[serde(rename = "1/(2d)")]
    HalfInverseDim,
}

impl A2Param {
    pub fn value(self, d: usize) -> f64 {
        match self {
            A2Param::Fixed(v) => v,
            A2Param::Named(A2Named::HalfInverseDim) => 1.0 / (2.0 * d as f64),
        }
    }
}

impl FromStr for A2Param {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        if t == "1/(2d)" || t == "1/2d" {
            return Ok(A2Param::Named(A2Named::HalfInverseDim));
        }
        t.parse::<f64>()
            .map(A2Param::Fixed)
            .map_err(|_| Error::InvalidArgument(format!("invalid a² value {s:?}")))
    }
}

impl fmt::Display for A2Param {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            A2Param::Fixed(v) => write!(f, "{v}"),
            A2Param::Named(_) => write!(f, "1/(2d)"),
        }
    }
}

/// The grid used by default: `{0.1, 0.5, 1/(2d), 1.9}`.
pub fn default_a2_grid() -> Vec<A2Param> {
    vec![
        A2Param::Fixed(0.1),
        A2Param::Fixed(0.5),
        A2Param::Named(A2Named::HalfInverseDim),
        A2Param::Fixed(1.9),
    ]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LemmaCase {
    pub d: usize,
    pub a2: f64,
    pub points: usize,
    /// Violations of `|x| ≤ |x|_a ≤ ‖x‖_1`.
    pub lower_violations: usize,
    pub upper_violations: usize,
    /// Violations of `m_a |x|_a ≤ √(2a²d) |x|` (only counted for a² < 2).
    pub decay_violations: usize,
    pub decay_applicable: bool,
    /// `min (|x|_a − |x|) / |x|`
    pub min_lower_slack: f64,
    /// `min (‖x‖_1 − |x|_a) / ‖x‖_1`
    pub min_upper_slack: f64,
    /// `min (√(2a²d)|x| − m_a|x|_a) / (√(2a²d)|x|)`
    pub min_decay_slack: f64,
    pub max_root_residual: f64,
    /// `max | |n e_j|_a − |n| |` over axis points.
    pub max_axis_error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormLemmaReport {
    pub d_max: usize,
    pub radius: usize,
    pub tolerance: f64,
    pub cases: Vec<LemmaCase>,
    pub total_violations: usize,
    pub max_axis_error: f64,
}

/// Exhaustive sweep over `0 < ‖x‖_∞ ≤ radius` for every `d ≤ d_max` and every
/// grid value, counting violations beyond a relative tolerance of `1e−12`.
pub fn verify_norm_lemmas(exec: Execution, d_max: usize, radius: usize, grid: &[A2Param]) -> Result<NormLemmaReport> {
    if d_max == 0 || radius == 0 {
        return Err(Error::InvalidArgument("need d_max ≥ 1 and radius ≥ 1".into()));
    }
    let tol = 1e-12;
    let mut cases = Vec::new();
    for d in 1..=d_max {
        for &param in grid {
            let a2 = param.value(d);
            if !(a2 > 0.0) {
                return Err(Error::InvalidArgument(format!("a² must be positive, got {a2}")));
            }
            cases.push(sweep_case(exec, d, radius, a2, tol)?);
        }
    }
    let total_violations = cases
        .iter()
        .map(|c| c.lower_violations + c.upper_violations + c.decay_violations)
        .sum();
    let max_axis_error = cases.iter().map(|c| c.max_axis_error).fold(0.0, f64::max);
    Ok(NormLemmaReport {
        d_max,
        radius,
        tolerance: tol,
        cases,
        total_violations,
        max_axis_error,
    })
}

#[derive(Clone, Copy)]
struct Partial {
    points: usize,
    lower: usize,
    upper: usize,
    decay: usize,
    lower_slack: f64,
    upper_slack: f64,
    decay_slack: f64,
    residual: f64,
    axis: f64,
}

impl Partial {
    fn empty() -> Self {
        Partial {
            points: 0,
            lower: 0,
            upper: 0,
            decay: 0,
            lower_slack: f64::INFINITY,
            upper_slack: f64::INFINITY,
            decay_slack: f64::INFINITY,
            residual: 0.0,
            axis: 0.0,
        }
    }

    fn merge(mut self, o: Partial) -> Partial {
        self.points += o.points;
        self.lower += o.lower;
        self.upper += o.upper;
        self.decay += o.decay;
        self.lower_slack = self.lower_slack.min(o.lower_slack);
        self.upper_slack = self.upper_slack.min(o.upper_slack);
        self.decay_slack = self.decay_slack.min(o.decay_slack);
        self.residual = self.residual.max(o.residual);
        self.axis = self.axis.max(o.axis);
        self
    }
}

fn sweep_case(exec: Execution, d: usize, radius: usize, a2: f64, tol: f64) -> Result<LemmaCase> {
    let a = a2.sqrt();
    let ma = m_a(d, a);
    let decay_applicable = a2 < 2.0;
    let decay_factor = (2.0 * a2 * d as f64).sqrt();
    let side = 2 * radius + 1;
    let per_slab = side.pow(d as u32 - 1);
    let r = radius as i64;
    let slabs: Vec<Result<Partial>> = exec::map_range(exec, side, |first| {
        let mut acc = Partial::empty();
        let mut x = vec![0i64; d];
        for j in 0..per_slab {
            x[0] = first as i64 - r;
            let mut v = j;
            for k in (1..d).rev() {
                x[k] = (v % side) as i64 - r;
                v /= side;
            }
            if x.iter().all(|&c| c == 0) {
                continue;
            }
            let e = norm_a(&x, a)?;
            let euclid = x.iter().map(|&c| (c * c) as f64).sum::<f64>().sqrt();
            let l1 = x.iter().map(|c| c.abs()).sum::<i64>() as f64;
            acc.points += 1;
            acc.residual = acc.residual.max((root_lhs(&x, e.r) - (1.0 + a2)).abs());
            let ls = (e.norm_a - euclid) / euclid;
            let us = (l1 - e.norm_a) / l1;
            acc.lower_slack = acc.lower_slack.min(ls);
            acc.upper_slack = acc.upper_slack.min(us);
            if ls < -tol {
                acc.lower += 1;
            }
            if us < -tol {
                acc.upper += 1;
            }
            if decay_applicable {
                let bound = decay_factor * euclid;
                let ds = (bound - ma * e.norm_a) / bound;
                acc.decay_slack = acc.decay_slack.min(ds);
                if ds < -tol {
                    acc.decay += 1;
                }
            }
            if x.iter().filter(|&&c| c != 0).count() == 1 {
                acc.axis = acc.axis.max((e.norm_a - l1).abs());
            }
        }
        Ok(acc)
    });
    let mut total = Partial::empty();
    for s in slabs {
        total = total.merge(s?);
    }
    Ok(LemmaCase {
        d,
        a2,
        points: total.points,
        lower_violations: total.lower,
        upper_violations: total.upper,
        decay_violations: total.decay,
        decay_applicable,
        min_lower_slack: total.lower_slack,
        min_upper_slack: total.upper_slack,
        min_decay_slack: if decay_applicable { total.decay_slack } else { f64::NAN },
        max_root_residual: total.residual,
        max_axis_error: total.axis,
    })
}

/// Largest relative excess of `|x + y|_a` over `|x|_a + |y|_a` over all pairs
/// in the box of the given radius. A diagnostic only.
pub fn triangle_spot_check(d: usize, a: f64, radius: usize) -> Result<f64> {
    let side = 2 * radius + 1;
    let n = side.pow(d as u32);
    let r = radius as i64;
    let point = |mut v: usize| {
        let mut p = vec![0i64; d];
        for k in (0..d).rev() {
            p[k] = (v % side) as i64 - r;
            v /= side;
        }
        p
    };
    let norms: Vec<f64> = (0..n).map(|v| norm_a(&point(v), a).map(|e| e.norm_a)).collect::<Result<_>>()?;
    let mut worst = f64::NEG_INFINITY;
    for i in 0..n {
        let x = point(i);
        for j in 0..n {
            let y = point(j);
            let s: Vec<i64> = x.iter().zip(&y).map(|(p, q)| p + q).collect();
            let lhs = norm_a(&s, a)?.norm_a;
            let rhs = norms[i] + norms[j];
            if rhs > 0.0 {
                worst = worst.max((lhs - rhs) / rhs);
            }
        }
    }
    Ok(worst)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RayFit {
    pub direction: Vec<i64>,
    pub steps: Vec<usize>,
    /// `log G_α(x) + m_a |x|_a + ((d−1)/2) log |x|_a` at `x = n · direction`.
    pub corrected: Vec<f64>,
    /// Last corrected value.
    pub intercept: f64,
    /// `max − min` of the corrected values over the window.
    pub spread: f64,
    /// `|corrected_{k+1} − corrected_k|` along the window.
    pub drift: Vec<f64>,
    pub drift_decreasing: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticFitReport {
    pub d: usize,
    pub alpha: f64,
    pub a2: f64,
    pub m_a: f64,
    /// `log(m_a^{(d−3)/2} / 2d)`
    pub reference_intercept: f64,
    pub rays: Vec<RayFit>,
}

/// Compares a lattice Green table with `e^{−m_a |x|_a}` along rays
/// `n · direction`, `n` in the window, with `a² = α/(2d)`.
pub fn asymptotic_fit(g: &WeightedGraph, green: &GreenTable, directions: &[Vec<i64>], window: (usize, usize)) -> Result<AsymptoticFitReport> {
    let d = g
        .labels()
        .dim()
        .ok_or_else(|| Error::InvalidArgument("asymptotic fits need a lattice model".into()))?;
    if !(green.alpha > 0.0) {
        return Err(Error::InvalidArgument("asymptotic fits need α > 0".into()));
    }
    if window.1 < window.0 + 2 {
        return Err(Error::InsufficientData(format!(
            "window [{}, {}] holds fewer than 3 radii",
            window.0, window.1
        )));
    }
    let a = a_for_alpha(d, green.alpha);
    let ma = m_a(d, a);
    let mut rays = Vec::new();
    for dir in directions {
        if dir.len() != d || dir.iter().all(|&c| c == 0) {
            return Err(Error::InvalidArgument(format!("bad direction {dir:?}")));
        }
        let mut steps = Vec::new();
        let mut corrected = Vec::new();
        for n in window.0..=window.1 {
            let x: Vec<i64> = dir.iter().map(|&c| c * n as i64).collect();
            let v = match g.labels().index_of(&x) {
                Some(v) if !g.is_boundary(v) => v,
                _ => {
                    return Err(Error::InsufficientData(format!(
                        "point {x:?} is outside the interior of the truncation"
                    )))
                }
            };
            let val = green.values[v];
            if !(val > 0.0) {
                return Err(Error::NotPositive { vertex: v, value: val });
            }
            let norm = norm_a(&x, a)?.norm_a;
            steps.push(n);
            corrected.push(val.ln() + ma * norm + 0.5 * (d as f64 - 1.0) * norm.ln());
        }
        let drift: Vec<f64> = corrected.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
        let max = corrected.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min = corrected.iter().copied().fold(f64::INFINITY, f64::min);
        rays.push(RayFit {
            direction: dir.clone(),
            steps,
            intercept: *corrected.last().expect("nonempty"),
            spread: max - min,
            drift_decreasing: drift.windows(2).all(|w| w[1] < w[0]),
            drift,
            corrected,
        });
    }
    Ok(AsymptoticFitReport {
        d,
        alpha: green.alpha,
        a2: a * a,
        m_a: ma,
        reference_intercept: (0.5 * (d as f64 - 3.0) * ma.ln()) - (2.0 * d as f64).ln(),
        rays,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn axis_root_closed_form() {
        for d in 1..=4usize {
            for &a2 in &[0.1, 0.5, 1.9] {
                let a: f64 = f64::sqrt(a2);
                for n in [1i64, 3, 17] {
                    let mut x = vec![0i64; d];
                    x[d - 1] = -n;
                    let r = solve_r(&x, a).unwrap();
                    let exact = ((1.0 + d as f64 * a2).powi(2) - 1.0).sqrt() / n as f64;
                    assert!(((r - exact) / exact).abs() < 1e-13);
                    assert!((norm_a(&x, a).unwrap().norm_a - n as f64).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn diagonal_closed_form() {
        let a: f64 = 0.5f64.sqrt();
        for d in 1..=4 {
            let x = vec![1i64; d];
            let e = norm_a(&x, a).unwrap();
            let r = ((1.0 + a * a).powi(2) - 1.0).sqrt();
            assert!((e.r - r).abs() < 1e-13);
            let expect = d as f64 * (1.0 + a * a).acosh() / m_a(d, a);
            assert!((e.norm_a - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn one_dimensional_decay_rate() {
        let a = a_for_alpha(1, 1.0);
        let lambda = (3.0 - 5f64.sqrt()) / 2.0;
        assert!(((-m_a(1, a)).exp() - lambda).abs() < 1e-12);
        assert!((m_a(1, a) - 0.962).abs() < 1e-3);
    }

    #[test]
    fn log_asymptotic_far_out_is_finite() {
        let v = log_asymptotic_resolvent(&[10_000, -3, 7, 0], 1.0).unwrap();
        assert!(v.is_finite() && v < -1000.0);
    }

    #[test]
    fn small_sweep_is_clean() {
        let rep = verify_norm_lemmas(Execution::Sequential, 3, 4, &default_a2_grid()).unwrap();
        assert_eq!(rep.total_violations, 0);
        assert!(rep.max_axis_error < 1e-12);
    }

    #[test]
    fn grid_parsing() {
        assert_eq!("1/(2d)".parse::<A2Param>().unwrap().value(4), 0.125);
        assert_eq!("0.5".parse::<A2Param>().unwrap().value(4), 0.5);
        let g: Vec<A2Param> = serde_json::from_str(r#"[0.1, "1/(2d)"]"#).unwrap();
        assert_eq!(g, vec![A2Param::Fixed(0.1), A2Param::Named(A2Named::HalfInverseDim)]);
    }

    #[test]
    fn triangle_inequality_spot_check() {
        for (d, a2) in [(2usize, 0.25), (2, 1.5), (3, 0.5)] {
            let worst = triangle_spot_check(d, f64::sqrt(a2), 3).unwrap();
            assert!(worst <= 1e-12, "d = {d}, a² = {a2}: {worst}");
        }
    }
}
