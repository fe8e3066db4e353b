//! Fractional powers of the lattice Laplacian as weighted graphs.
//!
//! The weights are `w(z) = |Γ(−σ)|^{−1} ∫_0^∞ p_t(z) t^{−1−σ} dt` where `p_t`
//! is the continuous-time random walk kernel on ℤ^d.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::graph::{LatticeKernel, VertexLabels, WeightedGraph};
use crate::quadrature::{gauss_kronrod, tanh_sinh, Estimate};
use crate::regression::{fit_loglog, LineFit};
use crate::resolvent::{green_dirichlet_with, GreenOptions};
use crate::special::ln_heat_kernel;

/// Numerical settings for the weight integrals.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QuadSpec {
    pub rel_tol: f64,
    pub max_intervals: usize,
    /// Recompute every entry with tanh-sinh and record the relative gap.
    pub dual_check: bool,
    pub dual_max_level: u32,
}

impl Default for QuadSpec {
    fn default() -> Self {
        QuadSpec {
            rel_tol: 1e-13,
            max_intervals: 4000,
            dual_check: true,
            dual_max_level: 12,
        }
    }
}

/// How weights beyond the cutoff are treated when building a graph.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TailMode {
    /// Only offsets with `‖z‖_∞ ≤ R_w`.
    Drop,
    /// All pairs inside the box, with `c |z|^{−(d+2σ)}` beyond `R_w`, and the
    /// mass of pairs leaving the box as exterior (killing) mass.
    #[default]
    Include,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FractionalSpec {
    pub d: usize,
    pub sigma: f64,
    /// Weight cutoff `R_w`.
    #[serde(alias = "rw")]
    pub cutoff: usize,
    #[serde(alias = "box")]
    pub box_radius: usize,
    #[serde(default)]
    pub tail: TailMode,
    #[serde(default)]
    pub quad: QuadSpec,
    #[serde(default = "default_limit")]
    pub max_vertices: usize,
}

fn default_limit() -> usize {
    crate::builders::DEFAULT_VERTEX_LIMIT
}

impl FractionalSpec {
    pub fn new(d: usize, sigma: f64, cutoff: usize, box_radius: usize) -> Self {
        FractionalSpec {
            d,
            sigma,
            cutoff,
            box_radius,
            tail: TailMode::Include,
            quad: QuadSpec::default(),
            max_vertices: default_limit(),
        }
    }

    pub fn interior_radius(&self) -> usize {
        self.box_radius.saturating_sub(self.cutoff)
    }
}

/// Weight table over absolute offsets `[0, R_w]^d` (row-major, entry 0 unused).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FractionalWeights {
    pub d: usize,
    pub sigma: f64,
    pub cutoff: usize,
    pub table: Vec<f64>,
    /// Gauss–Kronrod error estimate per entry.
    pub quad_error: Vec<f64>,
    /// Relative gap to the tanh-sinh value per entry (zero when unchecked).
    pub dual_gap: Vec<f64>,
    /// `c` in the tail model `c |z|^{−(d+2σ)}`, fitted on the outer shell.
    pub tail_coefficient: f64,
    /// Estimated `Σ_{‖z‖_∞ > R_w} w(z)`.
    pub tail_mass: f64,
    /// `Σ_{z ≠ 0} w(z)` by a separate quadrature.
    pub total_mass: f64,
}

impl FractionalWeights {
    pub fn exponent(&self) -> f64 {
        self.d as f64 + 2.0 * self.sigma
    }

    fn index(&self, abs: &[usize]) -> usize {
        abs.iter().fold(0, |acc, &a| acc * (self.cutoff + 1) + a)
    }

    /// `w(z)` for `0 < ‖z‖_∞ ≤ R_w`, else `None`.
    pub fn weight(&self, z: &[i64]) -> Option<f64> {
        if z.len() != self.d || z.iter().all(|&x| x == 0) {
            return None;
        }
        let abs: Vec<usize> = z.iter().map(|x| x.unsigned_abs() as usize).collect();
        if abs.iter().any(|&a| a > self.cutoff) {
            return None;
        }
        Some(self.table[self.index(&abs)])
    }

    /// Table value when tabulated, tail model otherwise.
    pub fn weight_or_tail(&self, abs: &[usize]) -> f64 {
        if abs.iter().all(|&a| a == 0) {
            return 0.0;
        }
        if abs.iter().all(|&a| a <= self.cutoff) {
            return self.table[self.index(abs)];
        }
        let r2: f64 = abs.iter().map(|&a| (a * a) as f64).sum();
        self.tail_coefficient * r2.powf(-0.5 * self.exponent())
    }

    pub fn table_mass(&self) -> f64 {
        let mut total = 0.0;
        let mut abs = vec![0usize; self.d];
        for (i, &w) in self.table.iter().enumerate() {
            unrank(i, self.cutoff + 1, &mut abs);
            let mult = abs.iter().map(|&a| if a > 0 { 2.0 } else { 1.0 }).product::<f64>();
            total += mult * w;
        }
        total
    }

    pub fn max_dual_gap(&self) -> f64 {
        self.dual_gap.iter().copied().fold(0.0, f64::max)
    }
}

fn unrank(mut i: usize, side: usize, out: &mut [usize]) {
    for k in (0..out.len()).rev() {
        out[k] = i % side;
        i /= side;
    }
}

fn check_sigma(sigma: f64) -> Result<()> {
    if !(sigma > 0.0 && sigma < 1.0) {
        return Err(Error::InvalidArgument(format!("σ must lie in (0, 1), got {sigma}")));
    }
    Ok(())
}

/// `∫_0^1 p_t(z) t^{−1−σ} dt` after `s = t^ν`, `ν = ‖z‖_1 − σ`.
fn head_integrand(z: &[i64], sigma: f64) -> impl Fn(f64) -> f64 + '_ {
    let l1: i64 = z.iter().map(|x| x.abs()).sum();
    let nu = l1 as f64 - sigma;
    move |s: f64| {
        if s <= 0.0 {
            return 0.0;
        }
        let t = s.powf(1.0 / nu);
        if t <= 0.0 {
            return 0.0;
        }
        (ln_heat_kernel(t, z) - l1 as f64 * t.ln() - nu.ln()).exp()
    }
}

/// `∫ p_t(z) t^{−σ} du` with `t = e^u`.
fn tail_integrand(z: &[i64], sigma: f64) -> impl Fn(f64) -> f64 + '_ {
    move |u: f64| (ln_heat_kernel(u.exp(), z) - sigma * u).exp()
}

const TAIL_SEGMENT_CAP: f64 = 700.0;

struct Integral {
    value: Estimate,
    dual_gap: f64,
}

fn integrate_piece<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, q: &QuadSpec) -> Result<(Estimate, Option<f64>)> {
    let gk = gauss_kronrod(f, a, b, 1e-300, q.rel_tol, q.max_intervals)?;
    let dual = if q.dual_check {
        Some(tanh_sinh(f, a, b, 1e-13, q.dual_max_level).map(|e| e.value).unwrap_or(f64::NAN))
    } else {
        None
    };
    Ok((gk, dual))
}

/// `∫_1^∞ p_t(z) t^{−1−σ} dt` on doubling `u`-segments, plus the analytic
/// tail of `(4πt)^{−d/2}` past the last segment.
fn integrate_tail(z: &[i64], sigma: f64, q: &QuadSpec) -> Result<(Estimate, f64)> {
    let f = tail_integrand(z, sigma);
    let d = z.len() as f64;
    let mut total = Estimate {
        value: 0.0,
        error: 0.0,
        evaluations: 0,
    };
    let mut dual_total = 0.0;
    let (mut a, mut b) = (0.0, 8.0);
    loop {
        let (e, dual) = integrate_piece(&f, a, b, q)?;
        total = total + e;
        dual_total += dual.unwrap_or(e.value);
        if e.value.abs() < 1e-13 * total.value.abs() || b >= TAIL_SEGMENT_CAP {
            break;
        }
        a = b;
        b = if b < 16.0 { 16.0 } else { (2.0 * b).min(TAIL_SEGMENT_CAP) };
    }
    let rate = 0.5 * d + sigma;
    let analytic = (4.0 * std::f64::consts::PI).powf(-0.5 * d) * (-rate * b).exp() / rate;
    total.value += analytic;
    dual_total += analytic;
    Ok((total, dual_total))
}

/// `|Γ(−σ)| w(z)` for `z ≠ 0`, with the tanh-sinh cross-check.
fn raw_weight(z: &[i64], sigma: f64, q: &QuadSpec) -> Result<Integral> {
    let head = head_integrand(z, sigma);
    let (h, h_dual) = integrate_piece(&head, 0.0, 1.0, q)?;
    let (t, t_dual) = integrate_tail(z, sigma, q)?;
    let value = h + t;
    let dual_gap = match h_dual {
        Some(hd) => ((hd + t_dual - value.value) / value.value).abs(),
        None => 0.0,
    };
    Ok(Integral { value, dual_gap })
}

/// Weight `w(z)` for a single nonzero offset.
pub fn fractional_weight(z: &[i64], sigma: f64, quad: &QuadSpec) -> Result<f64> {
    check_sigma(sigma)?;
    if z.is_empty() || z.iter().all(|&x| x == 0) {
        return Err(Error::InvalidArgument("offset must be nonzero".into()));
    }
    Ok(raw_weight(z, sigma, quad)?.value.value / gamma(-sigma).abs())
}

/// `Σ_{z≠0} w(z) = |Γ(−σ)|^{−1} ∫_0^∞ (1 − p_t(0)) t^{−1−σ} dt`.
pub fn fractional_total_mass(d: usize, sigma: f64, quad: &QuadSpec) -> Result<f64> {
    check_sigma(sigma)?;
    let zero = vec![0i64; d];
    // s = t^{1−σ} on [0, 1]
    let nu = 1.0 - sigma;
    let head = |s: f64| {
        if s <= 0.0 {
            return 2.0 * d as f64 / nu;
        }
        let t = s.powf(1.0 / nu);
        if t < 1e-14 {
            return 2.0 * d as f64 / nu;
        }
        -(ln_heat_kernel(t, &zero)).exp_m1() / (t * nu)
    };
    let h = gauss_kronrod(head, 0.0, 1.0, 1e-300, quad.rel_tol, quad.max_intervals)?;
    let (t, _) = integrate_tail(&zero, sigma, &QuadSpec { dual_check: false, ..*quad })?;
    Ok((h.value + 1.0 / sigma - t.value) / gamma(-sigma).abs())
}

/// Tabulates `w` on `0 < ‖z‖_∞ ≤ R_w`. One integral per symmetry class
/// (sorted absolute offsets); the rest is filled by permutation.
pub fn fractional_weights(exec: Execution, d: usize, sigma: f64, cutoff: usize, quad: &QuadSpec) -> Result<FractionalWeights> {
    check_sigma(sigma)?;
    if d == 0 || cutoff < 1 {
        return Err(Error::InvalidArgument("need d ≥ 1 and R_w ≥ 1".into()));
    }
    let side = cutoff + 1;
    let size = side
        .checked_pow(d as u32)
        .filter(|&s| s <= 50_000_000)
        .ok_or(Error::TooLarge {
            count: usize::MAX,
            limit: 50_000_000,
        })?;
    let mut classes = Vec::new();
    let mut abs = vec![0usize; d];
    for i in 1..size {
        unrank(i, side, &mut abs);
        if abs.windows(2).all(|w| w[0] <= w[1]) {
            classes.push(abs.iter().map(|&a| a as i64).collect::<Vec<i64>>());
        }
    }
    let results = exec::map_slice(exec, &classes, |z| raw_weight(z, sigma, quad));
    let norm = gamma(-sigma).abs();
    let mut class_value = std::collections::HashMap::with_capacity(classes.len());
    for (z, r) in classes.iter().zip(results) {
        let r = r.map_err(|e| match e {
            Error::NoConvergence(_) => Error::Quadrature {
                offset: z.clone(),
                estimate: f64::NAN,
            },
            other => other,
        })?;
        let tol = (quad.rel_tol * 1e3).max(1e-10) * r.value.value.abs();
        if r.value.error > tol {
            return Err(Error::Quadrature {
                offset: z.clone(),
                estimate: r.value.error / norm,
            });
        }
        class_value.insert(z.clone(), (r.value.value / norm, r.value.error / norm, r.dual_gap));
    }
    let mut table = vec![0.0; size];
    let mut quad_error = vec![0.0; size];
    let mut dual_gap = vec![0.0; size];
    let mut key = vec![0i64; d];
    for i in 1..size {
        unrank(i, side, &mut abs);
        for (k, a) in key.iter_mut().zip(&abs) {
            *k = *a as i64;
        }
        key.sort_unstable();
        let (w, e, g) = class_value[&key];
        table[i] = w;
        quad_error[i] = e;
        dual_gap[i] = g;
    }
    let mut fw = FractionalWeights {
        d,
        sigma,
        cutoff,
        table,
        quad_error,
        dual_gap,
        tail_coefficient: 0.0,
        tail_mass: 0.0,
        total_mass: fractional_total_mass(d, sigma, quad)?,
    };
    fw.tail_coefficient = fit_tail_coefficient(&fw);
    fw.tail_mass = estimate_tail_mass(&fw);
    Ok(fw)
}

/// Mean of `w(z) |z|^{d+2σ}` over the outer shell `‖z‖_∞ = R_w`.
fn fit_tail_coefficient(fw: &FractionalWeights) -> f64 {
    let side = fw.cutoff + 1;
    let mut abs = vec![0usize; fw.d];
    let (mut sum, mut count) = (0.0, 0usize);
    for (i, &w) in fw.table.iter().enumerate() {
        unrank(i, side, &mut abs);
        if abs.iter().copied().max() == Some(fw.cutoff) {
            let r2: f64 = abs.iter().map(|&a| (a * a) as f64).sum();
            sum += w * r2.powf(0.5 * fw.exponent());
            count += 1;
        }
    }
    sum / count as f64
}

/// Direct sum of the tail model over `R_w < ‖z‖_∞ ≤ L` plus the continuum
/// remainder `c ω_{d−1} (L + ½)^{d−s} / (s − d)`.
fn estimate_tail_mass(fw: &FractionalWeights) -> f64 {
    let d = fw.d;
    let s = fw.exponent();
    let l = if d <= 2 { 16 * fw.cutoff } else { 2 * fw.cutoff };
    let side = l + 1;
    let mut abs = vec![0usize; d];
    let mut direct = 0.0;
    for i in 1..side.pow(d as u32) {
        unrank(i, side, &mut abs);
        if abs.iter().copied().max().unwrap_or(0) > fw.cutoff {
            let mult = abs.iter().map(|&a| if a > 0 { 2.0 } else { 1.0 }).product::<f64>();
            direct += mult * fw.weight_or_tail(&abs);
        }
    }
    let sphere = match d {
        1 => 2.0,
        2 => 2.0 * std::f64::consts::PI,
        _ => 2.0 * std::f64::consts::PI.powf(0.5 * d as f64) / gamma(0.5 * d as f64),
    };
    direct + fw.tail_coefficient * sphere * (l as f64 + 0.5).powf(d as f64 - s) / (s - d as f64)
}

/// Graph on the box `[−box_radius, box_radius]^d` with m ≡ 1 and a Dirichlet
/// boundary layer of thickness `R_w`.
pub fn build_fractional_graph(fw: &FractionalWeights, box_radius: usize, tail: TailMode, max_vertices: usize) -> Result<WeightedGraph> {
    if box_radius <= fw.cutoff {
        return Err(Error::InvalidArgument(format!(
            "box radius {box_radius} leaves no interior inside a boundary layer of thickness {}",
            fw.cutoff
        )));
    }
    let d = fw.d;
    let n = (2 * box_radius + 1).checked_pow(d as u32).unwrap_or(usize::MAX);
    if n > max_vertices {
        return Err(Error::TooLarge {
            count: n,
            limit: max_vertices,
        });
    }
    let inner = (box_radius - fw.cutoff) as i64;
    let labels = VertexLabels::LatticeBox { dim: d, radius: box_radius };
    let mut p = vec![0i64; d];
    let boundary: Vec<bool> = (0..n)
        .map(|v| {
            labels.write_point(v, &mut p);
            p.iter().any(|x| x.abs() > inner)
        })
        .collect();
    match tail {
        TailMode::Drop => {
            let kernel = LatticeKernel {
                dim: d,
                radius: box_radius,
                cutoff: fw.cutoff,
                table: fw.table.clone(),
            };
            WeightedGraph::from_kernel(kernel, boundary, None)
        }
        TailMode::Include => {
            let span = 2 * box_radius;
            let side = span + 1;
            let size = side.checked_pow(d as u32).filter(|&s| s <= max_vertices.max(1 << 20) * 4).ok_or(Error::TooLarge {
                count: usize::MAX,
                limit: max_vertices,
            })?;
            let mut abs = vec![0usize; d];
            let table: Vec<f64> = (0..size)
                .map(|i| {
                    unrank(i, side, &mut abs);
                    fw.weight_or_tail(&abs)
                })
                .collect();
            let kernel = LatticeKernel {
                dim: d,
                radius: box_radius,
                cutoff: span,
                table,
            };
            let in_box = in_box_mass(&kernel);
            let exterior: Vec<f64> = (0..n)
                .map(|v| if boundary[v] { 0.0 } else { (fw.total_mass - in_box[v]).max(0.0) })
                .collect();
            WeightedGraph::from_kernel(kernel, boundary, Some(exterior))
        }
    }
}

/// `Σ_{y ∈ box, y ≠ x} w(x − y)` for every box vertex, via a prefix-sum
/// table over signed offsets.
fn in_box_mass(kernel: &LatticeKernel) -> Vec<f64> {
    let d = kernel.dim;
    let r = kernel.radius;
    let span = kernel.cutoff.min(2 * r);
    let side = 2 * span + 1;
    let total = side.pow(d as u32);
    let mut abs = vec![0usize; d];
    let mut pos = vec![0usize; d];
    let mut prefix: Vec<f64> = (0..total)
        .map(|i| {
            unrank(i, side, &mut pos);
            for k in 0..d {
                abs[k] = (pos[k] as i64 - span as i64).unsigned_abs() as usize;
            }
            if abs.iter().all(|&a| a == 0) {
                0.0
            } else {
                kernel.weight_abs(&abs)
            }
        })
        .collect();
    let mut stride = 1usize;
    for _ in 0..d {
        for i in 0..total {
            if (i / stride) % side != 0 {
                prefix[i] += prefix[i - stride];
            }
        }
        stride *= side;
    }
    let n = (2 * r + 1).pow(d as u32);
    let mut corner = vec![0usize; d];
    (0..n)
        .map(|v| {
            kernel.unrank(v, &mut pos);
            // offsets y − x range over [−pos_k, 2r − pos_k], shifted by span
            let mut sum = 0.0;
            for mask in 0..(1usize << d) {
                let mut sign = 1.0;
                let mut skip = false;
                for k in 0..d {
                    if mask & (1 << k) != 0 {
                        corner[k] = span + 2 * r - pos[k];
                    } else {
                        let lo = span - pos[k];
                        if lo == 0 {
                            skip = true;
                            break;
                        }
                        corner[k] = lo - 1;
                        sign = -sign;
                    }
                }
                if !skip {
                    let idx = corner.iter().fold(0, |acc, &c| acc * side + c);
                    sum += sign * prefix[idx];
                }
            }
            sum
        })
        .collect()
}

pub fn build_from_spec(spec: &FractionalSpec) -> Result<(WeightedGraph, FractionalWeights)> {
    build_from_spec_with(Execution::preferred(), spec)
}

pub fn build_from_spec_with(exec: Execution, spec: &FractionalSpec) -> Result<(WeightedGraph, FractionalWeights)> {
    let fw = fractional_weights(exec, spec.d, spec.sigma, spec.cutoff, &spec.quad)?;
    let g = build_fractional_graph(&fw, spec.box_radius, spec.tail, spec.max_vertices)?;
    Ok((g, fw))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlopeReport {
    pub d: usize,
    pub sigma: f64,
    pub alpha: f64,
    pub box_radius: usize,
    pub cutoff: usize,
    pub tail: TailMode,
    pub window: (f64, f64),
    pub fit: LineFit,
    /// `2σ − d` for α = 0, `−(2σ + d)` for α > 0.
    pub target: f64,
    pub relative_error: f64,
    /// `(|x|, G(x))` along the positive first axis inside the window.
    pub profile: Vec<(f64, f64)>,
    pub green_root: f64,
    pub residual: f64,
    pub weight_tail_mass: f64,
    pub max_dual_gap: f64,
}

/// Default fit window: `[2, R_int/20]` for α = 0, `[R_w/3, R_int/3]` otherwise.
pub fn default_window(spec: &FractionalSpec, alpha: f64) -> (f64, f64) {
    let ri = spec.interior_radius() as f64;
    if alpha == 0.0 {
        (2.0, (ri / 20.0).max(4.0))
    } else {
        ((spec.cutoff as f64 / 3.0).max(2.0), ri / 3.0)
    }
}

/// Solves for `G^σ_α` on the fractional graph and fits `log G` against
/// `log |x|` along the 2d axis rays inside the window.
pub fn fractional_green_slopes(exec: Execution, spec: &FractionalSpec, alpha: f64, window: Option<(f64, f64)>) -> Result<SlopeReport> {
    check_sigma(spec.sigma)?;
    if !(alpha >= 0.0) {
        return Err(Error::InvalidArgument("α must be nonnegative".into()));
    }
    if alpha == 0.0 && !(2.0 * spec.sigma < spec.d as f64) {
        return Err(Error::InvalidArgument(format!(
            "α = 0 needs 0 < 2σ < d, got σ = {} and d = {}",
            spec.sigma, spec.d
        )));
    }
    let window = window.unwrap_or_else(|| default_window(spec, alpha));
    let ri = spec.interior_radius();
    let lo = window.0.ceil().max(1.0) as usize;
    let hi = (window.1.floor() as usize).min(ri.saturating_sub(1));
    if hi < lo + 2 {
        return Err(Error::InsufficientData(format!(
            "window [{}, {}] holds fewer than 3 radii inside the interior radius {ri}",
            window.0, window.1
        )));
    }
    let (g, fw) = build_from_spec_with(exec, spec)?;
    let o = g
        .labels()
        .index_of(&vec![0; spec.d])
        .ok_or_else(|| Error::InvalidArgument("origin outside the box".into()))?;
    let table = green_dirichlet_with(exec, &g, o, alpha, &GreenOptions::default())?;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut profile = Vec::new();
    let mut p = vec![0i64; spec.d];
    for k in 0..spec.d {
        for sign in [1i64, -1] {
            for r in lo..=hi {
                p.iter_mut().for_each(|x| *x = 0);
                p[k] = sign * r as i64;
                let v = table.values[g.labels().index_of(&p).expect("inside the box")];
                xs.push(r as f64);
                ys.push(v);
                if k == 0 && sign == 1 {
                    profile.push((r as f64, v));
                }
            }
        }
    }
    let fit = fit_loglog(&xs, &ys)?;
    let target = if alpha == 0.0 {
        2.0 * spec.sigma - spec.d as f64
    } else {
        -(2.0 * spec.sigma + spec.d as f64)
    };
    Ok(SlopeReport {
        d: spec.d,
        sigma: spec.sigma,
        alpha,
        box_radius: spec.box_radius,
        cutoff: spec.cutoff,
        tail: spec.tail,
        window: (lo as f64, hi as f64),
        relative_error: ((fit.slope - target) / target).abs(),
        fit,
        target,
        profile,
        green_root: table.at_root(),
        residual: table.residual,
        weight_tail_mass: fw.tail_mass,
        max_dual_gap: fw.max_dual_gap(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use statrs::function::gamma::ln_gamma;

    fn exact_1d(z: i64, sigma: f64) -> f64 {
        let z = z.abs() as f64;
        let c = 4f64.powf(sigma) * gamma(0.5 + sigma) / (std::f64::consts::PI.sqrt() * gamma(-sigma).abs());
        c * (ln_gamma(z - sigma) - ln_gamma(z + 1.0 + sigma)).exp()
    }

    #[test]
    fn one_dimensional_closed_form() {
        for &sigma in &[0.25, 0.5, 0.8] {
            for z in [1i64, 2, 7, 30] {
                let w = fractional_weight(&[z], sigma, &QuadSpec::default()).unwrap();
                let e = exact_1d(z, sigma);
                assert!(((w - e) / e).abs() < 1e-11, "σ={sigma} z={z}: {w} vs {e}");
            }
        }
    }

    #[test]
    fn total_mass_one_dimension() {
        let sigma = 0.25;
        let m = fractional_total_mass(1, sigma, &QuadSpec::default()).unwrap();
        let exact = 4f64.powf(sigma) * gamma(0.5 + sigma) / (std::f64::consts::PI.sqrt() * gamma(1.0 + sigma));
        assert!(((m - exact) / exact).abs() < 1e-11);
    }

    #[test]
    fn table_symmetry_and_dual_check() {
        let fw = fractional_weights(Execution::Sequential, 2, 0.5, 4, &QuadSpec::default()).unwrap();
        let a = fw.weight(&[1, 2]).unwrap();
        assert_eq!(a, fw.weight(&[2, 1]).unwrap());
        assert_eq!(a, fw.weight(&[-1, 2]).unwrap());
        assert!(fw.max_dual_gap() < 1e-9);
        assert!(fw.table.iter().skip(1).all(|&w| w > 0.0));
    }

    #[test]
    fn in_box_mass_matches_direct_sum() {
        let fw = fractional_weights(Execution::Sequential, 2, 0.5, 2, &QuadSpec::default()).unwrap();
        let g = build_fractional_graph(&fw, 4, TailMode::Include, 1000).unwrap();
        for x in 0..g.len() {
            if g.is_boundary(x) {
                continue;
            }
            let direct = g.degree(x);
            assert!(((fw.total_mass - direct).max(0.0) - g.exterior_mass(x)).abs() < 1e-12);
        }
    }

    #[test]
    fn drop_graph_degree_and_constants() {
        let fw = fractional_weights(Execution::Sequential, 1, 0.25, 5, &QuadSpec::default()).unwrap();
        let g = build_fractional_graph(&fw, 12, TailMode::Drop, 1000).unwrap();
        let o = g.labels().index_of(&[0]).unwrap();
        assert_eq!(g.neighbor_count(o), 10);
        assert!((g.degree(o) - fw.table_mass()).abs() < 1e-14);
        let lap = crate::graph::apply_laplacian(&g, &crate::graph::VertexFunction::constant(g.len(), 1.0)).unwrap();
        for x in g.interior() {
            assert!(lap.0[x].abs() < 1e-14);
        }
    }
}
