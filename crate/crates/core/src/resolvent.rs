//! Green functions by Dirichlet exhaustion, the α ↘ 0 limit, criticality
//! constants, and null-sequence energies.

use serde::{Deserialize, Serialize};

use crate::builders::{Model, ModelSpec};
use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::graph::{Potential, VertexFunction, VertexLabels, WeightedGraph};
use crate::linalg::{
    envelope_size, lanczos_smallest, solve_spd, DirichletOperator, EnvelopeLdl, RankOneShift, SignVerdict, SolveMethod,
    SolverConfig, SymOperator,
};

/// Values of `G_α` with `(Δ + α) G_α = 1_o` at interior vertices and zero on
/// the boundary layer.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GreenTable {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub model: Option<ModelSpec>,
    pub root: usize,
    pub alpha: f64,
    pub values: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub radius: Option<usize>,
    pub converged: bool,
    /// Sup over the core of the change from the previous truncation.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub est_error: Option<f64>,
    /// Max over interior vertices of `|(Δ + α) G − 1_o|`.
    pub residual: f64,
    pub method: SolveMethod,
    /// Whether every interior value came out strictly positive.
    pub positive: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub stop_reason: Option<String>,
    /// Root values per truncation radius (exhaustion runs only).
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub history: Vec<(usize, f64)>,
    /// Aitken Δ² extrapolation over the last three radii on the core,
    /// raw values elsewhere (exhaustion runs only).
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub extrapolated: Option<Vec<f64>>,
}

impl GreenTable {
    pub fn function(&self) -> VertexFunction {
        VertexFunction(self.values.clone())
    }

    pub fn at_root(&self) -> f64 {
        self.values[self.root]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GreenOptions {
    pub solver: SolverConfig,
}

impl Default for GreenOptions {
    fn default() -> Self {
        GreenOptions {
            solver: SolverConfig::default(),
        }
    }
}

/// Solves `Σ_y b(x,y)(u(x) − u(y)) + α m(x) u(x) = m(o) 1_o(x)` on the
/// interior with zero boundary values, so that `(Δ + α) u = 1_o` pointwise.
pub fn green_dirichlet(g: &WeightedGraph, o: usize, alpha: f64) -> Result<GreenTable> {
    green_dirichlet_with(Execution::preferred(), g, o, alpha, &GreenOptions::default())
}

pub fn green_dirichlet_with(
    exec: Execution,
    g: &WeightedGraph,
    o: usize,
    alpha: f64,
    opts: &GreenOptions,
) -> Result<GreenTable> {
    if !(alpha >= 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidArgument(format!("alpha must be finite and nonnegative, got {alpha}")));
    }
    if o >= g.len() || g.is_boundary(o) {
        return Err(Error::InvalidArgument(format!("root {o} is not an interior vertex")));
    }
    let shift: Vec<f64> = g.measure().iter().map(|m| alpha * m).collect();
    let op = DirichletOperator::with_exec(exec, g, &shift)?;
    let mut b = vec![0.0; op.dim()];
    let lo = op.local_index(o).expect("interior root");
    b[lo] = g.measure()[o];
    let sol = solve_spd(exec, &op, &b, &opts.solver)?;
    let mut ax = vec![0.0; op.dim()];
    op.apply(exec, &sol.x, &mut ax);
    let residual = op
        .interior()
        .iter()
        .enumerate()
        .map(|(i, &x)| ((ax[i] - b[i]) / g.measure()[x]).abs())
        .fold(0.0, f64::max);
    let positive = sol.x.iter().all(|&v| v > 0.0);
    Ok(GreenTable {
        model: None,
        root: o,
        alpha,
        values: op.to_global(&sol.x),
        radius: None,
        converged: true,
        est_error: None,
        residual,
        method: sol.method,
        positive,
        stop_reason: None,
        history: Vec::new(),
        extrapolated: None,
    })
}

/// Builds the model and solves for its Green function at the model root.
pub fn green_for_model(exec: Execution, model: &Model, alpha: f64, opts: &GreenOptions) -> Result<GreenTable> {
    let mut t = green_dirichlet_with(exec, &model.graph, model.root, alpha, opts)?;
    t.model = Some(model.spec.clone());
    t.radius = model.spec.radius();
    Ok(t)
}

/// Maps values on one truncation to another truncation of the same model;
/// vertices absent from `from` get zero.
pub fn transfer(from: &WeightedGraph, values: &[f64], to: &WeightedGraph) -> Result<Vec<f64>> {
    let mut out = vec![0.0; to.len()];
    match (from.labels(), to.labels()) {
        (VertexLabels::Tree { .. }, VertexLabels::Tree { .. }) | (VertexLabels::Radial { .. }, VertexLabels::Radial { .. }) => {
            // breadth-first numbering: smaller balls are prefixes of larger ones
            let n = from.len().min(to.len());
            out[..n].copy_from_slice(&values[..n]);
        }
        (lf, lt) if lf.dim().is_some() && lf.dim() == lt.dim() => {
            let mut p = vec![0i64; lf.dim().unwrap_or(0)];
            for (y, o) in out.iter_mut().enumerate() {
                lt.write_point(y, &mut p);
                if let Some(x) = lf.index_of(&p) {
                    *o = values[x];
                }
            }
        }
        _ => return Err(Error::InvalidArgument("truncations carry incompatible labels".into())),
    }
    Ok(out)
}

fn core_mask(g: &WeightedGraph, core_radius: f64) -> Vec<bool> {
    (0..g.len())
        .map(|x| !g.is_boundary(x) && g.labels().radial_coordinate(x).is_some_and(|r| r <= core_radius + 1e-9))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExhaustionOptions {
    pub start_radius: Option<usize>,
    pub growth: f64,
    pub max_radius: usize,
    /// Divergence is declared when the root value exceeds this.
    pub divergence_cap: f64,
    pub green: GreenOptions,
}

impl Default for ExhaustionOptions {
    fn default() -> Self {
        ExhaustionOptions {
            start_radius: None,
            growth: 1.5,
            max_radius: 200,
            divergence_cap: 1e6,
            green: GreenOptions::default(),
        }
    }
}

/// Radii `R_0, ⌈1.5 R_0⌉, …` capped at `max_radius`.
pub fn exhaustion_radii(start: usize, growth: f64, max_radius: usize) -> Vec<usize> {
    let mut radii = vec![start.min(max_radius)];
    while *radii.last().expect("nonempty") < max_radius {
        let r = *radii.last().expect("nonempty");
        let next = ((r as f64 * growth).round() as usize).max(r + 1).min(max_radius);
        radii.push(next);
    }
    radii
}

fn aitken(a: f64, b: f64, c: f64) -> f64 {
    let d1 = b - a;
    let d2 = c - b;
    let den = d2 - d1;
    if den.abs() <= 1e-300 || (d1 * d2) <= 0.0 {
        c
    } else {
        c - d2 * d2 / den
    }
}

/// Aitken Δ² limit of the last three entries of a sequence.
pub fn aitken_limit(seq: &[f64]) -> Option<f64> {
    if seq.len() < 3 {
        return None;
    }
    let n = seq.len();
    Some(aitken(seq[n - 3], seq[n - 2], seq[n - 1]))
}

/// Dirichlet exhaustion: solves on growing truncations until the sup change
/// on the core ball is at most `tol`. Reaching the radius cap or the
/// divergence cap returns the last table with `converged = false`.
pub fn green_exhaustion(
    exec: Execution,
    spec: &ModelSpec,
    alpha: f64,
    core_radius: usize,
    tol: f64,
    opts: &ExhaustionOptions,
) -> Result<GreenTable> {
    if spec.radius().is_none() {
        return Err(Error::InvalidArgument("exhaustion needs a model with a truncation radius".into()));
    }
    let start = opts.start_radius.unwrap_or(2 * core_radius + 2).max(core_radius + 2);
    let radii = exhaustion_radii(start, opts.growth, opts.max_radius.max(start));
    let mut prev: Option<(Model, Vec<f64>)> = None;
    let mut core_history: Vec<Vec<f64>> = Vec::new();
    let mut history = Vec::new();
    let mut last_change = None;
    for (step, &r) in radii.iter().enumerate() {
        let s = spec.with_radius(r).expect("radius-parametrized model");
        let model = s.build()?;
        let mut table = green_for_model(exec, &model, alpha, &opts.green)?;
        let core = core_mask(&model.graph, core_radius as f64);
        let core_idx: Vec<usize> = (0..model.graph.len()).filter(|&x| core[x]).collect();
        history.push((r, table.at_root()));
        let mut change = None;
        if let Some((pm, pv)) = &prev {
            let mapped = transfer(&pm.graph, pv, &model.graph)?;
            let sup = core_idx
                .iter()
                .map(|&x| (table.values[x] - mapped[x]).abs())
                .fold(0.0, f64::max);
            change = Some(sup);
        }
        core_history.push(core_idx.iter().map(|&x| table.values[x]).collect());
        let diverging = table.at_root() > opts.divergence_cap;
        let converged = change.is_some_and(|c| c <= tol);
        let last = step + 1 == radii.len();
        if converged || diverging || last {
            table.est_error = change;
            table.converged = converged && !diverging;
            table.history = history;
            if !table.converged {
                let trend = match (last_change, change) {
                    (Some(a), Some(b)) if b > 0.8 * a => "increments are not shrinking (divergent trend)",
                    (Some(_), Some(_)) => "increments are shrinking",
                    _ => "too few radii to judge the trend",
                };
                table.stop_reason = Some(if diverging {
                    format!("root value exceeded the divergence cap {:e} at radius {r}", opts.divergence_cap)
                } else {
                    format!("radius cap {r} reached before the core change fell below {tol:e}; {trend}")
                });
            }
            if core_history.len() >= 3 {
                let k = core_history.len();
                let mut ext = table.values.clone();
                for (j, &x) in core_idx.iter().enumerate() {
                    ext[x] = aitken(core_history[k - 3][j], core_history[k - 2][j], core_history[k - 1][j]);
                }
                table.extrapolated = Some(ext);
            }
            return Ok(table);
        }
        last_change = change;
        prev = Some((model, table.values));
    }
    unreachable!("loop returns on the last radius")
}

/// Outcome of [`green_zero_limit`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum ZeroLimit {
    Converged {
        table: GreenTable,
        /// Sup-norm increments on the core along the α sequence.
        increments: Vec<f64>,
        /// Sup difference on the core from the α = 0 solve.
        cross_check: f64,
    },
    Divergent {
        alphas: Vec<f64>,
        root_values: Vec<f64>,
        increments: Vec<f64>,
        reason: String,
    },
}

/// `G_0 = lim_{α↘0} G_α` on the core ball of a fixed truncation.
///
/// Convergence is declared when the sup-norm increments between successive
/// α shrink geometrically (ratio at most 0.7 over the tail of the sequence);
/// the limit is then cross-validated against the α = 0 solve on the same
/// truncation.
pub fn green_zero_limit(
    exec: Execution,
    model: &Model,
    alphas: &[f64],
    core_radius: usize,
    cross_tol: f64,
    opts: &GreenOptions,
) -> Result<ZeroLimit> {
    if alphas.len() < 3 {
        return Err(Error::InsufficientData("need at least three α values".into()));
    }
    if alphas.windows(2).any(|w| !(w[1] < w[0])) || alphas.iter().any(|&a| !(a > 0.0)) {
        return Err(Error::InvalidArgument("α sequence must be positive and strictly decreasing".into()));
    }
    let core = core_mask(&model.graph, core_radius as f64);
    let core_idx: Vec<usize> = (0..model.graph.len()).filter(|&x| core[x]).collect();
    let tables: Vec<GreenTable> = alphas
        .iter()
        .map(|&a| green_for_model(exec, model, a, opts))
        .collect::<Result<_>>()?;
    let increments: Vec<f64> = tables
        .windows(2)
        .map(|w| core_idx.iter().map(|&x| (w[1].values[x] - w[0].values[x]).abs()).fold(0.0, f64::max))
        .collect();
    let root_values: Vec<f64> = tables.iter().map(|t| t.at_root()).collect();
    let floor = 1e-14 * root_values.last().copied().unwrap_or(1.0);
    let shrinking = increments.windows(2).all(|w| w[1] <= 0.7 * w[0] || w[1] <= floor);
    let tail = &increments[increments.len().saturating_sub(3)..];
    if !shrinking {
        return Ok(ZeroLimit::Divergent {
            alphas: alphas.to_vec(),
            root_values,
            increments,
            reason: "sup-norm increments on the core do not shrink geometrically".into(),
        });
    }
    let mut last = tables.last().expect("nonempty").clone();
    // geometric tail of the increments bounds the remaining distance
    let q = tail.windows(2).map(|w| if w[0] > 0.0 { w[1] / w[0] } else { 0.0 }).fold(0.0, f64::max);
    let remaining = tail.last().copied().unwrap_or(0.0) * q / (1.0 - q).max(1e-12);
    let zero = green_for_model(exec, model, 0.0, opts)?;
    let cross = core_idx.iter().map(|&x| (zero.values[x] - last.values[x]).abs()).fold(0.0, f64::max);
    if cross > cross_tol.max(2.0 * remaining + cross_tol) {
        return Err(Error::Inconsistent(format!(
            "α ↘ 0 limit differs from the α = 0 solve by {cross:.3e} on the core"
        )));
    }
    last.alpha = *alphas.last().expect("nonempty");
    last.est_error = Some(remaining);
    Ok(ZeroLimit::Converged {
        table: last,
        increments,
        cross_check: cross,
    })
}

/// Roots `g_− ≤ g_+` of `d g² − (d+1) g + 1 = 0`, the forward-tree recursion
/// written with `d` forward neighbours per vertex.
pub fn forward_green_root(d: usize) -> (f64, f64) {
    let (a, b) = (d as f64, (d + 1) as f64);
    let disc = (b * b - 4.0 * a).sqrt();
    ((b - disc) / (2.0 * a), (b + disc) / (2.0 * a))
}

/// Forward Green value `g` and `G_α(o)` on the `d`-regular tree, where each
/// vertex other than the root has `d − 1` forward neighbours:
/// `(d−1) g² − (α+d) g + 1 = 0` (smaller root) and `G_α(o) = 1/(α + d − d g)`,
/// so `G_α(x) = G_α(o) g^{|x|}`.
pub fn regular_tree_green(d: usize, alpha: f64) -> (f64, f64) {
    let q = (d - 1) as f64;
    let b = alpha + d as f64;
    // stable smaller root
    let g = 2.0 / (b + (b * b - 4.0 * q).sqrt());
    (g, 1.0 / (alpha + d as f64 - d as f64 * g))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticalityProbeResult {
    pub alpha: f64,
    pub root: usize,
    pub radii: Vec<usize>,
    /// `C*_R` per radius.
    pub c_star: Vec<f64>,
    /// Aitken Δ² limit of the last three `C*_R`, when available.
    pub extrapolated: Option<f64>,
    pub bisect_tol: f64,
    /// `1 / G^R_α(o)` on the same truncations, for comparison.
    pub inverse_green_root: Vec<f64>,
    /// Eigenvalue test used at each radius.
    pub methods: Vec<String>,
}

impl CriticalityProbeResult {
    pub fn last(&self) -> f64 {
        *self.c_star.last().expect("nonempty")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticalityOptions {
    pub direct_limit: usize,
    pub lanczos_max_iter: usize,
}

impl Default for CriticalityOptions {
    fn default() -> Self {
        CriticalityOptions {
            direct_limit: SolverConfig::default().direct_limit,
            lanczos_max_iter: 4000,
        }
    }
}

/// Whether the Dirichlet form of `Δ + α − C 1_o` is nonnegative.
fn form_nonnegative(exec: Execution, op: &DirichletOperator<'_>, o: usize, c: f64, direct: bool, max_iter: usize) -> Result<bool> {
    let shifted = RankOneShift { base: op, index: o, c };
    if direct {
        return match EnvelopeLdl::factor(&shifted) {
            Ok(f) => Ok(f.negative_pivots() == 0),
            Err(Error::Singular(_)) => Ok(true),
            Err(e) => Err(e),
        };
    }
    let start: Vec<f64> = (0..op.dim()).map(|i| if i == o { 1.0 } else { 0.05 }).collect();
    let out = lanczos_smallest(exec, &shifted, &start, max_iter, 10)?;
    Ok(match out.verdict {
        SignVerdict::Negative => false,
        SignVerdict::NonNegative => true,
        SignVerdict::Undetermined => out.theta >= 0.0,
    })
}

/// `C*_R = sup{C : Δ + α − C 1_o has nonnegative Dirichlet form on B_R}` by
/// bisection, one eigenvalue sign test per step (inertia of an envelope
/// `LDLᵀ` when affordable, Lanczos otherwise).
pub fn criticality_constant(
    exec: Execution,
    spec: &ModelSpec,
    alpha: f64,
    radii: &[usize],
    bisect_tol: f64,
    opts: &CriticalityOptions,
) -> Result<CriticalityProbeResult> {
    if radii.is_empty() {
        return Err(Error::InsufficientData("no radii given".into()));
    }
    let mut c_star = Vec::new();
    let mut inverse_green_root = Vec::new();
    let mut methods = Vec::new();
    let mut root = 0;
    for &r in radii {
        let model = spec
            .with_radius(r)
            .ok_or_else(|| Error::InvalidArgument("model has no truncation radius".into()))?
            .build()?;
        let g = &model.graph;
        root = model.root;
        let shift: Vec<f64> = g.measure().iter().map(|m| alpha * m).collect();
        let op = DirichletOperator::with_exec(exec, g, &shift)?;
        let o = op.local_index(model.root).ok_or_else(|| Error::InvalidArgument("root on the boundary".into()))?;
        let mo = g.measure()[model.root];
        let direct = envelope_size(&op) <= opts.direct_limit;
        methods.push(if direct { "envelope_inertia" } else { "lanczos" }.to_string());
        let test = |c: f64| form_nonnegative(exec, &op, o, c * mo, direct, opts.lanczos_max_iter);
        let mut lo = 0.0;
        // e_o certifies a negative form just above the diagonal entry
        let mut hi = op.diagonal()[o] / mo * (1.0 + 1e-6);
        if !test(lo)? {
            return Err(Error::Bracket(format!("operator is not positive at C = 0 on radius {r}")));
        }
        if test(hi)? {
            return Err(Error::Bracket(format!("form still nonnegative at C = {hi} on radius {r}")));
        }
        while hi - lo > bisect_tol * hi {
            let mid = 0.5 * (lo + hi);
            if test(mid)? {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        c_star.push(0.5 * (lo + hi));
        let gt = green_for_model(exec, &model, alpha, &GreenOptions::default());
        inverse_green_root.push(gt.map(|t| 1.0 / t.at_root()).unwrap_or(f64::NAN));
    }
    Ok(CriticalityProbeResult {
        alpha,
        root,
        radii: radii.to_vec(),
        extrapolated: aitken_limit(&c_star),
        c_star,
        bisect_tol,
        inverse_green_root,
        methods,
    })
}

/// Cutoff families for null-sequence energies on ℤ^d.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CutoffProfile {
    /// `(1 − |x|/n)_+`
    Tent,
    /// `min(1, (log(n²/|x|) / log n)_+)`
    LogCutoff,
}

impl CutoffProfile {
    pub fn value(self, n: usize, r: f64) -> f64 {
        let nf = n as f64;
        match self {
            CutoffProfile::Tent => (1.0 - r / nf).max(0.0),
            CutoffProfile::LogCutoff => {
                if r <= nf {
                    1.0
                } else {
                    ((nf * nf / r).ln() / nf.ln()).clamp(0.0, 1.0)
                }
            }
        }
    }

    /// Radius beyond which the profile vanishes.
    pub fn support_radius(self, n: usize) -> usize {
        match self {
            CutoffProfile::Tent => n,
            CutoffProfile::LogCutoff => n * n,
        }
    }
}

/// `Q_0(φ_n)` on ℤ^d for the radial cutoff `φ_n(x) = profile(n, |x|)`,
/// summed directly over the support. Uses the symmetry of `φ_n` under
/// coordinate permutations and sign flips:
/// `Q = 2d Σ_{x_1 ≥ 0, x_k ≥ 0} 2^{#{k ≥ 2 : x_k > 0}} (φ(x) − φ(x + e_1))²`.
pub fn null_sequence_energy(exec: Execution, d: usize, profile: CutoffProfile, ns: &[usize]) -> Result<Vec<(usize, f64)>> {
    if d == 0 {
        return Err(Error::InvalidArgument("dimension must be positive".into()));
    }
    let mut out = Vec::with_capacity(ns.len());
    for &n in ns {
        if n < 2 {
            return Err(Error::InvalidArgument("cutoff scale must be at least 2".into()));
        }
        let support = profile.support_radius(n) + 1;
        let q = exec::sum_range(exec, support + 1, |x1| {
            let mut acc = 0.0;
            let mut rest = vec![0usize; d - 1];
            loop {
                let s2: f64 = rest.iter().map(|&v| (v * v) as f64).sum();
                let a = profile.value(n, ((x1 * x1) as f64 + s2).sqrt());
                let b = profile.value(n, (((x1 + 1) * (x1 + 1)) as f64 + s2).sqrt());
                let mult = (1u64 << rest.iter().filter(|&&v| v > 0).count()) as f64;
                acc += mult * (a - b) * (a - b);
                let mut k = 0;
                loop {
                    if k == rest.len() {
                        return acc;
                    }
                    rest[k] += 1;
                    if rest[k] <= support {
                        break;
                    }
                    rest[k] = 0;
                    k += 1;
                }
            }
        });
        out.push((n, 2.0 * d as f64 * q));
    }
    Ok(out)
}

/// `Q(φ)` for an explicit cutoff on a built truncation; errors when the
/// cutoff reaches the boundary layer.
pub fn null_sequence_energy_on(g: &WeightedGraph, potential: &Potential, profile: CutoffProfile, n: usize) -> Result<f64> {
    let phi = VertexFunction(
        (0..g.len())
            .map(|x| {
                let r = g.labels().radial_coordinate(x).unwrap_or(f64::INFINITY);
                profile.value(n, r)
            })
            .collect(),
    );
    crate::graph::quadratic_form(g, potential, &phi)
}
