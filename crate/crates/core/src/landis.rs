//! Hypothesis checks for the Landis-type triviality theorems on finite
//! truncations, and the built-in sharpness instance `u = G_1`.
//!
//! Every infinite-graph condition is replaced by a windowed proxy over
//! spheres `{round|x| = r}` kept away from the truncation boundary:
//!
//! * `u ∈ O(ref)`: the window is cut into annular blocks and the sup of
//!   `|u| / ref` is taken per block; the bound holds when the last block is at
//!   most `o_slack` times the smallest block.
//! * `liminf |u| w = 0`: the per-sphere minimum of `|u| w` on the outer half of
//!   the window either vanishes or is nonincreasing and drops by at least the
//!   factor `decay_ratio`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::builders::{Model, ModelSpec};
use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::graph::{apply_schrodinger, edge_ratio_sup, edge_ratio_sup_within, Potential, VertexFunction, VertexLabels, WeightedGraph};
use crate::hardy::{oscillation_and_properness, tree_profile};
use crate::resolvent::{green_for_model, GreenOptions, GreenTable};

/// `acosh(3/2)`, the axis decay rate of `G_1` on ℤ^d.
pub fn axis_rate() -> f64 {
    1.5f64.acosh()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TheoremId {
    /// general comparison with an Agmon ground state
    #[serde(rename = "3.2")]
    General,
    /// `u ∈ O(v)` for the ground state of a critical Hardy weight
    #[serde(rename = "3.4")]
    HardyGroundState,
    /// `u ∈ O(G_0^{1/2})`
    #[serde(rename = "3.5")]
    GreenRoot,
    /// `u ∈ O(G_α)`
    #[serde(rename = "3.6")]
    GreenAlpha,
    /// `u ∈ ℓ²(X, G_1^{-2})`
    #[serde(rename = "l2")]
    L2,
    #[serde(rename = "4.1")]
    Lattice,
    #[serde(rename = "4.2")]
    LatticeAxis,
    #[serde(rename = "4.3")]
    Tree,
    #[serde(rename = "5.1")]
    Fractional,
    #[serde(rename = "5.2")]
    FractionalLine,
}

impl TheoremId {
    pub const ALL: [TheoremId; 10] = [
        TheoremId::General,
        TheoremId::HardyGroundState,
        TheoremId::GreenRoot,
        TheoremId::GreenAlpha,
        TheoremId::L2,
        TheoremId::Lattice,
        TheoremId::LatticeAxis,
        TheoremId::Tree,
        TheoremId::Fractional,
        TheoremId::FractionalLine,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TheoremId::General => "3.2",
            TheoremId::HardyGroundState => "3.4",
            TheoremId::GreenRoot => "3.5",
            TheoremId::GreenAlpha => "3.6",
            TheoremId::L2 => "l2",
            TheoremId::Lattice => "4.1",
            TheoremId::LatticeAxis => "4.2",
            TheoremId::Tree => "4.3",
            TheoremId::Fractional => "5.1",
            TheoremId::FractionalLine => "5.2",
        }
    }
}

impl fmt::Display for TheoremId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TheoremId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        TheoremId::ALL
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown theorem id {s:?}")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LandisOptions {
    /// Sphere radii `[lo, hi]`; by default `[1, r_b − max(2, r_b/3)]` where
    /// `r_b` is the distance from the root to the nearest boundary vertex.
    pub window: Option<(usize, usize)>,
    /// `α` for the `O(G_α)` corollary.
    pub alpha: f64,
    pub zero_tol: f64,
    pub o_slack: f64,
    pub decay_ratio: f64,
    pub blocks: usize,
    /// Largest admissible share of the last sphere in the `ℓ²` partial sum.
    pub l2_tail: f64,
    /// Residual below which `u` counts as `H`-harmonic for the red-flag check.
    pub harmonic_tol: f64,
    pub green: GreenOptions,
}

impl Default for LandisOptions {
    fn default() -> Self {
        LandisOptions {
            window: None,
            alpha: 1.0,
            zero_tol: 1e-12,
            o_slack: 1.05,
            decay_ratio: 0.5,
            blocks: 4,
            l2_tail: 1e-2,
            harmonic_tol: 1e-8,
            green: GreenOptions::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HypothesisCheck {
    pub name: String,
    pub holds: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub value: Option<f64>,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Verdict {
    /// All hypotheses hold, so the theorem forces `u = 0`.
    HypothesesSatisfied,
    HypothesesViolated { violated: Vec<String> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayProfile {
    pub window: (usize, usize),
    pub outer_window: (usize, usize),
    /// `(r, min_{|x| = r} |u(x)| w(x))`
    pub values: Vec<(usize, f64)>,
    pub liminf_proxy: f64,
    pub nonincreasing: bool,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LandisReport {
    pub theorem_id: TheoremId,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub model: Option<ModelSpec>,
    /// `sup b|u|⊗|u| / (b v⊗v)` over window edges against the theorem's
    /// comparison function; `None` when infinite or not applicable.
    pub apriori_constant: Option<f64>,
    pub apriori_infinite: bool,
    /// Per-block sups of `|u| / ref`.
    pub apriori_blocks: Vec<f64>,
    pub decay_weight: String,
    pub decay_profile: DecayProfile,
    pub decay_liminf_proxy: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub l2_partial_sums: Option<Vec<(usize, f64)>>,
    pub potential_bound_ok: bool,
    pub max_potential_ratio: f64,
    /// `max |Hu|` over interior vertices.
    pub harmonic_residual: f64,
    pub core_sup: f64,
    /// Hypotheses hold although `u` is a nonzero `H`-harmonic function on the
    /// truncation.
    pub red_flag: bool,
    pub hypotheses: Vec<HypothesisCheck>,
    pub verdict: Verdict,
}

impl LandisReport {
    pub fn violated(&self) -> Vec<&str> {
        match &self.verdict {
            Verdict::HypothesesSatisfied => Vec::new(),
            Verdict::HypothesesViolated { violated } => violated.iter().map(String::as_str).collect(),
        }
    }
}

/// Spheres around the model root.
#[derive(Clone, Debug)]
pub struct Shells {
    pub radial: Vec<f64>,
    /// Interior vertices grouped by `round(|x|)`.
    pub by_radius: Vec<Vec<usize>>,
    /// Distance from the root to the nearest boundary vertex.
    pub boundary_radius: usize,
}

impl Shells {
    pub fn new(model: &Model) -> Self {
        let g = &model.graph;
        let radial = radial_coordinates(g, model.root);
        let boundary_radius = (0..g.len())
            .filter(|&x| g.is_boundary(x))
            .map(|x| radial[x].round() as usize)
            .min()
            .unwrap_or_else(|| radial.iter().fold(0.0f64, |a, &b| a.max(b)).round() as usize);
        let mut by_radius = vec![Vec::new(); boundary_radius + 1];
        for x in g.interior() {
            let r = radial[x].round() as usize;
            if r <= boundary_radius {
                by_radius[r].push(x);
            }
        }
        Shells {
            radial,
            by_radius,
            boundary_radius,
        }
    }

    pub fn default_window(&self) -> Result<(usize, usize)> {
        let rb = self.boundary_radius;
        let hi = rb.saturating_sub((rb / 3).max(2));
        if hi < 4 {
            return Err(Error::InsufficientData(format!(
                "truncation radius {rb} leaves no room for a decay window"
            )));
        }
        Ok((1, hi))
    }

    fn check_window(&self, (lo, hi): (usize, usize)) -> Result<()> {
        if lo > hi || hi >= self.by_radius.len() {
            return Err(Error::InvalidArgument(format!(
                "window [{lo}, {hi}] does not fit inside radius {}",
                self.boundary_radius
            )));
        }
        if let Some(r) = (lo..=hi).find(|&r| self.by_radius[r].is_empty()) {
            return Err(Error::InsufficientData(format!("sphere of radius {r} is empty")));
        }
        Ok(())
    }
}

fn radial_coordinates(g: &WeightedGraph, root: usize) -> Vec<f64> {
    let labels = g.labels();
    if let Some(dim) = labels.dim() {
        let mut o = vec![0i64; dim];
        let mut p = vec![0i64; dim];
        if labels.write_point(root, &mut o) {
            return (0..g.len())
                .map(|x| {
                    labels.write_point(x, &mut p);
                    p.iter().zip(&o).map(|(a, b)| ((a - b) * (a - b)) as f64).sum::<f64>().sqrt()
                })
                .collect();
        }
    }
    if root == 0 && matches!(labels, VertexLabels::Tree { .. } | VertexLabels::Radial { .. }) {
        return (0..g.len()).map(|x| labels.radial_coordinate(x).unwrap_or(0.0)).collect();
    }
    // hop distance
    let mut dist = vec![f64::INFINITY; g.len()];
    dist[root] = 0.0;
    let mut queue = std::collections::VecDeque::from([root]);
    while let Some(x) = queue.pop_front() {
        let next = dist[x] + 1.0;
        g.for_each_neighbor(x, |y, _| {
            if dist[y].is_infinite() {
                dist[y] = next;
                queue.push_back(y);
            }
        });
    }
    dist
}

fn outer_half((lo, hi): (usize, usize)) -> (usize, usize) {
    (lo + (hi - lo + 1) / 2, hi)
}

fn judge_decay(values: Vec<(usize, f64)>, window: (usize, usize), opts: &LandisOptions) -> DecayProfile {
    let outer = outer_half(window);
    let tail: Vec<f64> = values
        .iter()
        .filter(|(r, _)| *r >= outer.0 && *r <= outer.1)
        .map(|&(_, v)| v)
        .collect();
    let proxy = tail.iter().copied().fold(f64::INFINITY, f64::min);
    let peak = tail.iter().copied().fold(0.0f64, f64::max);
    let last = tail.last().copied().unwrap_or(0.0);
    let nonincreasing = tail.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-9));
    let vanishes = last <= opts.zero_tol;
    let holds = vanishes || (nonincreasing && last <= opts.decay_ratio * peak);
    DecayProfile {
        window,
        outer_window: outer,
        values,
        liminf_proxy: proxy,
        nonincreasing,
        holds,
    }
}

fn sphere_min(shells: &Shells, window: (usize, usize), f: impl Fn(usize) -> f64) -> Vec<(usize, f64)> {
    (window.0..=window.1)
        .map(|r| (r, shells.by_radius[r].iter().map(|&x| f(x)).fold(f64::INFINITY, f64::min)))
        .collect()
}

/// Per-sphere `min |u| / G_ref` with the outer-half liminf proxy.
pub fn decay_profile(model: &Model, u: &VertexFunction, g_ref: &GreenTable, window: Option<(usize, usize)>) -> Result<DecayProfile> {
    let shells = Shells::new(model);
    let window = match window {
        Some(w) => w,
        None => shells.default_window()?,
    };
    shells.check_window(window)?;
    check_len(model, u.len())?;
    check_len(model, g_ref.values.len())?;
    for r in window.0..=window.1 {
        if let Some(&x) = shells.by_radius[r].iter().find(|&&x| !(g_ref.values[x] > 0.0)) {
            return Err(Error::NotPositive {
                vertex: x,
                value: g_ref.values[x],
            });
        }
    }
    let values = sphere_min(&shells, window, |x| u.0[x].abs() / g_ref.values[x]);
    Ok(judge_decay(values, window, &LandisOptions::default()))
}

/// `sup b(x,y)|u(x)||u(y)| / (b'(x,y) v(x) v(y))`, possibly `+∞`.
pub fn check_apriori(b: &WeightedGraph, u: &VertexFunction, b_prime: &WeightedGraph, v: &VertexFunction) -> Result<f64> {
    Ok(edge_ratio_sup(b, u, b_prime, v)?.constant)
}

fn check_len(model: &Model, n: usize) -> Result<()> {
    if n != model.graph.len() {
        return Err(Error::DimensionMismatch {
            expected: model.graph.len(),
            found: n,
        });
    }
    Ok(())
}

/// Reference objects a theorem check may need, computed on the model's
/// truncation.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LandisReferences {
    pub g1: Option<GreenTable>,
    pub g0: Option<GreenTable>,
    pub g_alpha: Option<GreenTable>,
    /// Comparison ground state `v` for the general theorem and the Hardy
    /// corollary.
    pub ground_state: Option<VertexFunction>,
    pub ground_state_kind: Option<String>,
}

enum ModelKind {
    Lattice { d: usize },
    Tree { degree: usize },
    Fractional { d: usize, sigma: f64 },
    Other,
}

fn model_kind(spec: &ModelSpec) -> ModelKind {
    match spec {
        ModelSpec::Lattice(s) => ModelKind::Lattice { d: s.d },
        ModelSpec::Tree(s) | ModelSpec::TreeRadial(s) => ModelKind::Tree { degree: s.degree },
        ModelSpec::Fractional(s) => ModelKind::Fractional { d: s.d, sigma: s.sigma },
        ModelSpec::File { .. } => ModelKind::Other,
    }
}

fn needs_g0(model: &Model, theorems: &[TheoremId]) -> bool {
    let lattice_transient = matches!(model_kind(&model.spec), ModelKind::Lattice { d } if d >= 3);
    theorems.iter().any(|t| match t {
        TheoremId::GreenRoot => true,
        TheoremId::General | TheoremId::HardyGroundState => lattice_transient,
        _ => false,
    })
}

impl LandisReferences {
    /// Solves for whatever the listed theorems need.
    pub fn prepare(exec: Execution, model: &Model, theorems: &[TheoremId], opts: &LandisOptions) -> Result<Self> {
        let mut refs = LandisReferences::default();
        let uses = |ids: &[TheoremId]| theorems.iter().any(|t| ids.contains(t));
        if uses(&[
            TheoremId::General,
            TheoremId::HardyGroundState,
            TheoremId::GreenRoot,
            TheoremId::GreenAlpha,
            TheoremId::L2,
        ]) {
            refs.g1 = Some(green_for_model(exec, model, 1.0, &opts.green)?);
        }
        if needs_g0(model, theorems) {
            refs.g0 = Some(green_for_model(exec, model, 0.0, &opts.green)?);
        }
        if uses(&[TheoremId::GreenAlpha]) {
            refs.g_alpha = if opts.alpha == 1.0 {
                refs.g1.clone()
            } else {
                Some(green_for_model(exec, model, opts.alpha, &opts.green)?)
            };
        }
        if uses(&[TheoremId::General, TheoremId::HardyGroundState]) {
            refs.set_ground_state(model)?;
        }
        Ok(refs)
    }

    fn set_ground_state(&mut self, model: &Model) -> Result<()> {
        let g = &model.graph;
        let shells_radial = radial_coordinates(g, model.root);
        let (v, kind) = match model_kind(&model.spec) {
            ModelKind::Lattice { d } if d <= 2 => (VertexFunction::constant(g.len(), 1.0), "constant".to_string()),
            ModelKind::Lattice { .. } => {
                let g0 = self
                    .g0
                    .as_ref()
                    .ok_or_else(|| Error::MissingReference("G_0 on the truncation".into()))?;
                (VertexFunction(g0.values.iter().map(|v| v.max(0.0).sqrt()).collect()), "G_0^(1/2)".to_string())
            }
            ModelKind::Tree { degree } => (
                VertexFunction(shells_radial.iter().map(|&k| tree_profile(degree, k as usize)).collect()),
                "|x|^(1/2) d^(-|x|/2)".to_string(),
            ),
            ModelKind::Fractional { d: 1, sigma } if sigma < 0.5 => (
                VertexFunction(shells_radial.iter().map(|&r| r.max(1.0).powf(sigma - 0.5)).collect()),
                "declared |x|^((2σ-1)/2)".to_string(),
            ),
            _ => {
                return Err(Error::MissingReference(
                    "no comparison ground state is known for this model".into(),
                ))
            }
        };
        self.ground_state = Some(v);
        self.ground_state_kind = Some(kind);
        Ok(())
    }
}

struct Plan {
    /// `(ref, description)` for the a-priori bound `u ∈ O(ref)`.
    bound: Option<(Vec<f64>, String)>,
    /// Edge-wise bound (general theorem) instead of pointwise.
    edgewise: bool,
    /// `(w, description)` with the liminf hypothesis `liminf |u| w = 0`.
    decay: (Vec<f64>, String),
    axis: Option<usize>,
    extra: Vec<HypothesisCheck>,
    l2: bool,
}

fn missing(what: &str, t: TheoremId) -> Error {
    Error::MissingReference(format!("theorem {t} needs {what}"))
}

fn inverse_green(g1: &GreenTable) -> Vec<f64> {
    g1.values.iter().map(|&v| if v > 0.0 { 1.0 / v } else { 0.0 }).collect()
}

fn plan(model: &Model, shells: &Shells, t: TheoremId, refs: &LandisReferences) -> Result<Plan> {
    let radial = &shells.radial;
    let g1 = || refs.g1.as_ref().ok_or_else(|| missing("G_1", t));
    let power = |p: f64| -> Vec<f64> { radial.iter().map(|&r| r.max(1.0).powf(p)).collect() };
    let green_decay = |g1: &GreenTable| (inverse_green(g1), "1/G_1".to_string());
    let mut plan = Plan {
        bound: None,
        edgewise: false,
        decay: (Vec::new(), String::new()),
        axis: None,
        extra: Vec::new(),
        l2: false,
    };
    match t {
        TheoremId::General | TheoremId::HardyGroundState => {
            let v = refs.ground_state.as_ref().ok_or_else(|| missing("a comparison ground state", t))?;
            let kind = refs.ground_state_kind.clone().unwrap_or_else(|| "v".into());
            plan.bound = Some((v.0.clone(), kind));
            plan.edgewise = t == TheoremId::General;
            plan.decay = green_decay(g1()?);
        }
        TheoremId::GreenRoot => {
            let g0 = refs.g0.as_ref().ok_or_else(|| missing("G_0", t))?;
            let transient = !matches!(model_kind(&model.spec), ModelKind::Lattice { d } if d <= 2);
            let phi = VertexFunction(g0.values.iter().map(|&v| if v > 0.0 { v } else { 1.0 }).collect());
            let osc = oscillation_and_properness(&model.graph, &phi).ok();
            let sup = osc.as_ref().map_or(f64::INFINITY, |o| o.oscillation_sup);
            plan.extra.push(HypothesisCheck {
                name: "green_subcritical".into(),
                holds: transient,
                value: None,
                detail: if transient {
                    "Δ is subcritical".into()
                } else {
                    "Δ is recurrent on ℤ^1 and ℤ^2, G_0 is infinite".into()
                },
            });
            plan.extra.push(HypothesisCheck {
                name: "green_bounded_oscillation".into(),
                holds: sup.is_finite(),
                value: Some(sup),
                detail: format!(
                    "sup G_0(x)/G_0(y) over edges, {} dyadic level bands",
                    osc.map_or(0, |o| o.bands)
                ),
            });
            plan.bound = Some((g0.values.iter().map(|v| v.max(0.0).sqrt()).collect(), "G_0^(1/2)".into()));
            plan.decay = green_decay(g1()?);
        }
        TheoremId::GreenAlpha => {
            let ga = refs.g_alpha.as_ref().ok_or_else(|| missing("G_alpha", t))?;
            plan.bound = Some((ga.values.clone(), format!("G_{}", ga.alpha)));
            plan.decay = green_decay(g1()?);
        }
        TheoremId::L2 => {
            plan.decay = green_decay(g1()?);
            plan.l2 = true;
        }
        TheoremId::Lattice | TheoremId::LatticeAxis => {
            let ModelKind::Lattice { d } = model_kind(&model.spec) else {
                return Err(missing("a lattice model", t));
            };
            plan.bound = Some(if d <= 2 {
                (vec![1.0; radial.len()], "bounded".into())
            } else {
                (power((2.0 - d as f64) / 2.0), format!("|x|^({}/2)", 2 - d as i64))
            });
            let half = (d as f64 - 1.0) / 2.0;
            let rate = if t == TheoremId::Lattice { 1.0 } else { axis_rate() };
            plan.decay = (
                radial.iter().map(|&r| r.powf(half) * (rate * r).exp()).collect(),
                if t == TheoremId::Lattice {
                    format!("|x|^{half} e^|x|")
                } else {
                    format!("n^{half} e^(λn) on an axis, λ = {rate:.6}")
                },
            );
            if t == TheoremId::LatticeAxis {
                plan.axis = Some(d);
            }
        }
        TheoremId::Tree => {
            let ModelKind::Tree { degree } = model_kind(&model.spec) else {
                return Err(missing("a regular tree model", t));
            };
            plan.bound = Some((
                radial.iter().map(|&k| tree_profile(degree, k as usize)).collect(),
                "|x|^(1/2) d^(-|x|/2)".into(),
            ));
            plan.decay = (radial.iter().map(|&k| (degree as f64).powf(k)).collect(), "d^|x|".into());
        }
        TheoremId::Fractional | TheoremId::FractionalLine => {
            let ModelKind::Fractional { d, sigma } = model_kind(&model.spec) else {
                return Err(missing("a fractional lattice model", t));
            };
            let df = d as f64;
            let (ok, range) = if t == TheoremId::Fractional {
                (2.0 * sigma < df, "0 < 2σ < d")
            } else {
                (d == 1 && sigma < 0.5, "d = 1 and σ < 1/2")
            };
            plan.extra.push(HypothesisCheck {
                name: "sigma_range".into(),
                holds: ok,
                value: Some(sigma),
                detail: range.into(),
            });
            let (p, desc) = if t == TheoremId::Fractional {
                (2.0 * sigma - df, "|x|^(2σ-d)")
            } else {
                ((2.0 * sigma - df) / 2.0, "declared |x|^((2σ-d)/2)")
            };
            plan.bound = Some((power(p), desc.into()));
            let q = 2.0 * sigma + df;
            plan.decay = (radial.iter().map(|&r| r.powf(q)).collect(), format!("|x|^{q}"));
        }
    }
    Ok(plan)
}

fn block_sups(shells: &Shells, window: (usize, usize), blocks: usize, f: impl Fn(usize) -> f64) -> Vec<f64> {
    let (lo, hi) = window;
    let count = (hi - lo + 1).min(blocks.max(1));
    let width = (hi - lo + 1) as f64 / count as f64;
    (0..count)
        .map(|b| {
            let a = lo + (b as f64 * width).round() as usize;
            let z = lo + ((b + 1) as f64 * width).round() as usize - 1;
            (a..=z.min(hi))
                .flat_map(|r| shells.by_radius[r].iter())
                .map(|&x| f(x))
                .fold(0.0f64, f64::max)
        })
        .collect()
}

fn shell_of(shells: &Shells, x: usize) -> usize {
    shells.radial[x].round() as usize
}

/// Evaluates every hypothesis of `theorem` for `u` on the model's truncation.
/// `potential` defaults to the model potential.
pub fn check_theorem(
    model: &Model,
    theorem: TheoremId,
    u: &VertexFunction,
    potential: Option<&Potential>,
    refs: &LandisReferences,
    opts: &LandisOptions,
) -> Result<LandisReport> {
    check_len(model, u.len())?;
    let g = &model.graph;
    let shells = Shells::new(model);
    let window = match opts.window {
        Some(w) => w,
        None => shells.default_window()?,
    };
    shells.check_window(window)?;
    let pot = potential.unwrap_or(&model.potential);
    check_len(model, pot.0.len())?;
    let plan = plan(model, &shells, theorem, refs)?;
    let in_window = |x: usize| {
        let r = shell_of(&shells, x);
        !g.is_boundary(x) && r >= window.0 && r <= window.1
    };
    let mut hypotheses = Vec::new();

    // V ≤ 1
    let max_potential_ratio = g
        .interior()
        .map(|x| pot.0[x] / g.measure()[x])
        .fold(f64::NEG_INFINITY, f64::max);
    let potential_bound_ok = max_potential_ratio <= 1.0 + 1e-12;
    hypotheses.push(HypothesisCheck {
        name: "potential_bound".into(),
        holds: potential_bound_ok,
        value: Some(max_potential_ratio),
        detail: "max V/m over interior vertices ≤ 1".into(),
    });
    hypotheses.extend(plan.extra.iter().cloned());

    // a-priori bound
    let mut apriori_constant = None;
    let mut apriori_infinite = false;
    let mut apriori_blocks = Vec::new();
    if let Some((reference, desc)) = &plan.bound {
        let safe = VertexFunction(
            reference
                .iter()
                .enumerate()
                .map(|(x, &v)| if in_window(x) && v > 0.0 { v } else { 1.0 })
                .collect(),
        );
        if let Some(&x) = (0..g.len()).filter(|&x| in_window(x)).find(|&x| !(reference[x] > 0.0)).as_ref() {
            return Err(Error::NotPositive {
                vertex: x,
                value: reference[x],
            });
        }
        let total = edge_ratio_sup_within(g, u, g, &safe, |x, y| in_window(x) && in_window(y))?;
        apriori_infinite = !total.constant.is_finite();
        apriori_constant = total.constant.is_finite().then_some(total.constant);
        apriori_blocks = if plan.edgewise {
            let (lo, hi) = window;
            let count = (hi - lo + 1).min(opts.blocks.max(1));
            let width = (hi - lo + 1) as f64 / count as f64;
            (0..count)
                .map(|b| {
                    let a = lo + (b as f64 * width).round() as usize;
                    let z = lo + ((b + 1) as f64 * width).round() as usize - 1;
                    let keep = |x: usize| in_window(x) && (a..=z).contains(&shell_of(&shells, x));
                    edge_ratio_sup_within(g, u, g, &safe, |x, y| keep(x) && keep(y)).map(|e| e.constant)
                })
                .collect::<Result<_>>()?
        } else {
            block_sups(&shells, window, opts.blocks, |x| u.0[x].abs() / reference[x])
        };
        let floor = apriori_blocks.iter().copied().fold(f64::INFINITY, f64::min);
        let last = apriori_blocks.last().copied().unwrap_or(0.0);
        let holds = last.is_finite() && last <= opts.o_slack * floor;
        hypotheses.push(HypothesisCheck {
            name: "apriori".into(),
            holds,
            value: Some(last),
            detail: format!(
                "u ∈ O({desc}){}: last block {last:.6e} vs smallest {floor:.6e}",
                if plan.edgewise { " edgewise" } else { "" }
            ),
        });
    }

    // liminf
    let (weight, weight_desc) = &plan.decay;
    let decay = match plan.axis {
        Some(d) => {
            let labels = g.labels();
            let origin = labels
                .point(model.root)
                .ok_or_else(|| missing("lattice coordinates", theorem))?;
            let mut best: Option<DecayProfile> = None;
            for j in 0..d {
                let values = (window.0..=window.1)
                    .map(|n| {
                        let mut p = origin.clone();
                        p[j] += n as i64;
                        let x = labels
                            .index_of(&p)
                            .ok_or_else(|| Error::InsufficientData(format!("axis point {p:?} is outside the truncation")))?;
                        Ok((n, u.0[x].abs() * weight[x]))
                    })
                    .collect::<Result<Vec<_>>>()?;
                let prof = judge_decay(values, window, opts);
                let better = match &best {
                    None => true,
                    Some(b) => (prof.holds && !b.holds) || (prof.holds == b.holds && prof.liminf_proxy < b.liminf_proxy),
                };
                if better {
                    best = Some(prof);
                }
            }
            best.expect("d ≥ 1")
        }
        None => judge_decay(sphere_min(&shells, window, |x| u.0[x].abs() * weight[x]), window, opts),
    };
    let mut l2_partial_sums = None;
    if plan.l2 {
        let mut acc = 0.0;
        let mut sums = Vec::new();
        let mut last_shell = 0.0;
        for r in 0..=window.1 {
            last_shell = shells.by_radius[r]
                .iter()
                .map(|&x| (u.0[x] * weight[x]).powi(2))
                .sum::<f64>();
            acc += last_shell;
            if r >= window.0 {
                sums.push((r, acc));
            }
        }
        let holds = last_shell <= opts.l2_tail * acc + opts.zero_tol;
        hypotheses.push(HypothesisCheck {
            name: "l2_summable".into(),
            holds,
            value: Some(acc),
            detail: format!("Σ u²/G_1² up to radius {}; last sphere adds {last_shell:.6e}", window.1),
        });
        l2_partial_sums = Some(sums);
    } else {
        hypotheses.push(HypothesisCheck {
            name: "liminf".into(),
            holds: decay.holds,
            value: Some(decay.liminf_proxy),
            detail: format!(
                "min over radii {:?} of min_(|x|=r) |u| {weight_desc}; nonincreasing: {}",
                decay.outer_window, decay.nonincreasing
            ),
        });
    }

    let hu = apply_schrodinger(g, pot, u)?;
    let harmonic_residual = g.interior().map(|x| hu.0[x].abs()).fold(0.0, f64::max);
    let core_sup = (0..g.len()).filter(|&x| in_window(x) || x == model.root).map(|x| u.0[x].abs()).fold(0.0, f64::max);
    let violated: Vec<String> = hypotheses.iter().filter(|h| !h.holds).map(|h| h.name.clone()).collect();
    let verdict = if violated.is_empty() {
        Verdict::HypothesesSatisfied
    } else {
        Verdict::HypothesesViolated { violated }
    };
    let red_flag = verdict == Verdict::HypothesesSatisfied && core_sup > opts.zero_tol && harmonic_residual <= opts.harmonic_tol;
    Ok(LandisReport {
        theorem_id: theorem,
        model: Some(model.spec.clone()),
        apriori_constant,
        apriori_infinite,
        apriori_blocks,
        decay_weight: weight_desc.clone(),
        decay_liminf_proxy: decay.liminf_proxy,
        decay_profile: decay,
        l2_partial_sums,
        potential_bound_ok,
        max_potential_ratio,
        harmonic_residual,
        core_sup,
        red_flag,
        hypotheses,
        verdict,
    })
}

/// Prepares references once and checks each theorem, in parallel.
pub fn check_theorems(
    exec: Execution,
    model: &Model,
    theorems: &[TheoremId],
    u: &VertexFunction,
    potential: Option<&Potential>,
    opts: &LandisOptions,
) -> Result<Vec<LandisReport>> {
    let refs = LandisReferences::prepare(exec, model, theorems, opts)?;
    exec::map_slice(exec, theorems, |&t| check_theorem(model, t, u, potential, &refs, opts))
        .into_iter()
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SharpnessInstance {
    /// `V = m − (m(o)/G_1(o)) 1_o`, so that `H = Δ + V/m = Δ + 1 − 1_o/G_1(o)`.
    pub potential: Potential,
    pub u: VertexFunction,
    /// `max |(Δ + V/m) u|` over interior vertices.
    pub residual: f64,
    pub potential_at_root: f64,
    pub max_potential_ratio: f64,
    pub green_root: f64,
    pub green: GreenTable,
}

/// `u = G_1` with the potential that makes it `H`-harmonic.
pub fn sharpness_instance(exec: Execution, model: &Model, opts: &GreenOptions) -> Result<SharpnessInstance> {
    let g = &model.graph;
    let green = green_for_model(exec, model, 1.0, opts)?;
    let o = model.root;
    let g_o = green.at_root();
    let mut v: Vec<f64> = g.measure().to_vec();
    v[o] -= g.measure()[o] / g_o;
    let potential = Potential(v);
    let max_potential_ratio = (0..g.len())
        .map(|x| potential.0[x] / g.measure()[x])
        .fold(f64::NEG_INFINITY, f64::max);
    if max_potential_ratio > 1.0 + 1e-12 {
        return Err(Error::Inconsistent(format!(
            "sharpness potential exceeds 1: {max_potential_ratio}"
        )));
    }
    let u = green.function();
    let hu = apply_schrodinger(g, &potential, &u)?;
    let residual = g.interior().map(|x| hu.0[x].abs()).fold(0.0, f64::max);
    Ok(SharpnessInstance {
        potential_at_root: potential.0[o],
        potential,
        u,
        residual,
        max_potential_ratio,
        green_root: g_o,
        green,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builders::{LatticeSpec, TreeSpec};

    fn lattice(d: usize, r: usize) -> Model {
        ModelSpec::Lattice(LatticeSpec::new(d, r)).build().unwrap()
    }

    #[test]
    fn axis_rate_matches_published_digits() {
        assert!((axis_rate() - 0.962).abs() < 1e-3);
    }

    #[test]
    fn ids_round_trip() {
        for t in TheoremId::ALL {
            assert_eq!(t.as_str().parse::<TheoremId>().unwrap(), t);
            assert_eq!(serde_json::to_string(&t).unwrap(), format!("\"{t}\""));
        }
        assert!("9.9".parse::<TheoremId>().is_err());
    }

    #[test]
    fn one_dimensional_sharpness() {
        let m = lattice(1, 200);
        let s = sharpness_instance(Execution::Sequential, &m, &GreenOptions::default()).unwrap();
        assert!((s.potential_at_root - (1.0 - 5f64.sqrt())).abs() < 1e-9);
        assert!(s.residual < 1e-9);
        let r = check_theorems(Execution::Sequential, &m, &[TheoremId::Lattice], &s.u, Some(&s.potential), &LandisOptions::default())
            .unwrap()
            .remove(0);
        assert_eq!(r.violated(), vec!["liminf"]);
        assert!(!r.red_flag);
    }

    #[test]
    fn zero_satisfies_everything() {
        let m = lattice(1, 60);
        let zero = VertexFunction::zeros(m.graph.len());
        let ids = [TheoremId::General, TheoremId::HardyGroundState, TheoremId::GreenAlpha, TheoremId::L2, TheoremId::Lattice, TheoremId::LatticeAxis];
        for r in check_theorems(Execution::Sequential, &m, &ids, &zero, None, &LandisOptions::default()).unwrap() {
            assert_eq!(r.verdict, Verdict::HypothesesSatisfied, "{}", r.theorem_id);
            assert!(!r.red_flag);
        }
    }

    #[test]
    fn green_against_itself_is_one() {
        let m = lattice(2, 20);
        let g1 = green_for_model(Execution::Sequential, &m, 1.0, &GreenOptions::default()).unwrap();
        let p = decay_profile(&m, &g1.function(), &g1, None).unwrap();
        assert!(p.values.iter().all(|(_, v)| (v - 1.0).abs() < 1e-12));
        assert!(!p.holds);
        let faster = VertexFunction(
            (0..m.graph.len())
                .map(|x| g1.values[x] * 0.5f64.powf(Shells::new(&m).radial[x]))
                .collect(),
        );
        assert!(decay_profile(&m, &faster, &g1, None).unwrap().holds);
    }

    #[test]
    fn l2_criterion_diverges_for_green() {
        let m = lattice(1, 60);
        let g1 = green_for_model(Execution::Sequential, &m, 1.0, &GreenOptions::default()).unwrap();
        let r = check_theorems(Execution::Sequential, &m, &[TheoremId::L2], &g1.function(), None, &LandisOptions::default())
            .unwrap()
            .remove(0);
        assert_eq!(r.violated(), vec!["l2_summable"]);
        let sums = r.l2_partial_sums.unwrap();
        // one vertex per side per sphere
        assert!((sums[1].1 - sums[0].1 - 2.0).abs() < 1e-9);
    }

    #[test]
    fn tree_ground_state_violates_liminf_only() {
        let m = ModelSpec::Tree(TreeSpec::new(3, 12)).build().unwrap();
        let v = VertexFunction((0..m.graph.len()).map(|x| tree_profile(3, Shells::new(&m).radial[x] as usize)).collect());
        let refs = LandisReferences::default();
        let r = check_theorem(&m, TheoremId::Tree, &v, None, &refs, &LandisOptions::default()).unwrap();
        assert_eq!(r.violated(), vec!["liminf"]);
        assert!((r.apriori_blocks.last().unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn growing_function_breaks_apriori_bound() {
        let m = lattice(1, 60);
        let shells = Shells::new(&m);
        let u = VertexFunction(shells.radial.iter().map(|r| 1.0 + r).collect());
        let r = check_theorem(&m, TheoremId::Lattice, &u, None, &LandisReferences::default(), &LandisOptions::default()).unwrap();
        assert!(r.violated().contains(&"apriori"));
    }

    #[test]
    fn wrong_model_is_a_missing_reference() {
        let m = lattice(1, 20);
        let u = VertexFunction::zeros(m.graph.len());
        let err = check_theorem(&m, TheoremId::Tree, &u, None, &LandisReferences::default(), &LandisOptions::default()).unwrap_err();
        assert!(matches!(err, Error::MissingReference(_)));
    }
}
