//! Subcommand arguments and runners.

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use landis_core::builders::{LatticeSpec, ModelSpec, NormKind, TreeSpec, DEFAULT_VERTEX_LIMIT};
use landis_core::fractional::{fractional_green_slopes, fractional_weights, FractionalSpec, QuadSpec, TailMode};
use landis_core::hardy::{hardy_form_spot_check, supersolution_hardy, tree_ground_state, HardyWeightTable};
use landis_core::landis::{
    check_theorem, sharpness_instance, LandisOptions, LandisReferences, LandisReport, TheoremId,
};
use landis_core::lattice_norms::{asymptotic_fit, default_a2_grid, norm_a, verify_norm_lemmas, A2Param};
use landis_core::resolvent::{
    criticality_constant, green_exhaustion, green_for_model, transfer, CriticalityOptions, ExhaustionOptions,
    GreenOptions, GreenTable,
};
use landis_core::{Execution, Potential, VertexFunction, WeightedGraph};

use crate::config::Failure;
use crate::output::{sig17, Table};

/// What a subcommand hands back to the dispatcher.
pub struct Outcome {
    pub result: Value,
    pub table: Table,
    /// Whether the report flags a hypothesis violation (exit code 2).
    pub violation: bool,
}

type Run = Result<Outcome, Failure>;

fn json<T: Serialize>(v: &T) -> Result<Value, Failure> {
    serde_json::to_value(v).map_err(|e| Failure::new("json", e.to_string()))
}

fn pair<T: Copy>(v: &Option<Vec<T>>, flag: &str) -> Result<Option<(T, T)>, Failure> {
    match v.as_deref() {
        None => Ok(None),
        Some([a, b]) => Ok(Some((*a, *b))),
        Some(_) => Err(Failure::config(format!("--{flag} takes exactly two values lo,hi"))),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    Lattice,
    Tree,
    TreeRadial,
    File,
    Fractional,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NormArg {
    Box,
    L1,
    L2,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TailArg {
    Include,
    Drop,
}

impl From<TailArg> for TailMode {
    fn from(t: TailArg) -> Self {
        match t {
            TailArg::Include => TailMode::Include,
            TailArg::Drop => TailMode::Drop,
        }
    }
}

/// Model selection shared by the graph-based subcommands.
#[derive(Args, Clone, Debug, Serialize, Deserialize)]
pub struct ModelArgs {
    #[arg(long, value_enum, default_value_t = ModelKind::Lattice)]
    pub model: ModelKind,
    /// Lattice dimension (lattice and fractional models).
    #[arg(long)]
    pub d: Option<usize>,
    /// Tree degree.
    #[arg(long)]
    pub degree: Option<usize>,
    /// Truncation radius.
    #[arg(long)]
    pub radius: Option<usize>,
    #[arg(long, value_enum)]
    pub norm: Option<NormArg>,
    /// Root lattice point, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub root: Option<Vec<i64>>,
    /// Edge TSV for file models.
    #[arg(long)]
    pub edges: Option<PathBuf>,
    /// Vertex TSV for file models.
    #[arg(long)]
    pub vertices: Option<PathBuf>,
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Fractional weight cutoff.
    #[arg(long)]
    pub rw: Option<usize>,
    #[arg(long = "box")]
    pub box_radius: Option<usize>,
    #[arg(long, value_enum)]
    pub tail: Option<TailArg>,
    #[arg(long)]
    pub max_vertices: Option<usize>,
}

impl ModelArgs {
    fn need_d(&self) -> Result<usize, Failure> {
        self.d.ok_or_else(|| Failure::config("--d is required for this model"))
    }

    /// Builds the `ModelSpec`; `default_radius(kind, d)` fills a missing radius.
    pub fn spec(&self, default_radius: impl Fn(ModelKind, usize) -> usize) -> Result<ModelSpec, Failure> {
        let limit = self.max_vertices.unwrap_or(DEFAULT_VERTEX_LIMIT);
        Ok(match self.model {
            ModelKind::Lattice => {
                let d = self.need_d()?;
                ModelSpec::Lattice(LatticeSpec {
                    d,
                    radius: self.radius.unwrap_or_else(|| default_radius(ModelKind::Lattice, d)),
                    norm: match self.norm {
                        None | Some(NormArg::Box) => NormKind::Box,
                        Some(NormArg::L1) => NormKind::L1,
                        Some(NormArg::L2) => NormKind::L2,
                    },
                    root: self.root.clone(),
                    max_vertices: limit,
                })
            }
            ModelKind::Tree | ModelKind::TreeRadial => {
                let degree = self.degree.unwrap_or(3);
                let spec = TreeSpec {
                    degree,
                    radius: self.radius.unwrap_or_else(|| default_radius(self.model, degree)),
                    max_vertices: limit,
                };
                if self.model == ModelKind::Tree {
                    ModelSpec::Tree(spec)
                } else {
                    ModelSpec::TreeRadial(spec)
                }
            }
            ModelKind::File => ModelSpec::File {
                edges: self.edges.clone().ok_or_else(|| Failure::config("--edges is required for file models"))?,
                vertices: self
                    .vertices
                    .clone()
                    .ok_or_else(|| Failure::config("--vertices is required for file models"))?,
            },
            ModelKind::Fractional => {
                let d = self.need_d()?;
                let sigma = self.sigma.ok_or_else(|| Failure::config("--sigma is required for fractional models"))?;
                let rw = self.rw.unwrap_or(10);
                let bx = self
                    .box_radius
                    .or(self.radius)
                    .unwrap_or_else(|| default_radius(ModelKind::Fractional, d).max(2 * rw));
                let mut s = FractionalSpec::new(d, sigma, rw, bx);
                if let Some(t) = self.tail {
                    s.tail = t.into();
                }
                s.max_vertices = limit;
                ModelSpec::Fractional(s)
            }
        })
    }
}

fn labels(g: &WeightedGraph) -> impl Iterator<Item = (usize, String)> + '_ {
    (0..g.len()).map(|x| (x, g.labels().name(x)))
}

/// Reads a vertex function: a JSON array, or TSV lines holding either a
/// value (in vertex order) or `vertex<TAB>value`.
fn read_vertex_values(path: &Path, n: usize) -> Result<Vec<f64>, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::new("io", format!("{}: {e}", path.display())))?;
    if text.trim_start().starts_with('[') {
        let v: Vec<f64> = serde_json::from_str(&text).map_err(|e| Failure::new("parse", format!("{}: {e}", path.display())))?;
        if v.len() != n {
            return Err(Failure::new("dimension_mismatch", format!("{}: {} values, expected {n}", path.display(), v.len())));
        }
        return Ok(v);
    }
    let bad = |line: usize, what: &str| Failure::new("parse", format!("{}:{line}: {what}", path.display()));
    let mut out = vec![0.0; n];
    let mut next = 0usize;
    for (i, raw) in text.lines().enumerate() {
        let t = raw.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = t.split('\t').map(str::trim).collect();
        let (idx, val) = match fields.as_slice() {
            [v] => {
                next += 1;
                (next - 1, *v)
            }
            [x, v] => (x.parse::<usize>().map_err(|_| bad(i + 1, "invalid vertex index"))?, *v),
            _ => return Err(bad(i + 1, "expected one or two tab-separated fields")),
        };
        if idx >= n {
            return Err(bad(i + 1, "vertex index out of range"));
        }
        out[idx] = val.parse::<f64>().map_err(|_| bad(i + 1, "invalid value"))?;
    }
    Ok(out)
}

// ---------------------------------------------------------------- green

#[derive(Args, Clone, Debug, Serialize, Deserialize)]
pub struct GreenArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub model: ModelArgs,
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    /// Run a Dirichlet exhaustion until the core ball of this radius settles.
    #[arg(long)]
    pub core_radius: Option<usize>,
    /// Sup-norm change on the core that ends the exhaustion.
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long, default_value_t = 200)]
    pub max_radius: usize,
    #[arg(long, default_value_t = 1.5)]
    pub growth: f64,
    #[arg(skip)]
    pub solver: Option<GreenOptions>,
}

impl GreenArgs {
    pub fn run(&self, exec: Execution) -> Run {
        let spec = self.model.spec(|kind, d| match kind {
            ModelKind::Lattice if d >= 3 => 20,
            ModelKind::Lattice => 60,
            _ => 12,
        })?;
        let green = self.solver.unwrap_or_default();
        let table = match self.core_radius {
            Some(core) => {
                let opts = ExhaustionOptions {
                    start_radius: self.model.radius.or(self.model.box_radius),
                    growth: self.growth,
                    max_radius: self.max_radius,
                    green,
                    ..Default::default()
                };
                green_exhaustion(exec, &spec, self.alpha, core, self.tol, &opts)?
            }
            None => green_for_model(exec, &spec.build()?, self.alpha, &green)?,
        };
        let spec = table.model.clone().unwrap_or(spec);
        let g = spec.build()?.graph;
        let mut csv = Table::new(&["vertex", "label", "value", "extrapolated"]);
        for (x, name) in labels(&g) {
            let ext = table.extrapolated.as_ref().map(|e| sig17(e[x])).unwrap_or_default();
            csv.push(vec![x.to_string(), name, sig17(table.values[x]), ext]);
        }
        Ok(Outcome {
            result: json(&table)?,
            table: csv,
            violation: false,
        })
    }
}

// ---------------------------------------------------------------- norm

#[derive(Args, Clone, Debug, Serialize, Deserialize)]
pub struct NormArgs {
    #[arg(long)]
    pub d: Option<usize>,
    /// `a²`, a number or `1/(2d)`.
    #[arg(long)]
    pub a2: Option<String>,
    /// Lattice point, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub point: Option<Vec<i64>>,
    /// Sweep all points with `0 < ‖x‖_∞ ≤ R` in dimensions `1..=d`.
    #[arg(long)]
    pub sweep_radius: Option<usize>,
    /// Semicolon-separated `a²` grid for sweeps.
    #[arg(long)]
    pub a2_grid: Option<String>,
}

fn parse_grid(s: &Option<String>) -> Result<Vec<A2Param>, Failure> {
    match s {
        None => Ok(default_a2_grid()),
        Some(s) => s
            .split(';')
            .map(|t| t.parse::<A2Param>().map_err(Failure::from))
            .collect(),
    }
}

impl NormArgs {
    pub fn run(&self, exec: Execution) -> Run {
        if let Some(r) = self.sweep_radius {
            let d = self.d.ok_or_else(|| Failure::config("--d is required for sweeps"))?;
            return lemma_outcome(verify_norm_lemmas(exec, d, r, &parse_grid(&self.a2_grid)?)?);
        }
        let x = self
            .point
            .as_ref()
            .ok_or_else(|| Failure::config("norm needs --point or --sweep-radius"))?;
        if let Some(d) = self.d {
            if d != x.len() {
                return Err(Failure::config(format!("--point has {} coordinates but --d is {d}", x.len())));
            }
        }
        let a2: A2Param = self
            .a2
            .as_deref()
            .ok_or_else(|| Failure::config("--a2 is required with --point"))?
            .parse()?;
        let a2 = a2.value(x.len());
        let eval = norm_a(x, a2.sqrt())?;
        let mut csv = Table::new(&["x", "d", "a", "r", "norm_a", "m_a", "log_asymptotic", "asymptotic"]);
        let opt = |v: Option<f64>| v.map(sig17).unwrap_or_default();
        csv.push(vec![
            x.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(","),
            eval.d.to_string(),
            sig17(eval.a),
            sig17(eval.r),
            sig17(eval.norm_a),
            sig17(eval.m_a),
            opt(eval.log_asymptotic),
            opt(eval.asymptotic),
        ]);
        Ok(Outcome {
            result: json(&eval)?,
            table: csv,
            violation: false,
        })
    }
}

fn lemma_outcome(report: landis_core::lattice_norms::NormLemmaReport) -> Run {
    let mut csv = Table::new(&[
        "d",
        "a2",
        "points",
        "lower_violations",
        "upper_violations",
        "decay_violations",
        "min_lower_slack",
        "min_upper_slack",
        "min_decay_slack",
        "max_root_residual",
        "max_axis_error",
    ]);
    for c in &report.cases {
        csv.push(vec![
            c.d.to_string(),
            sig17(c.a2),
            c.points.to_string(),
            c.lower_violations.to_string(),
            c.upper_violations.to_string(),
            c.decay_violations.to_string(),
            sig17(c.min_lower_slack),
            sig17(c.min_upper_slack),
            sig17(c.min_decay_slack),
            sig17(c.max_root_residual),
            sig17(c.max_axis_error),
        ]);
    }
    Ok(Outcome {
        violation: report.total_violations > 0,
        result: json(&report)?,
        table: csv,
    })
}

// ---------------------------------------------------------------- verify-lemmas

#[derive(Args, Clone, Debug, Serialize, Deserialize)]
pub struct VerifyLemmasArgs {
    #[arg(long, default_value_t = 4)]
    pub d_max: usize,
    #[arg(long, default_value_t = 20)]
    pub radius: usize,
    /// Semicolon-separated `a²` grid; `1/(2d)` is allowed.
    #[arg(long)]
    pub a2_grid: Option<String>,
}

impl VerifyLemmasArgs {
    pub fn run(&self, exec: Execution) -> Run {
        lemma_outcome(verify_norm_lemmas(exec, self.d_max, self.radius, &parse_grid(&self.a2_grid)?)?)
    }
}

// ---------------------------------------------------------------- fit

#[derive(Args, Clone, Debug, Serialize, Deserialize)]
pub struct FitArgs {
    /// GreenTable JSON, bare or as written by `green`.
    #[arg(long)]
    pub table: PathBuf,
    /// Semicolon-separated ray directions, e.g. `1,0,0;1,1,1`.
    #[arg(long, allow_hyphen_values = true)]
    pub directions: Option<String>,
    /// Ray steps `lo,hi`.
    #[arg(long, value_delimiter = ',')]
    pub window: Option<Vec<usize>>,
    /// Fit the Aitken-extrapolated values when the table has them.
    #[arg(long, default_value_t = false)]
    pub extrapolated: bool,
}

fn parse_directions(s: &str) -> Result<Vec<Vec<i64>>, Failure> {
    s.split(';')
        .map(|dir| {
            dir.split(',')
                .map(|c| c.trim().parse::<i64>().map_err(|_| Failure::config(format!("invalid direction {dir:?}"))))
                .collect()
        })
        .collect()
}

impl FitArgs {
    pub fn run(&self, _exec: Execution) -> Run {
        let text = std::fs::read_to_string(&self.table)
            .map_err(|e| Failure::new("io", format!("{}: {e}", self.table.display())))?;
        let mut doc: Value = serde_json::from_str(&text).map_err(|e| Failure::new("parse", e.to_string()))?;
        if let Some(r) = doc.get_mut("result") {
            doc = r.take();
        }
        let mut table: GreenTable = serde_json::from_value(doc).map_err(|e| Failure::new("parse", format!("GreenTable: {e}")))?;
        let spec = table
            .model
            .clone()
            .ok_or_else(|| Failure::config("the table carries no model spec"))?;
        if self.extrapolated {
            table.values = table
                .extrapolated
                .clone()
                .ok_or_else(|| Failure::config("the table has no extrapolated values"))?;
        }
        let model = spec.build()?;
        let d = spec.lattice_dim().ok_or_else(|| Failure::config("fits need a lattice table"))?;
        let directions = match &self.directions {
            Some(s) => parse_directions(s)?,
            None => {
                let mut axis = vec![0; d];
                axis[0] = 1;
                if d == 1 {
                    vec![axis]
                } else {
                    vec![axis, vec![1; d]]
                }
            }
        };
        let r = spec.radius().unwrap_or(8);
        let window = pair(&self.window, "window")?.unwrap_or((2, (r / 2).max(4)));
        let report = asymptotic_fit(&model.graph, &table, &directions, window)?;
        let mut csv = Table::new(&["direction", "n", "corrected"]);
        for ray in &report.rays {
            let dir = ray.direction.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(",");
            for (n, c) in ray.steps.iter().zip(&ray.corrected) {
                csv.push(vec![dir.clone(), n.to_string(), sig17(*c)]);
            }
        }
        Ok(Outcome {
            result: json(&report)?,
            table: csv,
            violation: false,
        })
    }
}

// ---------------------------------------------------------------- hardy

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HardyBase {
    Green0,
    Green1,
    TreeGs,
}

#[derive(Args, Clone, Debug, Serialize, Deserialize)]
pub struct HardyArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub model: ModelArgs,
    #[arg(long, value_enum, default_value_t = HardyBase::Green1)]
    pub base: HardyBase,
    /// Radius of the inner truncation on which `W` is evaluated (Green bases).
    #[arg(long)]
    pub inner_radius: Option<usize>,
    /// Random test functions for the form-positivity spot check.
    #[arg(long, default_value_t = 200)]
    pub samples: usize,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
}

#[derive(Serialize)]
struct HardyOutcome<'a> {
    base: HardyBase,
    model: &'a ModelSpec,
    inner_radius: Option<usize>,
    /// Smallest `Q_{H−W}(ψ)/Σ m ψ²` over the random battery.
    form_min: f64,
    table: &'a HardyWeightTable,
}

impl HardyArgs {
    pub fn run(&self, exec: Execution) -> Run {
        let spec = self.model.spec(|kind, d| match kind {
            ModelKind::Lattice if d >= 3 => 24,
            ModelKind::Lattice => 60,
            _ => 10,
        })?;
        let (graph, table, inner_radius) = match self.base {
            HardyBase::TreeGs => {
                let (ModelSpec::Tree(t) | ModelSpec::TreeRadial(t)) = &spec else {
                    return Err(Failure::config("--base tree-gs needs a tree model"));
                };
                let g = spec.build()?.graph;
                let (_, table) = tree_ground_state(&g, t)?;
                (g, table, None)
            }
            HardyBase::Green0 | HardyBase::Green1 => {
                let alpha = if self.base == HardyBase::Green0 { 0.0 } else { 1.0 };
                let outer = spec.build()?;
                let r = spec
                    .radius()
                    .ok_or_else(|| Failure::config("Green bases need a model with a truncation radius"))?;
                let inner_r = self.inner_radius.unwrap_or((r / 2).max(1));
                if inner_r + 1 >= r {
                    return Err(Failure::config(format!("--inner-radius {inner_r} must be below the radius {r} minus one")));
                }
                let green = green_for_model(exec, &outer, alpha, &GreenOptions::default())?;
                let inner = spec.with_radius(inner_r).expect("radius-parametrized model").build()?;
                let phi = VertexFunction(transfer(&outer.graph, &green.values, &inner.graph)?);
                let table = supersolution_hardy(&inner.graph, None, &phi)?;
                (inner.graph, table, Some(inner_r))
            }
        };
        let form_min = hardy_form_spot_check(&graph, None, &table, self.samples, self.seed)?;
        let mut csv = Table::new(&["vertex", "label", "phi", "ground_state", "weight"]);
        for (x, name) in labels(&graph) {
            csv.push(vec![
                x.to_string(),
                name,
                sig17(table.phi[x]),
                sig17(table.ground_state[x]),
                sig17(table.weight[x]),
            ]);
        }
        Ok(Outcome {
            result: json(&HardyOutcome {
                base: self.base,
                model: &spec,
                inner_radius,
                form_min,
                table: &table,
            })?,
            table: csv,
            violation: false,
        })
    }
}

// ---------------------------------------------------------------- frac

#[derive(Args, Clone, Debug, Serialize, Deserialize)]
pub struct FracArgs {
    #[arg(long)]
    pub d: usize,
    #[arg(long)]
    pub sigma: f64,
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    #[arg(long = "box", default_value_t = 80)]
    pub box_radius: usize,
    #[arg(long, default_value_t = 20)]
    pub rw: usize,
    #[arg(long, value_enum, default_value_t = TailArg::Include)]
    pub tail: TailArg,
    /// Fit window `lo,hi` in `|x|`.
    #[arg(long, value_delimiter = ',')]
    pub window: Option<Vec<f64>>,
    /// Leave the weight table out of the report.
    #[arg(long, default_value_t = false)]
    pub no_weights: bool,
    #[arg(skip)]
    pub quad: Option<QuadSpec>,
}

impl FracArgs {
    pub fn run(&self, exec: Execution) -> Run {
        let mut spec = FractionalSpec::new(self.d, self.sigma, self.rw, self.box_radius);
        spec.tail = self.tail.into();
        if let Some(q) = self.quad {
            spec.quad = q;
        }
        let slopes = fractional_green_slopes(exec, &spec, self.alpha, pair(&self.window, "window")?)?;
        let mut csv = Table::new(&["offset", "weight", "quad_error", "dual_gap"]);
        let weights = if self.no_weights {
            None
        } else {
            let fw = fractional_weights(exec, spec.d, spec.sigma, spec.cutoff, &spec.quad)?;
            let side = fw.cutoff + 1;
            for i in 1..fw.table.len() {
                let mut rest = i;
                let mut digits = vec![0usize; fw.d];
                for k in (0..fw.d).rev() {
                    digits[k] = rest % side;
                    rest /= side;
                }
                csv.push(vec![
                    digits.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(","),
                    sig17(fw.table[i]),
                    sig17(fw.quad_error[i]),
                    sig17(fw.dual_gap[i]),
                ]);
            }
            Some(fw)
        };
        Ok(Outcome {
            result: serde_json::json!({ "slopes": json(&slopes)?, "weights": json(&weights)? }),
            table: csv,
            violation: false,
        })
    }
}

// ---------------------------------------------------------------- criticality

#[derive(Args, Clone, Debug, Serialize, Deserialize)]
pub struct CriticalityArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub model: ModelArgs,
    #[arg(long, default_value_t = 0.0)]
    pub alpha: f64,
    /// Comma-separated truncation radii.
    #[arg(long, value_delimiter = ',', default_value = "8,16,32")]
    pub radii: Vec<usize>,
    #[arg(long, default_value_t = 1e-10)]
    pub bisect_tol: f64,
    #[arg(skip)]
    pub probe: Option<CriticalityOptions>,
}

impl CriticalityArgs {
    pub fn run(&self, exec: Execution) -> Run {
        let first = *self.radii.first().ok_or_else(|| Failure::config("--radii is empty"))?;
        let spec = self.model.spec(|_, _| first)?;
        let res = criticality_constant(exec, &spec, self.alpha, &self.radii, self.bisect_tol, &self.probe.unwrap_or_default())?;
        let mut csv = Table::new(&["radius", "c_star", "inverse_green_root", "method"]);
        for (i, r) in res.radii.iter().enumerate() {
            csv.push(vec![
                r.to_string(),
                sig17(res.c_star[i]),
                sig17(res.inverse_green_root[i]),
                res.methods[i].clone(),
            ]);
        }
        Ok(Outcome {
            result: json(&res)?,
            table: csv,
            violation: false,
        })
    }
}

// ---------------------------------------------------------------- landis

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BuiltinU {
    /// `u = G_1` with the potential that makes it harmonic.
    Sharpness,
    Zero,
    /// The comparison ground state of the model.
    GroundState,
}

#[derive(Args, Clone, Debug, Serialize, Deserialize)]
pub struct LandisArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub model: ModelArgs,
    /// Comma-separated theorem ids (3.2, 3.4, 3.5, 3.6, l2, 4.1, 4.2, 4.3, 5.1, 5.2).
    #[arg(long, value_delimiter = ',', required = true)]
    pub theorem: Vec<String>,
    #[arg(long, value_enum, conflicts_with = "u_file")]
    pub u: Option<BuiltinU>,
    /// Values of `u`: a JSON array or TSV.
    #[arg(long)]
    pub u_file: Option<PathBuf>,
    /// Potential `V`, same formats as `--u-file`; the model potential when absent.
    #[arg(long)]
    pub potential_file: Option<PathBuf>,
    /// `α` for the `O(G_α)` corollary.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Sphere radii `lo,hi` for the decay profile.
    #[arg(long, value_delimiter = ',')]
    pub window: Option<Vec<usize>>,
    #[arg(skip)]
    pub options: Option<LandisOptions>,
}

#[derive(Serialize)]
struct SharpnessSummary {
    residual: f64,
    potential_at_root: f64,
    max_potential_ratio: f64,
    green_root: f64,
}

#[derive(Serialize)]
struct LandisOutcome<'a> {
    u: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    sharpness: Option<SharpnessSummary>,
    reports: &'a [LandisReport],
}

fn landis_default_radius(kind: ModelKind, d: usize) -> usize {
    match kind {
        ModelKind::Lattice => match d {
            1 => 200,
            2 => 60,
            3 => 14,
            _ => 8,
        },
        ModelKind::Tree | ModelKind::TreeRadial => 14,
        _ => 40,
    }
}

impl LandisArgs {
    pub fn run(&self, exec: Execution) -> Run {
        let theorems: Vec<TheoremId> = self
            .theorem
            .iter()
            .map(|t| t.parse::<TheoremId>().map_err(Failure::from))
            .collect::<Result<_, _>>()?;
        let mut opts = self.options.clone().unwrap_or_default();
        if let Some(a) = self.alpha {
            opts.alpha = a;
        }
        if let Some(w) = pair(&self.window, "window")? {
            opts.window = Some(w);
        }
        let spec = self.model.spec(landis_default_radius)?;
        let model = spec.build()?;
        let n = model.graph.len();
        let mut potential = match &self.potential_file {
            Some(p) => Some(Potential(read_vertex_values(p, n)?)),
            None => None,
        };
        let mut sharpness = None;
        let mut prep: Vec<TheoremId> = theorems.clone();
        let source = match (&self.u_file, self.u) {
            (Some(p), _) => format!("file:{}", p.display()),
            (None, Some(BuiltinU::Sharpness)) => "sharpness".into(),
            (None, Some(BuiltinU::Zero)) => "zero".into(),
            (None, Some(BuiltinU::GroundState)) => {
                if !prep.contains(&TheoremId::General) {
                    prep.push(TheoremId::General);
                }
                "ground-state".into()
            }
            (None, None) => return Err(Failure::config("landis needs --u or --u-file")),
        };
        let refs = LandisReferences::prepare(exec, &model, &prep, &opts)?;
        let u = match (&self.u_file, self.u) {
            (Some(p), _) => VertexFunction(read_vertex_values(p, n)?),
            (None, Some(BuiltinU::Sharpness)) => {
                let s = sharpness_instance(exec, &model, &opts.green)?;
                if potential.is_none() {
                    potential = Some(s.potential.clone());
                }
                sharpness = Some(SharpnessSummary {
                    residual: s.residual,
                    potential_at_root: s.potential_at_root,
                    max_potential_ratio: s.max_potential_ratio,
                    green_root: s.green_root,
                });
                s.u
            }
            (None, Some(BuiltinU::GroundState)) => refs
                .ground_state
                .clone()
                .ok_or_else(|| Failure::new("missing_reference", "no ground state for this model"))?,
            _ => VertexFunction::zeros(n),
        };
        let reports: Vec<LandisReport> = theorems
            .iter()
            .map(|&t| check_theorem(&model, t, &u, potential.as_ref(), &refs, &opts))
            .collect::<Result<_, _>>()?;
        let mut csv = Table::new(&["theorem", "hypothesis", "holds", "value", "detail"]);
        for r in &reports {
            for h in &r.hypotheses {
                csv.push(vec![
                    r.theorem_id.to_string(),
                    h.name.clone(),
                    h.holds.to_string(),
                    h.value.map(sig17).unwrap_or_default(),
                    h.detail.clone(),
                ]);
            }
        }
        Ok(Outcome {
            violation: reports.iter().any(|r| !r.violated().is_empty()),
            result: json(&LandisOutcome {
                u: source,
                sharpness,
                reports: &reports,
            })?,
            table: csv,
        })
    }
}
