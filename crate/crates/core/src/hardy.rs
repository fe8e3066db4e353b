//! Hardy weights `W = H(φ^{1/2}) / φ^{1/2}` from positive supersolutions, the
//! tree ground state, and oscillation diagnostics.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::builders::TreeSpec;
use crate::error::{Error, Result};
use crate::graph::{apply_schrodinger, quadratic_form, Potential, VertexFunction, VertexLabels, WeightedGraph};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HardyWeightTable {
    pub phi: Vec<f64>,
    /// `v = φ^{1/2}`
    pub ground_state: Vec<f64>,
    /// `W` at interior vertices, zero on the boundary layer.
    pub weight: Vec<f64>,
    /// Interior vertices with a boundary neighbour, where `W` feels the
    /// truncation.
    pub truncation_affected: Vec<usize>,
    /// Max over interior vertices of `|(H − W) v|` relative to the local
    /// scale `(1/m) Σ_y b (v(x) + v(y)) + (|V| + κ) v / m`.
    pub residual: f64,
    pub min_weight: f64,
    pub oscillation: OscillationReport,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OscillationReport {
    /// `sup φ(x)/φ(y)` over edges with at least one interior endpoint.
    pub oscillation_sup: f64,
    pub argmax: Option<(usize, usize)>,
    /// Number of dyadic bands `2^k ≤ φ < 2^{k+1}` met by the interior.
    pub bands: usize,
    /// Largest number of interior vertices in one band.
    pub max_band_count: usize,
}

fn check_positive_closure(g: &WeightedGraph, phi: &VertexFunction) -> Result<()> {
    if phi.len() != g.len() {
        return Err(Error::DimensionMismatch {
            expected: g.len(),
            found: phi.len(),
        });
    }
    let closure = g.interior_closure();
    for (x, (&c, &p)) in closure.iter().zip(&phi.0).enumerate() {
        if c && !(p > 0.0 && p.is_finite()) {
            return Err(Error::NotPositive { vertex: x, value: p });
        }
    }
    Ok(())
}

/// Oscillation and level-band counts of a positive function.
pub fn oscillation_and_properness(g: &WeightedGraph, phi: &VertexFunction) -> Result<OscillationReport> {
    check_positive_closure(g, phi)?;
    let p = &phi.0;
    let mut sup = 1.0f64;
    let mut argmax = None;
    g.for_each_edge(|x, y, _| {
        if g.is_boundary(x) && g.is_boundary(y) {
            return;
        }
        for (a, b) in [(x, y), (y, x)] {
            let r = p[a] / p[b];
            if r > sup {
                sup = r;
                argmax = Some((a, b));
            }
        }
    });
    let mut counts = std::collections::BTreeMap::new();
    for x in g.interior() {
        *counts.entry(p[x].log2().floor() as i64).or_insert(0usize) += 1;
    }
    Ok(OscillationReport {
        oscillation_sup: sup,
        argmax,
        bands: counts.len(),
        max_band_count: counts.values().copied().max().unwrap_or(0),
    })
}

/// `W = H(φ^{1/2}) / φ^{1/2}` at interior vertices, with `H = Δ + V/m`
/// (`V = 0` when absent).
pub fn supersolution_hardy(g: &WeightedGraph, potential: Option<&Potential>, phi: &VertexFunction) -> Result<HardyWeightTable> {
    check_positive_closure(g, phi)?;
    let zero;
    let pot = match potential {
        Some(p) => p,
        None => {
            zero = Potential::zero(g.len());
            &zero
        }
    };
    let closure = g.interior_closure();
    let v = VertexFunction(
        phi.0
            .iter()
            .zip(&closure)
            .map(|(&p, &c)| if c { p.sqrt() } else { p.max(0.0).sqrt() })
            .collect(),
    );
    let hv = apply_schrodinger(g, pot, &v)?;
    let mut weight = vec![0.0; g.len()];
    let mut affected = Vec::new();
    let mut residual = 0.0f64;
    let mut min_weight = f64::INFINITY;
    for x in g.interior() {
        let w = hv.0[x] / v.0[x];
        weight[x] = w;
        min_weight = min_weight.min(w);
        let m = g.measure()[x];
        let mut scale = (pot.0[x].abs() + g.exterior_mass(x)) * v.0[x] / m;
        let mut near_boundary = false;
        g.for_each_neighbor(x, |y, b| {
            scale += b * (v.0[x] + v.0[y]) / m;
            near_boundary |= g.is_boundary(y);
        });
        if near_boundary {
            affected.push(x);
        }
        let r = (hv.0[x] - w * v.0[x]).abs();
        residual = residual.max(if scale > 0.0 { r / scale } else { r });
    }
    let oscillation = oscillation_and_properness(g, phi)?;
    Ok(HardyWeightTable {
        phi: phi.0.clone(),
        ground_state: v.0,
        weight,
        truncation_affected: affected,
        residual,
        min_weight,
        oscillation,
    })
}

/// Depth `|x|` on tree-like labels.
fn depth(labels: &VertexLabels, x: usize) -> Result<usize> {
    match labels {
        VertexLabels::Tree { depth, .. } => Ok(depth[x] as usize),
        VertexLabels::Radial { .. } => Ok(x),
        _ => Err(Error::InvalidArgument("tree ground state needs a tree model".into())),
    }
}

/// `v(x) = |x|^{1/2} d^{−|x|/2}` for `|x| ≥ 1` and `v(o) = 1`.
pub fn tree_profile(degree: usize, k: usize) -> f64 {
    if k == 0 {
        1.0
    } else {
        (k as f64).sqrt() * (degree as f64).powf(-0.5 * k as f64)
    }
}

/// The tree ground state as a vertex function on a tree truncation, and its
/// Hardy weight `W = Δv / v` (so `φ = v²`).
pub fn tree_ground_state(g: &WeightedGraph, spec: &TreeSpec) -> Result<(VertexFunction, HardyWeightTable)> {
    spec.validate()?;
    let v = VertexFunction(
        (0..g.len())
            .map(|x| depth(g.labels(), x).map(|k| tree_profile(spec.degree, k)))
            .collect::<Result<_>>()?,
    );
    let phi = v.map(|a| a * a);
    let table = supersolution_hardy(g, None, &phi)?;
    Ok((v, table))
}

/// Smallest `Q_{H−W}(ψ) / Σ m ψ²` over `samples` random functions supported
/// in the interior (a finite stand-in for form positivity).
pub fn hardy_form_spot_check(g: &WeightedGraph, potential: Option<&Potential>, table: &HardyWeightTable, samples: usize, seed: u64) -> Result<f64> {
    let interior: Vec<usize> = g.interior().collect();
    let shifted = Potential(
        (0..g.len())
            .map(|x| potential.map_or(0.0, |p| p.0[x]) - g.measure()[x] * table.weight[x])
            .collect(),
    );
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = f64::INFINITY;
    for s in 0..samples {
        let mut psi = vec![0.0; g.len()];
        match s % 3 {
            // dense noise
            0 => interior.iter().for_each(|&x| psi[x] = rng.gen_range(-1.0..1.0)),
            // positive bump proportional to the ground state
            1 => interior
                .iter()
                .for_each(|&x| psi[x] = table.ground_state[x] * rng.gen_range(0.5..1.5)),
            // a few spikes
            _ => {
                for _ in 0..5 {
                    psi[interior[rng.gen_range(0..interior.len())]] = rng.gen_range(-1.0..1.0);
                }
            }
        }
        let norm: f64 = interior.iter().map(|&x| g.measure()[x] * psi[x] * psi[x]).sum();
        if norm == 0.0 {
            continue;
        }
        let q = quadratic_form(g, &shifted, &VertexFunction(psi))?;
        worst = worst.min(q / norm);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builders::{build_lattice, build_regular_tree, LatticeSpec};
    use crate::resolvent::green_dirichlet;

    #[test]
    fn constant_gives_zero_weight() {
        let g = build_lattice(&LatticeSpec::new(2, 4)).unwrap();
        let t = supersolution_hardy(&g, None, &VertexFunction::constant(g.len(), 2.0)).unwrap();
        assert!(g.interior().all(|x| t.weight[x] == 0.0));
        assert_eq!(t.oscillation.oscillation_sup, 1.0);
    }

    #[test]
    fn one_dimensional_green_weight_is_constant() {
        let g = build_lattice(&LatticeSpec::new(1, 80)).unwrap();
        let o = g.labels().index_of(&[0]).unwrap();
        let mut phi = green_dirichlet(&g, o, 1.0).unwrap().function();
        // replace the truncated values by the closed form so the boundary layer is positive
        let lam = (3.0 - 5f64.sqrt()) / 2.0;
        for x in 0..g.len() {
            let k = g.labels().point(x).unwrap()[0].abs();
            phi.0[x] = lam.powi(k as i32) / 5f64.sqrt();
        }
        let t = supersolution_hardy(&g, None, &phi).unwrap();
        let expect = 2.0 - lam.sqrt() - 1.0 / lam.sqrt();
        for x in g.interior().filter(|&x| x != o) {
            assert!((t.weight[x] - expect).abs() < 1e-12);
        }
        assert!(t.residual < 1e-15);
    }

    #[test]
    fn tree_ground_state_identity() {
        let spec = TreeSpec::new(3, 8);
        let g = build_regular_tree(&spec).unwrap();
        let (v, t) = tree_ground_state(&g, &spec).unwrap();
        assert!(t.residual < 1e-12);
        let VertexLabels::Tree { depth, .. } = g.labels() else { panic!() };
        for (x, &k) in depth.iter().enumerate().skip(1) {
            let k = k as f64;
            assert!((v.0[x].powi(2) * 3f64.powf(k) / k - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_neighbour_is_rejected() {
        let g = build_lattice(&LatticeSpec::new(1, 3)).unwrap();
        let mut phi = VertexFunction::constant(g.len(), 1.0);
        phi.0[0] = 0.0;
        assert!(matches!(oscillation_and_properness(&g, &phi), Err(Error::NotPositive { vertex: 0, .. })));
    }
}
