use std::collections::BTreeSet;

use proptest::collection::vec;
use proptest::prelude::*;

use landis_core::builders::{build_lattice, LatticeSpec, ModelSpec};
use landis_core::exec::{dot, sum_range};
use landis_core::graph::{
    apply_laplacian_with, apply_schrodinger, edge_ratio_sup, ground_state_transform_check, inner_product, pointwise_max,
    quadratic_form, subharmonic_sample,
};
use landis_core::io::{read_graph, write_graph};
use landis_core::landis::decay_profile;
use landis_core::lattice_norms::{m_a, norm_a};
use landis_core::resolvent::{green_dirichlet, green_dirichlet_with, green_for_model, GreenOptions};
use landis_core::special::heat_kernel;
use landis_core::{Execution, Potential, VertexFunction, VertexLabels, WeightedGraph};

/// A random connected interior (a weighted path plus chords) with a boundary
/// layer hanging off it, and random data on it.
#[derive(Clone, Debug)]
struct Instance {
    g: WeightedGraph,
    interior: usize,
    potential: Vec<f64>,
    positive: Vec<f64>,
    test: Vec<f64>,
}

#[allow(clippy::type_complexity)]
fn build(
    (k, path, chords, attach, measure, potential, positive, test): (
        usize,
        Vec<f64>,
        Vec<(usize, usize, f64)>,
        Vec<(usize, f64)>,
        Vec<f64>,
        Vec<f64>,
        Vec<f64>,
        Vec<f64>,
    ),
) -> Instance {
    let n = k + attach.len();
    let mut seen = BTreeSet::new();
    let mut edges = Vec::new();
    for (i, w) in path.into_iter().enumerate() {
        seen.insert((i, i + 1));
        edges.push((i, i + 1, w));
    }
    for (a, b, w) in chords {
        let key = (a.min(b), a.max(b));
        if a != b && seen.insert(key) {
            edges.push((key.0, key.1, w));
        }
    }
    for (j, (x, w)) in attach.into_iter().enumerate() {
        edges.push((x, k + j, w));
    }
    let boundary = (0..n).map(|x| x >= k).collect();
    let g = WeightedGraph::from_edges(n, edges, measure, boundary, VertexLabels::None).expect("valid instance");
    let mut t = test;
    t.resize(n, 0.0);
    Instance {
        g,
        interior: k,
        potential,
        positive,
        test: t,
    }
}

fn instance() -> impl Strategy<Value = Instance> {
    (3usize..10, 1usize..5)
        .prop_flat_map(|(k, nb)| {
            let n = k + nb;
            (
                Just(k),
                vec(0.1f64..3.0, k - 1),
                vec((0..k, 0..k, 0.1f64..3.0), 0..6),
                vec((0..k, 0.1f64..3.0), nb),
                vec(0.2f64..4.0, n),
                vec(-1.0f64..2.0, n),
                vec(0.1f64..5.0, n),
                vec(-2.0f64..2.0, k),
            )
        })
        .prop_map(build)
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / (a.abs().max(b.abs()) + 1e-300)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn green_formula(inst in instance()) {
        let v = Potential(inst.potential.clone());
        let phi = VertexFunction(inst.test.clone());
        let q = quadratic_form(&inst.g, &v, &phi).unwrap();
        let hphi = apply_schrodinger(&inst.g, &v, &phi).unwrap();
        let pairing = inner_product(&inst.g, &hphi, &phi).unwrap();
        prop_assert!((q - pairing).abs() <= 1e-12 * (1.0 + q.abs()), "{q} vs {pairing}");
    }

    #[test]
    fn ground_state_transform(inst in instance()) {
        let v = Potential(inst.potential.clone());
        let sides = ground_state_transform_check(&inst.g, &v, &VertexFunction(inst.positive.clone()), &VertexFunction(inst.test.clone())).unwrap();
        prop_assert!(sides.relative_gap() <= 1e-11, "{sides:?}");
    }

    #[test]
    fn maximum_of_subharmonic_functions_is_subharmonic(inst in instance(), s1 in vec(0.0f64..1.0, 10), s2 in vec(0.0f64..1.0, 10)) {
        let n = inst.g.len();
        let v = Potential(inst.potential.iter().map(|p| p.abs()).collect());
        let src = |s: &[f64]| VertexFunction((0..n).map(|x| if x < inst.interior { s[x] } else { 0.0 }).collect());
        let u = subharmonic_sample(&inst.g, &v, &src(&s1)).unwrap();
        let w = subharmonic_sample(&inst.g, &v, &src(&s2)).unwrap();
        let h = apply_schrodinger(&inst.g, &v, &pointwise_max(&u, &w).unwrap()).unwrap();
        for x in 0..inst.interior {
            prop_assert!(h.0[x] <= 1e-10, "H(u ∨ w)({x}) = {}", h.0[x]);
        }
    }

    #[test]
    fn green_function_is_positive_and_symmetric(inst in instance(), alpha in 0.0f64..2.0, pick in any::<prop::sample::Index>()) {
        let g = &inst.g;
        let o = 0;
        let x = pick.index(inst.interior);
        let go = green_dirichlet(g, o, alpha).unwrap();
        let gx = green_dirichlet(g, x, alpha).unwrap();
        prop_assert!(go.positive);
        prop_assert!(go.residual <= 1e-10);
        let lhs = go.values[x] / g.measure()[o];
        let rhs = gx.values[o] / g.measure()[x];
        prop_assert!(rel(lhs, rhs) <= 1e-10, "{lhs} vs {rhs}");
    }

    #[test]
    fn edge_ratio_of_a_function_with_itself_is_one(inst in instance()) {
        let u = VertexFunction(inst.positive.clone());
        let r = edge_ratio_sup(&inst.g, &u, &inst.g, &u).unwrap();
        prop_assert!((r.constant - 1.0).abs() <= 1e-15);
    }

    #[test]
    fn tsv_round_trip_preserves_the_operator(inst in instance()) {
        let v = Potential(inst.potential.clone());
        let (mut e, mut vx) = (Vec::new(), Vec::new());
        write_graph(&inst.g, &v, &mut e, &mut vx).unwrap();
        let (g2, v2) = read_graph(&e[..], &vx[..]).unwrap();
        prop_assert_eq!(g2.len(), inst.g.len());
        prop_assert_eq!(g2.boundary_mask(), inst.g.boundary_mask());
        let f = VertexFunction(inst.positive.clone());
        let a = apply_schrodinger(&inst.g, &v, &f).unwrap();
        let b = apply_schrodinger(&g2, &v2, &f).unwrap();
        for (p, q) in a.0.iter().zip(&b.0) {
            prop_assert!(rel(*p, *q) <= 1e-15 || (p - q).abs() <= 1e-15);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn lattice_norm_comparison_bounds(x in vec(-30i64..=30, 1..=5), a2 in 0.01f64..1.99) {
        prop_assume!(x.iter().any(|&c| c != 0));
        let d = x.len();
        let e = norm_a(&x, a2.sqrt()).unwrap();
        let euclid = x.iter().map(|&c| (c * c) as f64).sum::<f64>().sqrt();
        let l1 = x.iter().map(|&c| c.abs() as f64).sum::<f64>();
        let tol = 1e-12;
        prop_assert!(euclid <= e.norm_a * (1.0 + tol), "|x| = {euclid} > |x|_a = {}", e.norm_a);
        prop_assert!(e.norm_a <= l1 * (1.0 + tol), "|x|_a = {} > ‖x‖_1 = {l1}", e.norm_a);
        prop_assert!(m_a(d, a2.sqrt()) * e.norm_a <= (2.0 * a2 * d as f64).sqrt() * euclid * (1.0 + tol));
        let lhs: f64 = x.iter().map(|&c| (c as f64 * e.r).hypot(1.0)).sum::<f64>() / d as f64;
        prop_assert!((lhs - (1.0 + a2)).abs() <= 1e-13 * (1.0 + a2));
    }

    #[test]
    fn lattice_norm_is_symmetric(x in vec(-20i64..=20, 2..=4), a2 in 0.05f64..1.9, flip in any::<prop::sample::Index>(), rot in 0usize..4) {
        prop_assume!(x.iter().any(|&c| c != 0));
        let base = norm_a(&x, a2.sqrt()).unwrap().norm_a;
        let mut y = x.clone();
        let i = flip.index(y.len());
        y[i] = -y[i];
        let len = y.len();
        y.rotate_left(rot % len);
        let image = norm_a(&y, a2.sqrt()).unwrap().norm_a;
        prop_assert!(rel(base, image) <= 1e-13);
    }

    #[test]
    fn axis_points_have_norm_equal_to_length(n in -200i64..=200, d in 1usize..=5, j in 0usize..5, a2 in 0.01f64..1.99) {
        prop_assume!(n != 0);
        let mut x = vec![0i64; d];
        x[j % d] = n;
        let e = norm_a(&x, a2.sqrt()).unwrap();
        prop_assert!((e.norm_a - n.abs() as f64).abs() <= 1e-12 * n.abs() as f64);
    }

    #[test]
    fn heat_kernel_conserves_mass(t in 0.0f64..8.0) {
        let total: f64 = (-80i64..=80).map(|z| heat_kernel(t, &[z])).sum();
        prop_assert!((total - 1.0).abs() <= 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn sequential_and_parallel_paths_agree_bitwise(d in 1usize..=3, seed in vec(-1.0f64..1.0, 64), alpha in 0.1f64..2.0) {
        let radius = [4000, 60, 14][d - 1];
        let g = build_lattice(&LatticeSpec::new(d, radius)).unwrap();
        let f = VertexFunction((0..g.len()).map(|i| seed[i % seed.len()] * (1.0 + (i % 7) as f64)).collect());
        let a = apply_laplacian_with(Execution::Sequential, &g, &f).unwrap();
        let b = apply_laplacian_with(Execution::Parallel, &g, &f).unwrap();
        prop_assert!(a.0.iter().zip(&b.0).all(|(p, q)| p.to_bits() == q.to_bits()));
        let s = dot(Execution::Sequential, &f.0, &a.0);
        let p = dot(Execution::Parallel, &f.0, &a.0);
        prop_assert_eq!(s.to_bits(), p.to_bits());
        let s = sum_range(Execution::Sequential, f.len(), |i| f.0[i].powi(3));
        let p = sum_range(Execution::Parallel, f.len(), |i| f.0[i].powi(3));
        prop_assert_eq!(s.to_bits(), p.to_bits());
        let o = g.labels().index_of(&vec![0; d]).unwrap();
        let opts = GreenOptions::default();
        let gs = green_dirichlet_with(Execution::Sequential, &g, o, alpha, &opts).unwrap();
        let gp = green_dirichlet_with(Execution::Parallel, &g, o, alpha, &opts).unwrap();
        prop_assert!(gs.values.iter().zip(&gp.values).all(|(p, q)| p.to_bits() == q.to_bits()));
    }

    #[test]
    fn decay_profile_of_a_multiple_of_the_reference_is_constant(d in 1usize..=2, c in -5.0f64..5.0, alpha in 0.2f64..2.0) {
        prop_assume!(c.abs() > 1e-3);
        let model = ModelSpec::Lattice(LatticeSpec::new(d, [40, 16][d - 1])).build().unwrap();
        let green = green_for_model(Execution::preferred(), &model, alpha, &GreenOptions::default()).unwrap();
        let u = green.function().map(|v| c * v);
        let p = decay_profile(&model, &u, &green, None).unwrap();
        prop_assert!(!p.values.is_empty());
        for (_, v) in &p.values {
            prop_assert!(rel(*v, c.abs()) <= 1e-14);
        }
    }
}
