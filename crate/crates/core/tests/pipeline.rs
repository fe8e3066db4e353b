use landis_core::builders::ModelSpec;
use landis_core::hardy::{hardy_form_spot_check, supersolution_hardy};
use landis_core::landis::{check_theorems, sharpness_instance, LandisOptions, TheoremId, Verdict};
use landis_core::resolvent::{green_exhaustion, green_for_model, green_zero_limit, transfer, ExhaustionOptions, GreenOptions, ZeroLimit};
use landis_core::{Execution, VertexFunction};

const EXEC: Execution = Execution::Parallel;

fn spec(json: &str) -> ModelSpec {
    serde_json::from_str(json).unwrap()
}

#[test]
fn json_model_spec_to_landis_report() {
    let model = spec(r#"{"kind":"lattice","d":2,"radius":40}"#).build().unwrap();
    let s = sharpness_instance(EXEC, &model, &GreenOptions::default()).unwrap();
    assert!(s.residual < 1e-10);
    let reports = check_theorems(EXEC, &model, &[TheoremId::Lattice, TheoremId::GreenAlpha], &s.u, Some(&s.potential), &LandisOptions::default()).unwrap();
    assert_eq!(reports[0].violated(), ["liminf"]);
    assert!(!reports[0].red_flag);
    let zero = VertexFunction::zeros(model.graph.len());
    let reports = check_theorems(EXEC, &model, &[TheoremId::Lattice], &zero, None, &LandisOptions::default()).unwrap();
    assert_eq!(reports[0].verdict, Verdict::HypothesesSatisfied);
    let text = serde_json::to_string(&reports[0]).unwrap();
    assert!(text.contains("\"theorem_id\":\"4.1\""));
}

#[test]
fn exhaustion_feeds_a_hardy_weight() {
    let opts = ExhaustionOptions {
        start_radius: Some(16),
        max_radius: 36,
        ..Default::default()
    };
    let g0 = green_exhaustion(EXEC, &spec(r#"{"kind":"lattice","d":3,"radius":16}"#), 0.0, 11, 1e-12, &opts).unwrap();
    assert_eq!(g0.history.len(), 3);
    assert!(g0.history.windows(2).all(|w| w[1].1 > w[0].1));
    let big = g0.model.clone().unwrap().build().unwrap();
    // closure ‖x‖_∞ ≤ 6 lies in the Euclidean core ball of radius 11
    let small = spec(r#"{"kind":"lattice","d":3,"radius":5}"#).build().unwrap();
    let phi = VertexFunction(transfer(&big.graph, g0.extrapolated.as_ref().unwrap(), &small.graph).unwrap());
    let table = supersolution_hardy(&small.graph, None, &phi).unwrap();
    assert!(table.residual < 1e-12);
    assert!(table.min_weight > 0.0, "{}", table.min_weight);
    assert!(hardy_form_spot_check(&small.graph, None, &table, 60, 3).unwrap() >= -1e-8);
}

#[test]
fn zero_limit_agrees_with_the_direct_solve() {
    let model = spec(r#"{"kind":"lattice","d":3,"radius":12}"#).build().unwrap();
    let alphas: Vec<f64> = (1..=8).map(|k| 0.5f64.powi(2 * k)).collect();
    match green_zero_limit(EXEC, &model, &alphas, 4, 1e-3, &GreenOptions::default()).unwrap() {
        ZeroLimit::Converged { cross_check, table, .. } => {
            let direct = green_for_model(EXEC, &model, 0.0, &GreenOptions::default()).unwrap();
            assert!(cross_check < 1e-3);
            assert!(table.at_root() < direct.at_root());
        }
        other => panic!("expected convergence, got {other:?}"),
    }
}

#[test]
fn tree_sharpness_raises_the_red_flag() {
    let model = spec(r#"{"kind":"tree","degree":3,"radius":20}"#).build().unwrap();
    let s = sharpness_instance(EXEC, &model, &GreenOptions::default()).unwrap();
    let r = check_theorems(EXEC, &model, &[TheoremId::Tree], &s.u, Some(&s.potential), &LandisOptions::default())
        .unwrap()
        .remove(0);
    assert!(r.violated().is_empty(), "{:?}", r.hypotheses);
    assert!(r.red_flag);
}
