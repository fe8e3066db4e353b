use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn landis(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_landis"))
        .args(args)
        .env_remove("LANDIS_THREADS")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stderr)))
}

fn error_line(out: &Output) -> Value {
    let err = String::from_utf8(out.stderr.clone()).unwrap();
    assert_eq!(err.trim_end().lines().count(), 1, "stderr: {err}");
    serde_json::from_str(err.trim()).unwrap()
}

fn lambda() -> f64 {
    (3.0 - 5f64.sqrt()) / 2.0
}

#[test]
fn green_matches_one_dimensional_closed_form() {
    let out = landis(&["green", "--model", "lattice", "--d", "1", "--alpha", "1", "--core-radius", "50"]);
    assert_eq!(out.status.code(), Some(0));
    let doc = json(&out);
    assert_eq!(doc["schema_version"], "landis-cli/1");
    assert_eq!(doc["config"]["subcommand"], "green");
    assert_eq!(doc["config"]["params"]["core_radius"], 50);
    let t = &doc["result"];
    assert_eq!(t["converged"], true);
    let r = t["radius"].as_u64().unwrap() as i64;
    let values = t["values"].as_array().unwrap();
    for k in -50i64..=50 {
        let got = values[(r + k) as usize].as_f64().unwrap();
        let want = lambda().powi(k.abs() as i32) / 5f64.sqrt();
        assert!((got - want).abs() <= 1e-12, "k = {k}: {got} vs {want}");
    }
}

#[test]
fn verify_lemmas_reports_no_violations() {
    let out = landis(&["verify-lemmas", "--d-max", "4", "--radius", "20"]);
    assert_eq!(out.status.code(), Some(0));
    let r = &json(&out)["result"];
    assert_eq!(r["total_violations"], 0);
    assert!(r["max_axis_error"].as_f64().unwrap() <= 1e-12);
}

#[test]
fn sharpness_instance_exits_two_and_names_liminf() {
    let out = landis(&["landis", "--theorem", "4.1", "--model", "lattice", "--d", "3", "--u", "sharpness"]);
    assert_eq!(out.status.code(), Some(2));
    let r = &json(&out)["result"];
    let report = &r["reports"][0];
    assert_eq!(report["theorem_id"], "4.1");
    assert_eq!(report["verdict"]["status"], "hypotheses_violated");
    assert_eq!(report["verdict"]["violated"], serde_json::json!(["liminf"]));
    assert!(r["sharpness"]["max_potential_ratio"].as_f64().unwrap() <= 1.0);
}

#[test]
fn zero_function_satisfies_hypotheses() {
    let out = landis(&["landis", "--theorem", "4.1,3.6", "--model", "lattice", "--d", "1", "--radius", "60", "--u", "zero"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let reports = json(&out)["result"]["reports"].as_array().unwrap().clone();
    assert_eq!(reports.len(), 2);
    assert!(reports.iter().all(|r| r["verdict"]["status"] == "hypotheses_satisfied"));
}

#[test]
fn usage_errors_are_single_line_json() {
    let out = landis(&["green", "--model", "lattice", "--alpah", "1"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(error_line(&out)["error"]["kind"], "usage");

    let out = landis(&["green", "--model", "lattice"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(error_line(&out)["error"]["kind"], "config");

    let out = landis(&["landis", "--theorem", "9.9", "--model", "lattice", "--d", "1", "--u", "zero"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(error_line(&out)["error"]["kind"], "invalid_argument");
}

#[test]
fn thread_variable_is_validated_and_echoed() {
    let bin = env!("CARGO_BIN_EXE_landis");
    let out = Command::new(bin)
        .args(["norm", "--a2", "0.5", "--point", "2,1"])
        .env("LANDIS_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(error_line(&out)["error"]["kind"], "config");

    let out = Command::new(bin)
        .args(["norm", "--a2", "0.5", "--point", "2,1"])
        .env("LANDIS_THREADS", "2")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["config"]["threads"], 2);
}

#[test]
fn config_file_overrides_flags_and_rejects_unknown_keys() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    std::fs::write(&cfg, r#"{"alpha": 2.0, "radius": 6}"#).unwrap();
    let out = landis(&["green", "--model", "lattice", "--d", "1", "--alpha", "1", "--radius", "30", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let doc = json(&out);
    assert_eq!(doc["config"]["params"]["alpha"].as_f64(), Some(2.0));
    assert_eq!(doc["result"]["alpha"].as_f64(), Some(2.0));
    assert_eq!(doc["result"]["values"].as_array().unwrap().len(), 13);

    std::fs::write(&cfg, r#"{"alpah": 2.0}"#).unwrap();
    let out = landis(&["green", "--model", "lattice", "--d", "1", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let e = error_line(&out);
    assert_eq!(e["error"]["kind"], "config");
    assert!(e["error"]["message"].as_str().unwrap().contains("alpah"));
}

#[test]
fn reruns_are_bit_identical_and_the_echo_reproduces_the_run() {
    let args = ["green", "--model", "lattice", "--d", "2", "--alpha", "0.5", "--radius", "12"];
    let a = landis(&args);
    let b = landis(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);

    let dir = tempfile::tempdir().unwrap();
    let echo = dir.path().join("echo.json");
    std::fs::write(&echo, serde_json::to_string(&json(&a)["config"]).unwrap()).unwrap();
    let c = landis(&["green", "--model", "lattice", "--d", "1", "--config", echo.to_str().unwrap()]);
    assert_eq!(c.status.code(), Some(0));
    assert_eq!(json(&c)["result"], json(&a)["result"]);
}

#[test]
fn floats_carry_17_significant_digits() {
    let out = landis(&["norm", "--a2", "0.5", "--point", "3,-1,2"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let line = text.lines().find(|l| l.contains("\"norm_a\"")).unwrap();
    let number = line.split(':').nth(1).unwrap().trim().trim_end_matches(',');
    let mantissa = number.split('e').next().unwrap();
    assert_eq!(mantissa.chars().filter(|c| c.is_ascii_digit()).count(), 17, "{number}");
}

#[test]
fn csv_output_starts_with_the_config_echo() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("g.csv");
    let out = landis(&["green", "--model", "lattice", "--d", "1", "--radius", "5", "--out", "csv", "-o", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    let cfg: Value = serde_json::from_str(lines.next().unwrap().strip_prefix("# config: ").unwrap()).unwrap();
    assert_eq!(cfg["format"], "csv");
    assert_eq!(lines.next(), Some("vertex,label,value,extrapolated"));
    assert_eq!(lines.count(), 11);
}

#[test]
fn fit_consumes_a_green_table() {
    let dir = tempfile::tempdir().unwrap();
    let table = dir.path().join("g.json");
    let out = landis(&["green", "--model", "lattice", "--d", "2", "--alpha", "1", "--radius", "30", "-o", table.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let out = landis(&["fit", "--table", table.to_str().unwrap(), "--window", "4,12"]);
    assert_eq!(out.status.code(), Some(0));
    let r = &json(&out)["result"];
    let rays = r["rays"].as_array().unwrap();
    assert_eq!(rays.len(), 2);
    // the corrected log settles near the reference intercept
    let reference = r["reference_intercept"].as_f64().unwrap();
    for ray in rays {
        assert!((ray["intercept"].as_f64().unwrap() - reference).abs() < 0.5);
    }
}

fn write_path_graph(dir: &Path, n: usize) -> (String, String) {
    let edges = dir.join("e.tsv");
    let vertices = dir.join("v.tsv");
    let e: String = (0..n - 1).map(|i| format!("{i}\t{}\t1\n", i + 1)).collect();
    let v: String = (0..n)
        .map(|i| format!("{i}\t1\t0\t{}\n", u8::from(i == 0 || i == n - 1)))
        .collect();
    std::fs::write(&edges, e).unwrap();
    std::fs::write(&vertices, format!("# x\tm\tV\tboundary\n{v}")).unwrap();
    (edges.to_str().unwrap().into(), vertices.to_str().unwrap().into())
}

#[test]
fn file_models_are_read_from_tsv() {
    let dir = tempfile::tempdir().unwrap();
    let (e, v) = write_path_graph(dir.path(), 9);
    let out = landis(&["green", "--model", "file", "--edges", &e, "--vertices", &v, "--alpha", "0"]);
    assert_eq!(out.status.code(), Some(0));
    let t = &json(&out)["result"];
    // root is vertex 1 and the Dirichlet Green function of a path is linear
    assert_eq!(t["root"], 1);
    let values: Vec<f64> = t["values"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    for k in 1..8 {
        let want = 7.0 * (8 - k) as f64 / 56.0 / 1.0;
        assert!((values[k] - want).abs() < 1e-12, "{k}: {} vs {want}", values[k]);
    }
}

#[test]
fn tree_ground_state_hardy_weight() {
    let out = landis(&["hardy", "--model", "tree", "--degree", "3", "--radius", "8", "--base", "tree-gs", "--samples", "30"]);
    assert_eq!(out.status.code(), Some(0));
    let r = &json(&out)["result"];
    assert!(r["table"]["residual"].as_f64().unwrap() <= 1e-12);
    assert!(r["form_min"].as_f64().unwrap() >= -1e-8);
}

#[test]
fn lattice_green_zero_hardy_weight_is_nonnegative() {
    let out = landis(&["hardy", "--model", "lattice", "--d", "3", "--radius", "16", "--base", "green0", "--samples", "30"]);
    assert_eq!(out.status.code(), Some(0));
    let r = &json(&out)["result"];
    assert_eq!(r["inner_radius"], 8);
    assert!(r["table"]["min_weight"].as_f64().unwrap() >= -1e-10);
    assert!(r["form_min"].as_f64().unwrap() >= -1e-8);
}

#[test]
fn criticality_on_the_line_is_sqrt_five() {
    let out = landis(&["criticality", "--model", "lattice", "--d", "1", "--alpha", "1", "--radii", "20,40"]);
    assert_eq!(out.status.code(), Some(0));
    let r = &json(&out)["result"];
    let last = r["c_star"][1].as_f64().unwrap();
    assert!((last - 5f64.sqrt()).abs() < 1e-8);
}

#[test]
fn frac_reports_slopes_and_weights() {
    let out = landis(&["frac", "--d", "1", "--sigma", "0.5", "--alpha", "1", "--box", "60", "--rw", "12"]);
    assert_eq!(out.status.code(), Some(0));
    let r = &json(&out)["result"];
    assert_eq!(r["slopes"]["target"].as_f64(), Some(-2.0));
    let w: Vec<f64> = r["weights"]["table"].as_array().unwrap().iter().skip(1).map(|x| x.as_f64().unwrap()).collect();
    assert_eq!(w.len(), 12);
    assert!(w.windows(2).all(|p| p[1] < p[0] && p[1] > 0.0));
}
