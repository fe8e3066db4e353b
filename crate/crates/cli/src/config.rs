//! `--config` merging, the thread-count variable, and the error line.

use std::fmt;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};

pub const THREADS_VAR: &str = "LANDIS_THREADS";

/// A failure reported as one JSON line on stderr with exit code 1.
#[derive(Debug)]
pub struct Failure {
    pub kind: &'static str,
    pub message: String,
}

impl Failure {
    pub fn new(kind: &'static str, message: impl Into<String>) -> Self {
        Failure {
            kind,
            message: message.into(),
        }
    }

    pub fn config(message: impl Into<String>) -> Self {
        Failure::new("config", message)
    }

    pub fn line(&self) -> String {
        serde_json::json!({ "error": { "kind": self.kind, "message": self.message } }).to_string()
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.kind, self.message)
    }
}

impl From<landis_core::Error> for Failure {
    fn from(e: landis_core::Error) -> Self {
        use landis_core::Error as E;
        let kind = match &e {
            E::DimensionMismatch { .. } => "dimension_mismatch",
            E::InvalidGraph(_) => "invalid_graph",
            E::InvalidArgument(_) => "invalid_argument",
            E::BoundarySupport { .. } => "boundary_support",
            E::NotPositive { .. } => "not_positive",
            E::NotPositiveOperator { .. } => "not_positive_operator",
            E::TooLarge { .. } => "too_large",
            E::Singular(_) => "singular",
            E::NoConvergence(_) => "no_convergence",
            E::Bracket(_) => "bracket",
            E::Quadrature { .. } => "quadrature",
            E::InsufficientData(_) => "insufficient_data",
            E::MissingReference(_) => "missing_reference",
            E::Inconsistent(_) => "inconsistent",
            E::Parse { .. } => "parse",
            E::Io(_) => "io",
            E::Json(_) => "json",
        };
        Failure::new(kind, e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::new("io", e.to_string())
    }
}

/// Reads a config file. Either a flat object of parameters or a RunConfig
/// echo (`{"subcommand": ..., "params": {...}}`) from an earlier run.
pub fn read_config(path: &Path, subcommand: &str) -> Result<Map<String, Value>, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::config(format!("{}: {e}", path.display())))?;
    let value: Value = serde_json::from_str(&text).map_err(|e| Failure::config(format!("{}: {e}", path.display())))?;
    let Value::Object(mut obj) = value else {
        return Err(Failure::config("config file must hold a JSON object"));
    };
    if let Some(s) = obj.get("subcommand") {
        if s.as_str() != Some(subcommand) {
            return Err(Failure::config(format!("config is for subcommand {s}, not {subcommand:?}")));
        }
    }
    if let Some(params) = obj.remove("params") {
        let Value::Object(p) = params else {
            return Err(Failure::config("config \"params\" must be an object"));
        };
        return Ok(p);
    }
    obj.remove("subcommand");
    obj.remove("schema_version");
    Ok(obj)
}

fn merge(base: &mut Value, over: Value) {
    match (base, over) {
        (Value::Object(b), Value::Object(o)) => {
            for (k, v) in o {
                match b.get_mut(&k) {
                    Some(slot) if slot.is_object() && v.is_object() => merge(slot, v),
                    _ => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (b, o) => *b = o,
    }
}

/// Applies config values on top of parsed flags. Keys that are not
/// parameters of the subcommand are rejected.
pub fn apply_overrides<T: Serialize + DeserializeOwned>(args: T, overrides: Map<String, Value>) -> Result<T, Failure> {
    let mut value = serde_json::to_value(&args).map_err(|e| Failure::config(e.to_string()))?;
    let known = value.as_object().expect("argument structs serialize to objects");
    let mut unknown: Vec<&String> = overrides.keys().filter(|k| !known.contains_key(*k)).collect();
    if !unknown.is_empty() {
        unknown.sort();
        return Err(Failure::config(format!("unknown config keys {unknown:?}")));
    }
    merge(&mut value, Value::Object(overrides));
    serde_json::from_value(value).map_err(|e| Failure::config(format!("config: {e}")))
}

/// Thread count from the environment, if set.
pub fn threads_from_env() -> Result<Option<usize>, Failure> {
    match std::env::var(THREADS_VAR) {
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(e) => Err(Failure::config(format!("{THREADS_VAR}: {e}"))),
        Ok(s) => match s.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(Failure::config(format!("{THREADS_VAR} must be a positive integer, got {s:?}"))),
        },
    }
}

pub fn init_thread_pool(threads: Option<usize>) -> Result<(), Failure> {
    if let Some(n) = threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::new("threads", e.to_string()))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde::Deserialize;

    #[derive(Serialize, Deserialize, Debug, PartialEq)]
    struct Args {
        alpha: f64,
        radius: Option<usize>,
        opts: Option<Inner>,
    }

    #[derive(Serialize, Deserialize, Debug, PartialEq, Default)]
    struct Inner {
        a: f64,
        b: f64,
    }

    fn obj(v: Value) -> Map<String, Value> {
        v.as_object().unwrap().clone()
    }

    #[test]
    fn config_wins_over_flags() {
        let args = Args { alpha: 1.0, radius: None, opts: Some(Inner { a: 1.0, b: 2.0 }) };
        let out = apply_overrides(args, obj(serde_json::json!({"radius": 7, "opts": {"b": 5.0}}))).unwrap();
        assert_eq!(out, Args { alpha: 1.0, radius: Some(7), opts: Some(Inner { a: 1.0, b: 5.0 }) });
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let args = Args { alpha: 1.0, radius: None, opts: None };
        let e = apply_overrides(args, obj(serde_json::json!({"radios": 7}))).unwrap_err();
        assert_eq!(e.kind, "config");
        assert!(e.message.contains("radios"));
    }

    #[test]
    fn error_line_is_single_line_json() {
        let f = Failure::config("bad\nvalue");
        let line = f.line();
        assert!(!line.contains('\n'));
        let v: Value = serde_json::from_str(&line).unwrap();
        assert_eq!(v["error"]["kind"], "config");
    }
}
