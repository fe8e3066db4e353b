//! `landis`: command-line front end for landis-core.
//!
//! Exit codes: 0 on success, 2 when a report flags a hypothesis violation,
//! 1 with a one-line JSON error on stderr otherwise.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use commands::{
    CriticalityArgs, FitArgs, FracArgs, GreenArgs, HardyArgs, LandisArgs, NormArgs, Outcome, VerifyLemmasArgs,
};
use config::{apply_overrides, init_thread_pool, read_config, threads_from_env, Failure};
use landis_core::Execution;
use output::{emit, to_csv_string, to_json_string, SCHEMA_VERSION};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Json,
    Csv,
}

#[derive(Parser, Debug)]
#[command(name = "landis", version, about = "Green functions, Hardy weights and Landis-type hypothesis checks on weighted graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON file whose values override the flags.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    out: Format,
    /// Output file (stdout when absent).
    #[arg(long, short = 'o', global = true)]
    output: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Green function G_α at a root.
    Green(GreenArgs),
    /// The lattice norm |x|_a at a point, or a lemma sweep.
    Norm(NormArgs),
    /// Fit a lattice GreenTable against the asymptotic resolvent.
    Fit(FitArgs),
    /// Hardy weight from a positive supersolution.
    Hardy(HardyArgs),
    /// Fractional weights and Green slope fits.
    Frac(FracArgs),
    /// Check the hypotheses of a Landis-type theorem.
    Landis(LandisArgs),
    /// Criticality constant probe by bisection.
    Criticality(CriticalityArgs),
    /// Exhaustive check of the lattice norm inequalities.
    VerifyLemmas(VerifyLemmasArgs),
}

/// The reproducibility echo written with every output.
#[derive(Serialize)]
struct RunConfig<'a> {
    schema_version: &'static str,
    tool_version: &'static str,
    subcommand: &'a str,
    params: Value,
    format: Format,
    #[serde(skip_serializing_if = "Option::is_none")]
    output: Option<&'a PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    threads: Option<usize>,
}

#[derive(Serialize)]
struct Document<'a> {
    schema_version: &'static str,
    config: &'a RunConfig<'a>,
    result: &'a Value,
}

fn prepare<T>(args: T, config: Option<&PathBuf>, name: &str) -> Result<(T, Value), Failure>
where
    T: Serialize + serde::de::DeserializeOwned,
{
    let args = match config {
        Some(path) => apply_overrides(args, read_config(path, name)?)?,
        None => args,
    };
    let params = serde_json::to_value(&args).map_err(|e| Failure::config(e.to_string()))?;
    Ok((args, params))
}

fn dispatch(cli: Cli) -> Result<bool, Failure> {
    let threads = threads_from_env()?;
    init_thread_pool(threads)?;
    let exec = Execution::preferred();
    let cfg = cli.config.as_ref();
    macro_rules! run {
        ($args:expr, $name:literal) => {{
            let (args, params) = prepare($args, cfg, $name)?;
            (args.run(exec)?, params, $name)
        }};
    }
    let (outcome, params, name): (Outcome, Value, &str) = match cli.command {
        Command::Green(a) => run!(a, "green"),
        Command::Norm(a) => run!(a, "norm"),
        Command::Fit(a) => run!(a, "fit"),
        Command::Hardy(a) => run!(a, "hardy"),
        Command::Frac(a) => run!(a, "frac"),
        Command::Landis(a) => run!(a, "landis"),
        Command::Criticality(a) => run!(a, "criticality"),
        Command::VerifyLemmas(a) => run!(a, "verify-lemmas"),
    };
    let run_config = RunConfig {
        schema_version: SCHEMA_VERSION,
        tool_version: env!("CARGO_PKG_VERSION"),
        subcommand: name,
        params,
        format: cli.out,
        output: cli.output.as_ref(),
        threads,
    };
    let text = match cli.out {
        Format::Json => to_json_string(&Document {
            schema_version: SCHEMA_VERSION,
            config: &run_config,
            result: &outcome.result,
        })
        .map_err(|e| Failure::new("json", e.to_string()))?,
        Format::Csv => to_csv_string(&run_config, &outcome.table).map_err(|e| Failure::new("csv", e.to_string()))?,
    };
    emit(&text, cli.output.as_deref())?;
    Ok(outcome.violation)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand) {
                let _ = e.print();
                return if e.kind() == ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand {
                    ExitCode::from(1)
                } else {
                    ExitCode::SUCCESS
                };
            }
            let msg = e.render().to_string();
            let first = msg.lines().find(|l| !l.trim().is_empty()).unwrap_or("invalid arguments");
            let first = first.trim_start_matches("error: ").trim();
            eprintln!("{}", Failure::new("usage", first).line());
            return ExitCode::from(1);
        }
    };
    match dispatch(cli) {
        Ok(false) => ExitCode::SUCCESS,
        Ok(true) => ExitCode::from(2),
        Err(f) => {
            eprintln!("{}", f.line());
            ExitCode::from(1)
        }
    }
}
