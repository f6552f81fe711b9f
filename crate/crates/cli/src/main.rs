//! `bdf`: command-line front end for the experiment runner.
//!
//! Exit codes: 0 all checks pass, 1 a check failed, 2 configuration error,
//! 3 numerical guard.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use bdf_core::runner::checks::bound_trace_csv;
use bdf_core::runner::{self, fixtures, CheckName, ExperimentConfig, RunOutcome};
use bdf_core::{Error, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

#[derive(Parser, Debug)]
#[command(
    name = "bdf",
    version,
    about = "Frames from commuting operator pairs on truncated bidisc Hardy space"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Experiment config (JSON); a directory of configs for `suite`.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Built-in fixture to use instead of `--config`.
    #[arg(long, value_name = "NAME", conflicts_with = "config")]
    fixture: Option<String>,
    /// Overrides every seed in the config.
    #[arg(long, value_name = "N")]
    seed: Option<u64>,
    /// Output directory for report files.
    #[arg(long, value_name = "PREFIX")]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build the submodule and export its orthonormal basis.
    BuildModule(Common),
    /// Export the quotient and its Jordan block; check the interior identity.
    Jordan(Common),
    /// Frame bounds, classification and kernel invariance.
    FrameCheck(Common),
    /// Random similarity transports: bracketing, kernels, uniqueness.
    Similarity(Common),
    /// Recover the quotient model from the iterate system.
    Recover(Common),
    /// Adjoint orbit decay with summability and lower-bound chain.
    Decay(Common),
    /// Forward orbit norms; evidence only, no verdict.
    ProbeConjecture(Common),
    /// Change of frame vector by V = I + T1 T2 / 2.
    EquivVector(Common),
    /// Run the checks listed in the config.
    Run(Common),
    /// Run every config in a directory.
    Suite(Common),
    /// List built-in fixtures, optionally filtered by kind or name prefix.
    ListFixtures {
        filter: Option<String>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
}

fn apply_seed(cfg: &mut ExperimentConfig, seed: Option<u64>) {
    if let Some(s) = seed {
        cfg.seed = s;
        if let Some(t) = cfg.transport.as_mut() {
            t.seed = None;
        }
    }
}

fn load(common: &Common) -> Result<ExperimentConfig> {
    let mut cfg = match (&common.config, &common.fixture) {
        (Some(path), _) => ExperimentConfig::load(path)?,
        (None, Some(name)) => {
            fixtures::find(name).ok_or_else(|| Error::Config(format!("unknown fixture `{name}`")))?.config
        }
        (None, None) => return Err(Error::Config("one of --config or --fixture is required".into())),
    };
    apply_seed(&mut cfg, common.seed);
    Ok(cfg)
}

fn print_json<T: serde::Serialize>(v: &T) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(v)?);
    Ok(())
}

/// Runs `checks` (or the config's own list) and prints the result.
fn run_checks(common: &Common, checks: Option<&[CheckName]>, csv_from: Option<CheckName>) -> Result<i32> {
    let mut cfg = load(common)?;
    if let Some(list) = checks {
        cfg.checks = list.iter().map(|c| c.as_str().to_string()).collect();
    }
    if common.format == Format::Csv && csv_from.is_none() {
        return Err(Error::Config("csv output is not available for this command".into()));
    }
    let outcome = runner::run(&cfg)?;
    let out_dir = common.out.clone().or_else(|| cfg.output.as_ref().map(PathBuf::from));
    if let Some(dir) = &out_dir {
        runner::write_outputs(dir, &outcome)?;
    }
    emit(&outcome, common.format, csv_from)?;
    Ok(outcome.exit_code())
}

fn emit(outcome: &RunOutcome, format: Format, csv_from: Option<CheckName>) -> Result<()> {
    match format {
        Format::Json => print_json(&json!({ "summary": outcome.summary, "reports": outcome.reports })),
        Format::Csv => {
            let name = csv_from.expect("checked by caller");
            let report = outcome.report(name);
            let csv = report.and_then(|r| r.csv.clone()).or_else(|| {
                // the parseval report carries its trace in `data`
                report
                    .and_then(|r| serde_json::from_value(r.data.clone()).ok())
                    .map(|fr| bound_trace_csv(&fr))
            });
            match csv {
                Some(text) => print!("{text}"),
                None => print_json(&json!({ "summary": outcome.summary }))?,
            }
            Ok(())
        }
    }
}

fn suite(common: &Common) -> Result<i32> {
    let dir = common.config.as_deref().ok_or_else(|| Error::Config("suite needs --config DIR".into()))?;
    if !dir.is_dir() {
        return Err(Error::Config(format!("{} is not a directory", dir.display())));
    }
    let seed = common.seed;
    let summary = runner::run_suite(dir, common.out.as_deref().map(Path::new), |cfg| apply_seed(cfg, seed))?;
    match common.format {
        Format::Json => print_json(&summary)?,
        Format::Csv => {
            println!("config,name,exit_code");
            for e in &summary.entries {
                println!("{},{},{}", e.config, e.name.as_deref().unwrap_or(""), e.exit_code);
            }
        }
    }
    Ok(summary.exit_code)
}

fn list(filter: Option<&str>, format: Format) -> Result<i32> {
    let items = fixtures::filtered(filter);
    match format {
        Format::Json => {
            let rows: Vec<_> = items
                .iter()
                .map(|f| json!({ "name": f.name, "kind": f.kind, "description": f.description }))
                .collect();
            print_json(&rows)?;
        }
        Format::Csv => {
            println!("name,kind,description");
            for f in &items {
                println!("{},{},\"{}\"", f.name, f.kind, f.description);
            }
        }
    }
    Ok(0)
}

fn dispatch(cli: Cli) -> Result<i32> {
    use CheckName as C;
    match cli.command {
        Command::BuildModule(c) => run_checks(&c, Some(&[C::Submodule]), None),
        Command::Jordan(c) => run_checks(&c, Some(&[C::Quotient, C::JordanIdentity]), None),
        Command::FrameCheck(c) => {
            run_checks(&c, Some(&[C::Parseval, C::KernelInvariance]), Some(C::Parseval))
        }
        Command::Similarity(c) => run_checks(&c, Some(&[C::Similarity]), None),
        Command::Recover(c) => run_checks(&c, Some(&[C::Recover]), None),
        Command::Decay(c) => run_checks(&c, Some(&[C::AdjointDecay]), Some(C::AdjointDecay)),
        Command::ProbeConjecture(c) => run_checks(&c, Some(&[C::Conjecture]), Some(C::Conjecture)),
        Command::EquivVector(c) => run_checks(&c, Some(&[C::EquivVector]), None),
        Command::Run(c) => run_checks(&c, None, None),
        Command::Suite(c) => suite(&c),
        Command::ListFixtures { filter, format } => list(filter.as_deref(), format),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let code = match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    ExitCode::from(code as u8)
}
