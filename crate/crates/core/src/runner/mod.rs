//! Configuration-driven experiment runner.
//!
//! A run builds the submodule, quotient and iterate system that its checks
//! need, runs the checks in dependency order and returns one report per
//! check plus a summary. Reports carry no timestamps or timings, so identical
//! configs give byte-identical files; wall-clock data goes to `metadata.json`.

pub mod checks;
pub mod config;
pub mod export;
pub mod fixtures;

use std::fs;
use std::path::{Path, PathBuf};

use log::info;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::batch;
use crate::error::{Error, Result};
use crate::frame::{frame_bounds, iterate, FrameReport, IterateSystem};
use crate::hardy::{DegreePair, TruncatedSpace};
use crate::model::triple_from_quotient;
use crate::submodule::{beurling_from_spec, generated_submodule, quotient, QuotientModel, SubmoduleModel};

pub use config::ExperimentConfig;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CheckName {
    Submodule,
    Quotient,
    Unimodular,
    Codimension,
    Mandrekar,
    JordanIdentity,
    Parseval,
    KernelInvariance,
    KernelDoublyCommutes,
    Similarity,
    Recover,
    Riesz,
    AdjointDecay,
    Conjecture,
    EquivVector,
}

impl CheckName {
    pub const ALL: [CheckName; 15] = [
        CheckName::Submodule,
        CheckName::Quotient,
        CheckName::Unimodular,
        CheckName::Codimension,
        CheckName::Mandrekar,
        CheckName::JordanIdentity,
        CheckName::Parseval,
        CheckName::KernelInvariance,
        CheckName::KernelDoublyCommutes,
        CheckName::Similarity,
        CheckName::Recover,
        CheckName::Riesz,
        CheckName::AdjointDecay,
        CheckName::Conjecture,
        CheckName::EquivVector,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CheckName::Submodule => "submodule",
            CheckName::Quotient => "quotient",
            CheckName::Unimodular => "unimodular",
            CheckName::Codimension => "codimension",
            CheckName::Mandrekar => "mandrekar",
            CheckName::JordanIdentity => "jordan_identity",
            CheckName::Parseval => "parseval",
            CheckName::KernelInvariance => "kernel_invariance",
            CheckName::KernelDoublyCommutes => "kernel_doubly_commutes",
            CheckName::Similarity => "similarity",
            CheckName::Recover => "recover",
            CheckName::Riesz => "riesz",
            CheckName::AdjointDecay => "adjoint_decay",
            CheckName::Conjecture => "conjecture",
            CheckName::EquivVector => "equiv_vector",
        }
    }

    pub fn parse(s: &str) -> Option<CheckName> {
        Self::ALL.into_iter().find(|c| c.as_str() == s)
    }

    fn stage(self) -> Stage {
        match self {
            CheckName::Unimodular | CheckName::Codimension | CheckName::Riesz => Stage::None,
            CheckName::Submodule | CheckName::Mandrekar => Stage::Submodule,
            CheckName::Quotient | CheckName::JordanIdentity => Stage::Quotient,
            _ => Stage::System,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Stage {
    None,
    Submodule,
    Quotient,
    System,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckStatus {
    Pass,
    Fail,
    /// Recorded without a verdict: evidence-only output, or the check does
    /// not apply to this model.
    Info,
}

/// A check that could not produce a report of its own.
#[derive(Debug)]
pub enum Fault {
    /// Aborts the run with the error's exit code.
    Fatal(Error),
    Outcome(CheckStatus, String),
}

impl From<Error> for Fault {
    fn from(e: Error) -> Self {
        match e {
            Error::Guard(_) | Error::Config(_) | Error::Io(_) | Error::Json(_) => Fault::Fatal(e),
            Error::Precondition(_) | Error::Inconclusive(_) | Error::TrivialQuotient => {
                Fault::Outcome(CheckStatus::Info, e.to_string())
            }
            other => Fault::Outcome(CheckStatus::Fail, other.to_string()),
        }
    }
}

pub type CheckResult = std::result::Result<CheckReport, Fault>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub check: String,
    pub status: CheckStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
    pub data: Value,
    /// Plottable mirror written next to the JSON report.
    #[serde(skip)]
    pub csv: Option<String>,
}

impl CheckReport {
    pub fn new(check: CheckName, status: CheckStatus, data: Value) -> Self {
        CheckReport { check: check.as_str().to_string(), status, message: None, data, csv: None }
    }

    pub fn with_message(mut self, m: impl Into<String>) -> Self {
        self.message = Some(m.into());
        self
    }

    pub fn with_csv(mut self, csv: String) -> Self {
        self.csv = Some(csv);
        self
    }
}

pub(crate) fn pass_if(ok: bool) -> CheckStatus {
    if ok {
        CheckStatus::Pass
    } else {
        CheckStatus::Fail
    }
}

type Staged<T> = Option<std::result::Result<T, (CheckStatus, String)>>;

/// Models shared by the checks of one run.
pub struct Experiment {
    pub config: ExperimentConfig,
    pub space: TruncatedSpace,
    sub: Staged<SubmoduleModel>,
    quo: Staged<QuotientModel>,
    sys: Staged<(IterateSystem, FrameReport)>,
}

fn stage_result<T>(r: Result<T>) -> Result<std::result::Result<T, (CheckStatus, String)>> {
    match r {
        Ok(v) => Ok(Ok(v)),
        Err(e) => match Fault::from(e) {
            Fault::Fatal(e) => Err(e),
            Fault::Outcome(s, m) => Ok(Err((s, m))),
        },
    }
}

fn staged<T>(s: &Staged<T>) -> std::result::Result<&T, Fault> {
    match s.as_ref().expect("stage prepared before use") {
        Ok(v) => Ok(v),
        Err((status, msg)) => Err(Fault::Outcome(*status, msg.clone())),
    }
}

impl Experiment {
    fn prepare(config: &ExperimentConfig, needs: Stage) -> Result<Self> {
        let space = TruncatedSpace::new(config.order);
        let mut exp = Experiment { config: config.clone(), space, sub: None, quo: None, sys: None };
        if needs >= Stage::Submodule {
            exp.sub = Some(stage_result(exp.build_submodule())?);
        }
        if needs >= Stage::Quotient {
            exp.quo = Some(match &exp.sub {
                Some(Ok(s)) => Ok(quotient(s)),
                Some(Err(e)) => Err(e.clone()),
                None => unreachable!(),
            });
        }
        if needs >= Stage::System {
            exp.sys = Some(match &exp.quo {
                Some(Ok(q)) => stage_result(triple_from_quotient(q).and_then(|t| {
                    let sys = iterate(&t, config.horizon())?;
                    let report = frame_bounds(&sys);
                    Ok((sys, report))
                }))?,
                Some(Err(e)) => Err(e.clone()),
                None => unreachable!(),
            });
        }
        Ok(exp)
    }

    fn build_submodule(&self) -> Result<SubmoduleModel> {
        match (&self.config.inner, &self.config.generators) {
            (Some(spec), _) => beurling_from_spec(spec, self.space),
            (None, Some(gens)) => generated_submodule(gens, self.space),
            (None, None) => Ok(SubmoduleModel::zero(self.space)),
        }
    }

    pub fn submodule(&self) -> std::result::Result<&SubmoduleModel, Fault> {
        staged(&self.sub)
    }

    pub fn quotient(&self) -> std::result::Result<&QuotientModel, Fault> {
        staged(&self.quo)
    }

    pub fn system(&self) -> std::result::Result<&(IterateSystem, FrameReport), Fault> {
        staged(&self.sys)
    }

    /// Deterministic generator for one independent stream of a run.
    pub fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        r.set_stream(stream);
        r
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckSummary {
    pub check: String,
    pub status: CheckStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub name: String,
    pub seed: u64,
    pub order: DegreePair,
    pub horizon: DegreePair,
    pub passed: bool,
    pub checks: Vec<CheckSummary>,
}

#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub config: ExperimentConfig,
    pub summary: Summary,
    pub reports: Vec<CheckReport>,
}

impl RunOutcome {
    /// 0 when no check failed, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.summary.passed {
            0
        } else {
            1
        }
    }

    pub fn report(&self, check: CheckName) -> Option<&CheckReport> {
        self.reports.iter().find(|r| r.check == check.as_str())
    }
}

/// Runs the configured checks in dependency order (duplicates run once).
pub fn run(config: &ExperimentConfig) -> Result<RunOutcome> {
    config.validate()?;
    let mut names = Vec::new();
    for c in &config.checks {
        names.push(CheckName::parse(c).ok_or_else(|| Error::Config(format!("unknown check `{c}`")))?);
    }
    names.sort();
    names.dedup();
    let needs = names.iter().map(|c| c.stage()).max().unwrap_or(Stage::None);
    let exp = Experiment::prepare(config, needs)?;

    let mut reports = Vec::with_capacity(names.len());
    for name in names {
        info!("{}: running {}", config.name, name.as_str());
        let report = match checks::run_check(&exp, name) {
            Ok(r) => r,
            Err(Fault::Fatal(e)) => return Err(e),
            Err(Fault::Outcome(status, msg)) => CheckReport::new(name, status, Value::Null).with_message(msg),
        };
        reports.push(report);
    }
    let summary = Summary {
        name: config.name.clone(),
        seed: config.seed,
        order: config.order,
        horizon: config.horizon(),
        passed: reports.iter().all(|r| r.status != CheckStatus::Fail),
        checks: reports
            .iter()
            .map(|r| CheckSummary { check: r.check.clone(), status: r.status, message: r.message.clone() })
            .collect(),
    };
    Ok(RunOutcome { config: config.clone(), summary, reports })
}

fn pretty<T: Serialize>(v: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    Ok(s)
}

#[derive(Serialize)]
struct Metadata {
    unix_time: u64,
    version: &'static str,
    parallel: bool,
}

/// Writes `config.json`, one `<check>.json` (and `.csv` mirror where
/// available) per check, `summary.json` and `metadata.json` into `dir`.
pub fn write_outputs(dir: &Path, outcome: &RunOutcome) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("config.json"), pretty(&outcome.config)?)?;
    for r in &outcome.reports {
        fs::write(dir.join(format!("{}.json", r.check)), pretty(r)?)?;
        if let Some(csv) = &r.csv {
            fs::write(dir.join(format!("{}.csv", r.check)), csv)?;
        }
    }
    fs::write(dir.join("summary.json"), pretty(&outcome.summary)?)?;
    let unix_time =
        std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let meta = Metadata { unix_time, version: env!("CARGO_PKG_VERSION"), parallel: batch::is_parallel() };
    fs::write(dir.join("metadata.json"), pretty(&meta)?)?;
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteEntry {
    pub config: String,
    pub name: Option<String>,
    pub exit_code: i32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteSummary {
    pub entries: Vec<SuiteEntry>,
    /// Largest exit code over the entries.
    pub exit_code: i32,
}

pub fn suite_configs(dir: &Path) -> Result<Vec<PathBuf>> {
    let rd =
        fs::read_dir(dir).map_err(|e| Error::Config(format!("cannot read suite {}: {e}", dir.display())))?;
    let mut paths: Vec<PathBuf> = rd
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    Ok(paths)
}

/// Runs every `*.json` config in `dir` concurrently; outputs for `a.json`
/// go to `out/a/`. `adjust` is applied to each loaded config.
pub fn run_suite<F>(dir: &Path, out: Option<&Path>, adjust: F) -> Result<SuiteSummary>
where
    F: Fn(&mut ExperimentConfig) + Sync + Send,
{
    let paths = suite_configs(dir)?;
    let entries = batch::map(&paths, |path| {
        let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        let attempt = || -> Result<(String, i32)> {
            let mut cfg = ExperimentConfig::load(path)?;
            adjust(&mut cfg);
            let outcome = run(&cfg)?;
            if let Some(out) = out {
                write_outputs(&out.join(&stem), &outcome)?;
            }
            Ok((cfg.name, outcome.exit_code()))
        };
        match attempt() {
            Ok((name, code)) => SuiteEntry { config: stem, name: Some(name), exit_code: code, error: None },
            Err(e) => {
                SuiteEntry { config: stem, name: None, exit_code: e.exit_code(), error: Some(e.to_string()) }
            }
        }
    });
    let exit_code = entries.iter().map(|e| e.exit_code).max().unwrap_or(0);
    let summary = SuiteSummary { entries, exit_code };
    if let Some(out) = out {
        fs::create_dir_all(out)?;
        fs::write(out.join("suite.json"), pretty(&summary)?)?;
    }
    Ok(summary)
}
