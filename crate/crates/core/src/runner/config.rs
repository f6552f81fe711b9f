//! Experiment configuration: one JSON file per experiment.
//!
//! ```json
//! {
//!   "name": "beurling-zw",
//!   "order": [4, 4],
//!   "inner": {"kind": "monomial", "a": 1, "b": 1},
//!   "horizon": [4, 4],
//!   "transport": {"seed": 7, "condition_cap": 1000.0, "trials": 20},
//!   "seed": 0,
//!   "checks": ["parseval", "similarity"]
//! }
//! ```
//!
//! `inner` and `generators` are mutually exclusive; with neither, the
//! submodule is `{0}` and the quotient is the whole space.

use std::path::Path;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frame::max_dim;
use crate::hardy::{BidiscPoly, DegreePair};
use crate::inner::InnerSpec;

pub const DEFAULT_CONDITION_CAP: f64 = 1e3;
pub const DEFAULT_TRIALS: usize = 20;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransportConfig {
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default = "default_cap")]
    pub condition_cap: f64,
    #[serde(default = "default_trials")]
    pub trials: usize,
}

fn default_cap() -> f64 {
    DEFAULT_CONDITION_CAP
}

fn default_trials() -> usize {
    DEFAULT_TRIALS
}

impl Default for TransportConfig {
    fn default() -> Self {
        TransportConfig { seed: None, condition_cap: DEFAULT_CONDITION_CAP, trials: DEFAULT_TRIALS }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_name")]
    pub name: String,
    pub order: DegreePair,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inner: Option<InnerSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generators: Option<Vec<BidiscPoly>>,
    /// Defaults to `order`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<DegreePair>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transport: Option<TransportConfig>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub checks: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
}

fn default_name() -> String {
    "experiment".to_string()
}

impl ExperimentConfig {
    pub fn new(name: &str, order: DegreePair) -> Self {
        ExperimentConfig {
            name: name.to_string(),
            order,
            inner: None,
            generators: None,
            horizon: None,
            transport: None,
            seed: 0,
            checks: Vec::new(),
            output: None,
        }
    }

    pub fn with_inner(mut self, spec: InnerSpec) -> Self {
        self.inner = Some(spec);
        self
    }

    pub fn with_generators(mut self, gens: Vec<BidiscPoly>) -> Self {
        self.generators = Some(gens);
        self
    }

    pub fn with_checks(mut self, checks: &[&str]) -> Self {
        self.checks = checks.iter().map(|c| c.to_string()).collect();
        self
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            serde_json::from_str(text).map_err(|e| Error::Config(format!("cannot parse config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn horizon(&self) -> DegreePair {
        self.horizon.unwrap_or(self.order)
    }

    pub fn transport(&self) -> TransportConfig {
        self.transport.clone().unwrap_or_default()
    }

    pub fn transport_seed(&self) -> u64 {
        self.transport.as_ref().and_then(|t| t.seed).unwrap_or(self.seed)
    }

    /// Rejects malformed configs (exit 2) and oversized boxes (exit 3).
    pub fn validate(&self) -> Result<()> {
        if self.inner.is_some() && self.generators.is_some() {
            return Err(Error::Config("`inner` and `generators` are mutually exclusive".into()));
        }
        if let Some(spec) = &self.inner {
            spec.validate().map_err(|e| Error::Config(e.to_string()))?;
            let deg = spec.degree();
            if !deg.fits_in(&self.order) {
                return Err(Error::Config(format!("inner degree {deg} exceeds order {}", self.order)));
            }
        }
        for check in &self.checks {
            if super::CheckName::parse(check).is_none() {
                return Err(Error::Config(format!("unknown check `{check}`")));
            }
        }
        if let Some(t) = &self.transport {
            if !t.condition_cap.is_finite() || t.condition_cap <= 1.0 {
                return Err(Error::Config(format!(
                    "condition_cap must be a finite number above 1, got {}",
                    t.condition_cap
                )));
            }
        }
        let limit = max_dim();
        let dim = self.order.box_size();
        if dim >= limit {
            return Err(Error::Guard(format!(
                "order {} gives dimension {dim}, at or above the limit {limit}",
                self.order
            )));
        }
        if !self.horizon().fits_in(&self.order) {
            warn!(
                "horizon {} exceeds order {}: model-exact checks may not apply",
                self.horizon(),
                self.order
            );
        }
        Ok(())
    }
}
