//! Run configuration: strict JSON, validated before any compute.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use simloc_core::model::MAX_SITES;

use crate::error::CliError;

/// Named numerical tolerances; unknown names are rejected.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// `compare` fails when some `|sigma_dev|` exceeds this.
    pub sigma_threshold: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            sigma_threshold: 3.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub n: usize,
    #[serde(alias = "w")]
    pub w_values: Vec<f64>,
    #[serde(alias = "q")]
    pub q_values: Vec<f64>,
    pub realizations: u64,
    #[serde(default = "default_window_factor")]
    pub window_factor: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
}

fn default_window_factor() -> f64 {
    simloc_core::ensemble::DEFAULT_WINDOW_FACTOR
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| {
            CliError::Config(format!("line {}, column {}: {e}", e.line(), e.column()))
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|e| match e {
            CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |field: &str, why: String| Err(CliError::Config(format!("field `{field}`: {why}")));
        if self.n == 0 || !self.n.is_multiple_of(2) || self.n > MAX_SITES {
            return bad("n", format!("must be even and in 2..={MAX_SITES}, got {}", self.n));
        }
        if self.w_values.is_empty() {
            return bad("w_values", "must not be empty".into());
        }
        if let Some(w) = self.w_values.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
            return bad("w_values", format!("entries must be positive and finite, got {w}"));
        }
        if self.q_values.is_empty() {
            return bad("q_values", "must not be empty".into());
        }
        if let Some(q) = self.q_values.iter().find(|q| !(q.is_finite() && **q > 1.0)) {
            return bad("q_values", format!("entries must be finite and > 1, got {q}"));
        }
        if self.realizations == 0 {
            return bad("realizations", "must be positive".into());
        }
        if !(self.window_factor > 0.0 && self.window_factor <= 0.5) {
            return bad("window_factor", format!("must lie in (0, 0.5], got {}", self.window_factor));
        }
        let t = &self.tolerances;
        if !(t.sigma_threshold.is_finite() && t.sigma_threshold > 0.0) {
            return bad("tolerances.sigma_threshold", format!("must be positive, got {}", t.sigma_threshold));
        }
        Ok(())
    }
}
