//! The single JSON configuration document accepted by the CLI.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::domain::ProblemSpec;
use crate::error::{Error, Result};
use crate::experiment::BatchConfig;

/// Top-level config file. Every section is optional and unknown keys are rejected.
///
/// ```json
/// {
///   "problem": { "min_capacity_ah": 60 },
///   "batch": { "base_seed": 1000, "runs_per_system": 5, "out_dir": "out" }
/// }
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct CliConfigFile {
    pub problem: ProblemSpec,
    pub batch: BatchConfig,
}

impl CliConfigFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text).map_err(|e| match e {
            Error::Json { source, .. } => Error::json(path.display().to_string(), source),
            other => other,
        })
    }

    pub fn parse(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::json("config", e))?;
        cfg.problem.check()?;
        Ok(cfg)
    }
}
