use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::domain::PackDesign;
use crate::evaluation::{EvaluationReport, ValidationReport};

/// The three reflective loop architectures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Architecture {
    #[serde(rename = "RWL")]
    Rwl,
    #[serde(rename = "SRL")]
    Srl,
    #[serde(rename = "CRDAL")]
    Crdal,
}

impl Architecture {
    pub const ALL: [Architecture; 3] = [Architecture::Rwl, Architecture::Srl, Architecture::Crdal];

    pub fn label(self) -> &'static str {
        match self {
            Architecture::Rwl => "RWL",
            Architecture::Srl => "SRL",
            Architecture::Crdal => "CRDAL",
        }
    }

    pub fn uses_progress_analyzer(self) -> bool {
        !matches!(self, Architecture::Rwl)
    }
}

impl fmt::Display for Architecture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Architecture {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "rwl" => Ok(Architecture::Rwl),
            "srl" => Ok(Architecture::Srl),
            "crdal" => Ok(Architecture::Crdal),
            other => Err(format!("unknown architecture `{other}` (expected rwl, srl or crdal)")),
        }
    }
}

/// One design generation: the proposal, its assessment and the feedback texts.
///
/// A proposal that fails to parse still consumes a step; `design`,
/// `evaluation` and `validation` are then `None` and `parse_error` is set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step_index: usize,
    pub design: Option<PackDesign>,
    pub evaluation: Option<EvaluationReport>,
    pub validation: Option<ValidationReport>,
    pub design_feedback_text: String,
    /// Co-regulation feedback the design agent saw before proposing this step.
    pub metacognitive_feedback_text: Option<String>,
    pub agent_rationale: String,
    pub finalize_decision: Option<bool>,
    pub agent_output: String,
    pub finalize_output: Option<String>,
    pub parse_error: Option<String>,
}

impl StepRecord {
    pub fn is_valid(&self) -> bool {
        self.validation.as_ref().is_some_and(|v| v.overall_valid)
    }

    pub fn capacity_ah(&self) -> Option<f64> {
        self.evaluation.as_ref().map(|e| e.pack_capacity_ah)
    }
}

/// One full loop execution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub architecture: Architecture,
    pub run_index: usize,
    pub seed: u64,
    pub steps: Vec<StepRecord>,
    pub final_step_index: Option<usize>,
    pub succeeded: bool,
    pub wall_time_s: f64,
    pub design_backend: String,
    pub coregulation_backend: Option<String>,
    /// Agent transport or protocol failure that aborted the run.
    pub error: Option<String>,
    /// Steps whose prompt hit the context budget and dropped old raw proposals.
    pub context_guard_steps: Vec<usize>,
}

impl RunRecord {
    pub fn final_step(&self) -> Option<&StepRecord> {
        let idx = self.final_step_index?;
        self.steps.iter().find(|s| s.step_index == idx)
    }

    pub fn final_capacity_ah(&self) -> Option<f64> {
        if !self.succeeded {
            return None;
        }
        self.final_step().and_then(StepRecord::capacity_ah)
    }

    /// Design steps taken before the final design, or all steps for a failed run.
    pub fn steps_taken(&self) -> usize {
        self.final_step_index.unwrap_or(self.steps.len())
    }
}
