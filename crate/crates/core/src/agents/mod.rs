//! Pluggable agent backends.
//!
//! Every backend answers [`AgentCall`]s with raw text. The loop engine parses
//! that text, so an HTTP-backed LLM and a scripted policy are interchangeable.

mod coregulator;
mod heuristic;
mod llm;
mod oracle;
mod perturb;
mod replay;

pub use coregulator::HeuristicCoRegulator;
pub use heuristic::{pack_layout, HeuristicAgent, HeuristicMode, LayoutParams};
pub use llm::{
    AttemptLog, ChatRequest, ChatResponse, LlmBackend, LlmClient, RequestGate, TransportConfig, Usage,
    ENV_API_KEY, ENV_ENDPOINT, ENV_MODEL,
};
pub use oracle::{oracle_best_design, OracleDesign};
pub use perturb::PerturbAgent;
pub use replay::{read_transcript, transcript_from_run, write_transcript, ReplayAgent, TranscriptRole};

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::domain::ProblemSpec;
use crate::engine::{Architecture, StepRecord, TrajectorySummary};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    System,
    User,
    Assistant,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: Role,
    pub content: String,
}

impl ChatMessage {
    pub fn system(content: impl Into<String>) -> Self {
        Self {
            role: Role::System,
            content: content.into(),
        }
    }

    pub fn user(content: impl Into<String>) -> Self {
        Self {
            role: Role::User,
            content: content.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CallKind {
    /// Design agent proposes the next design.
    Propose,
    /// Design agent decides whether a valid design is final.
    Finalize,
    /// Co-regulation agent writes metacognitive feedback.
    CoRegulate,
}

/// Everything a backend may look at when answering one call.
///
/// LLM backends read `messages`; scripted backends read the structured fields.
/// For [`CallKind::Finalize`] the last entry of `history` is the valid design
/// under consideration.
#[derive(Debug, Clone, Copy)]
pub struct AgentCall<'a> {
    pub kind: CallKind,
    pub architecture: Architecture,
    pub step_index: usize,
    pub problem: &'a ProblemSpec,
    pub history: &'a [StepRecord],
    pub summary: Option<&'a TrajectorySummary>,
    pub metacognitive_feedback: Option<&'a str>,
    pub messages: &'a [ChatMessage],
}

#[derive(Debug, thiserror::Error)]
pub enum AgentError {
    #[error("transport failed after {attempts} attempt(s): {message}")]
    Transport { attempts: u32, message: String },

    #[error("authentication rejected (HTTP {status}): {message}")]
    Auth { status: u16, message: String },

    #[error("unexpected response: {0}")]
    Protocol(String),

    #[error("replay transcript exhausted after {calls} call(s)")]
    TranscriptExhausted { calls: usize },

    #[error("backend configuration: {0}")]
    Config(String),
}

pub trait AgentBackend: Send {
    fn name(&self) -> String;

    /// Whether this backend reads the rendered prompt messages.
    ///
    /// Scripted backends return `false` so the engine can skip rendering.
    fn needs_prompt(&self) -> bool {
        true
    }

    fn respond(&mut self, call: &AgentCall<'_>) -> Result<String, AgentError>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum AgentBackendKind {
    #[serde(alias = "llm")]
    LlmHttp,
    #[default]
    Heuristic,
    Replay,
    Perturb,
}

impl std::str::FromStr for AgentBackendKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "llm" | "llm_http" => Ok(Self::LlmHttp),
            "heuristic" => Ok(Self::Heuristic),
            "replay" => Ok(Self::Replay),
            "perturb" => Ok(Self::Perturb),
            other => Err(format!("unknown backend `{other}`")),
        }
    }
}

/// Serializable description of a backend for one agent role.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct BackendSpec {
    pub kind: AgentBackendKind,
    /// Replay transcript (JSONL). For batches, `{arch}` and `{run}` are substituted.
    pub transcript: Option<PathBuf>,
    /// Heuristic policy; defaults to the one matching the loop architecture.
    pub mode: Option<HeuristicMode>,
    pub llm: Option<TransportConfig>,
}

impl BackendSpec {
    pub fn of(kind: AgentBackendKind) -> Self {
        Self {
            kind,
            ..Self::default()
        }
    }

    fn transcript_path(&self, architecture: Architecture, run_index: usize) -> Result<PathBuf, AgentError> {
        let path = self
            .transcript
            .as_ref()
            .ok_or_else(|| AgentError::Config("replay backend requires a transcript file".into()))?;
        let text = path.to_string_lossy();
        Ok(PathBuf::from(
            text.replace("{arch}", &architecture.label().to_ascii_lowercase())
                .replace("{run}", &run_index.to_string()),
        ))
    }

    fn llm_backend(&self, seed: u64) -> Result<Box<dyn AgentBackend>, AgentError> {
        let transport = match &self.llm {
            Some(t) => t.clone().with_env_fallback(),
            None => TransportConfig::from_env()?,
        };
        Ok(Box::new(LlmBackend::new(LlmClient::new(transport)?, seed)))
    }

    /// Builds the design-agent backend for one run.
    pub fn build_design(
        &self,
        architecture: Architecture,
        seed: u64,
        run_index: usize,
    ) -> Result<Box<dyn AgentBackend>, AgentError> {
        match self.kind {
            AgentBackendKind::Heuristic => {
                let mode = self.mode.unwrap_or_else(|| HeuristicMode::for_architecture(architecture));
                Ok(Box::new(HeuristicAgent::new(mode, seed)))
            }
            AgentBackendKind::Perturb => Ok(Box::new(PerturbAgent::new(seed))),
            AgentBackendKind::Replay => Ok(Box::new(ReplayAgent::from_file(
                &self.transcript_path(architecture, run_index)?,
            )?)),
            AgentBackendKind::LlmHttp => self.llm_backend(seed),
        }
    }

    /// Builds the co-regulation backend for one CRDAL run.
    pub fn build_coregulation(
        &self,
        architecture: Architecture,
        seed: u64,
        run_index: usize,
    ) -> Result<Box<dyn AgentBackend>, AgentError> {
        match self.kind {
            AgentBackendKind::Heuristic => Ok(Box::new(HeuristicCoRegulator::new())),
            AgentBackendKind::Replay => Ok(Box::new(ReplayAgent::from_file(
                &self.transcript_path(architecture, run_index)?,
            )?)),
            AgentBackendKind::LlmHttp => self.llm_backend(seed),
            AgentBackendKind::Perturb => Err(AgentError::Config(
                "perturb backend cannot act as a co-regulation agent".into(),
            )),
        }
    }
}
