use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{AgentBackend, AgentCall, AgentError};
use crate::engine::RunRecord;
use crate::error::{Error, Result};

/// Which agent's calls a transcript holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TranscriptRole {
    Design,
    CoRegulation,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum Entry {
    Text(String),
    Object { text: String },
}

/// Reads a JSONL transcript: one response per line, either a JSON string or
/// an object with a `text` field. Blank lines are skipped.
pub fn read_transcript(path: &Path) -> Result<Vec<String>> {
    let raw = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    raw.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str::<Entry>(l)
                .map(|e| match e {
                    Entry::Text(t) | Entry::Object { text: t } => t,
                })
                .map_err(|e| Error::json(format!("{} line {}", path.display(), i + 1), e))
        })
        .collect()
}

pub fn write_transcript(path: &Path, responses: &[String]) -> Result<()> {
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    for r in responses {
        let line = serde_json::to_string(r).map_err(|e| Error::json("transcript entry", e))?;
        writeln!(f, "{line}").map_err(|e| Error::io(path, e))?;
    }
    Ok(())
}

/// Extracts the raw responses one agent gave during a recorded run, in call order.
pub fn transcript_from_run(run: &RunRecord, role: TranscriptRole) -> Vec<String> {
    let mut out = Vec::new();
    for step in &run.steps {
        match role {
            TranscriptRole::Design => {
                out.push(step.agent_output.clone());
                out.extend(step.finalize_output.clone());
            }
            TranscriptRole::CoRegulation => out.extend(step.metacognitive_feedback_text.clone()),
        }
    }
    out
}

/// Answers calls from a recorded transcript, in order, regardless of content.
#[derive(Debug, Clone)]
pub struct ReplayAgent {
    responses: Vec<String>,
    next: usize,
}

impl ReplayAgent {
    pub fn new(responses: Vec<String>) -> Self {
        Self { responses, next: 0 }
    }

    pub fn from_file(path: &Path) -> std::result::Result<Self, AgentError> {
        read_transcript(path)
            .map(Self::new)
            .map_err(|e| AgentError::Config(e.to_string()))
    }

    pub fn remaining(&self) -> usize {
        self.responses.len() - self.next
    }
}

impl AgentBackend for ReplayAgent {
    fn name(&self) -> String {
        "replay".into()
    }

    fn needs_prompt(&self) -> bool {
        false
    }

    fn respond(&mut self, _call: &AgentCall<'_>) -> std::result::Result<String, AgentError> {
        let r = self
            .responses
            .get(self.next)
            .cloned()
            .ok_or(AgentError::TranscriptExhausted { calls: self.next })?;
        self.next += 1;
        Ok(r)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn transcript_round_trip_and_object_form() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.jsonl");
        let lines = vec!["a\n```json\n{}\n```".to_string(), "b".to_string()];
        write_transcript(&path, &lines).unwrap();
        assert_eq!(read_transcript(&path).unwrap(), lines);

        fs::write(&path, "{\"text\": \"x\"}\n\n\"y\"\n").unwrap();
        assert_eq!(read_transcript(&path).unwrap(), vec!["x", "y"]);

        fs::write(&path, "not json\n").unwrap();
        assert!(read_transcript(&path).is_err());
    }
}
