//! The design-proposal document: a JSON object inside a single fenced code block.
//!
//! ```text
//! {"cell_locations": [[x, y, z], ...], "cell_connections": [n_series, n_parallel],
//!  "cell_spacing": mm, "rationale": "...", "declare_final": false}
//! ```

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{PackDesign, Point3};
use crate::error::{Error, Result};

/// A parsed design proposal.
#[derive(Debug, Clone, PartialEq)]
pub struct Proposal {
    pub design: PackDesign,
    pub rationale: String,
    pub declare_final: bool,
}

/// Wire shape of the proposal document, used for rendering.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProposalDocument {
    pub cell_locations: Vec<[f64; 3]>,
    pub cell_connections: [u32; 2],
    pub cell_spacing: f64,
    pub rationale: String,
    pub declare_final: bool,
}

/// Answer to the improve-or-terminate question asked after a valid design.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FinalizeDecision {
    pub declare_final: bool,
    pub rationale: String,
}

fn malformed(msg: impl Into<String>) -> Error {
    Error::MalformedProposal(msg.into())
}

/// Returns the body of the only fenced block in `text`, without its info string.
fn single_fenced_block(text: &str) -> Result<&str> {
    let fences = text.matches("```").count();
    match fences {
        0 => return Err(malformed("no fenced code block found")),
        2 => {}
        n if n % 2 == 1 => return Err(malformed("unterminated fenced code block")),
        n => {
            return Err(malformed(format!(
                "expected exactly one fenced code block, found {}",
                n / 2
            )))
        }
    }
    let start = text.find("```").unwrap() + 3;
    let end = start + text[start..].find("```").unwrap();
    let body = &text[start..end];
    // Drop an info string such as `json` on the opening fence line.
    match body.find('\n') {
        Some(nl) if !body[..nl].contains(['{', '[']) => Ok(&body[nl + 1..]),
        _ => Ok(body),
    }
}

fn number(v: &Value, what: &str) -> Result<f64> {
    v.as_f64()
        .filter(|x| x.is_finite())
        .ok_or_else(|| malformed(format!("{what} must be a finite number, got {v}")))
}

fn count(v: &Value, what: &str) -> Result<u32> {
    let n = v
        .as_u64()
        .or_else(|| v.as_f64().filter(|f| f.fract() == 0.0 && *f >= 0.0).map(|f| f as u64))
        .ok_or_else(|| malformed(format!("{what} must be a non-negative integer, got {v}")))?;
    if n == 0 {
        return Err(malformed(format!("{what} must be at least 1")));
    }
    u32::try_from(n).map_err(|_| malformed(format!("{what} is too large")))
}

fn object_in_block(agent_output: &str) -> Result<serde_json::Map<String, Value>> {
    let body = single_fenced_block(agent_output)?;
    match serde_json::from_str::<Value>(body.trim()) {
        Ok(Value::Object(map)) => Ok(map),
        Ok(_) => Err(malformed("fenced block does not hold a JSON object")),
        Err(e) => Err(malformed(format!("fenced block is not valid JSON: {e}"))),
    }
}

/// Parses the single fenced proposal document in an agent's output.
pub fn parse_design_proposal(agent_output: &str) -> Result<Proposal> {
    let obj = object_in_block(agent_output)?;
    let field = |key: &str| obj.get(key).ok_or_else(|| malformed(format!("missing key `{key}`")));

    let locations = field("cell_locations")?
        .as_array()
        .ok_or_else(|| malformed("cell_locations must be an array of [x, y, z] triplets"))?;
    if locations.is_empty() {
        return Err(malformed("cell_locations is empty"));
    }
    let cell_locations = locations
        .iter()
        .enumerate()
        .map(|(i, triplet)| match triplet.as_array().map(Vec::as_slice) {
            Some([x, y, z]) => Ok(Point3::new(
                number(x, "cell coordinate")?,
                number(y, "cell coordinate")?,
                number(z, "cell coordinate")?,
            )),
            _ => Err(malformed(format!(
                "cell_locations[{i}] must be an [x, y, z] triplet, got {triplet}"
            ))),
        })
        .collect::<Result<Vec<_>>>()?;

    let (n_series, n_parallel) = match field("cell_connections")?.as_array().map(Vec::as_slice) {
        Some([s, p]) => (count(s, "n_series")?, count(p, "n_parallel")?),
        _ => return Err(malformed("cell_connections must be [n_series, n_parallel]")),
    };

    let cell_spacing_mm = match field("cell_spacing")? {
        Value::Array(items) if items.len() == 1 => number(&items[0], "cell_spacing")?,
        v => number(v, "cell_spacing")?,
    };
    if cell_spacing_mm < 0.0 {
        return Err(malformed("cell_spacing must be non-negative"));
    }

    let rationale = match obj.get("rationale") {
        None | Some(Value::Null) => String::new(),
        Some(Value::String(s)) => s.clone(),
        Some(v) => v.to_string(),
    };
    let declare_final = match obj.get("declare_final") {
        None | Some(Value::Null) => false,
        Some(Value::Bool(b)) => *b,
        Some(v) => return Err(malformed(format!("declare_final must be a boolean, got {v}"))),
    };

    Ok(Proposal {
        design: PackDesign {
            cell_locations,
            n_series,
            n_parallel,
            cell_spacing_mm,
        },
        rationale,
        declare_final,
    })
}

/// Renders a design as a proposal document wrapped in a `json` fenced block.
/// The bare JSON proposal document, as stored in design files.
pub fn proposal_json(design: &PackDesign, rationale: &str, declare_final: bool) -> String {
    let doc = ProposalDocument {
        cell_locations: design.cell_locations.iter().map(|&p| p.into()).collect(),
        cell_connections: [design.n_series, design.n_parallel],
        cell_spacing: design.cell_spacing_mm,
        rationale: rationale.to_string(),
        declare_final,
    };
    serde_json::to_string(&doc).expect("proposal document serializes")
}

pub fn render_proposal(design: &PackDesign, rationale: &str, declare_final: bool) -> String {
    format!("```json\n{}\n```", proposal_json(design, rationale, declare_final))
}

/// Parses a design file: either agent-style text with one fenced block or a
/// bare JSON proposal document.
pub fn parse_design_file(text: &str) -> Result<Proposal> {
    if text.contains("```") {
        parse_design_proposal(text)
    } else {
        parse_design_proposal(&format!("```json\n{}\n```", text.trim()))
    }
}

/// Parses the answer to a finalize question.
///
/// Accepts a fenced `{"declare_final": bool, "rationale": "..."}` object, or
/// failing that a bare `DECLARE_FINAL` / `CONTINUE` keyword.
pub fn parse_finalize_decision(agent_output: &str) -> Result<FinalizeDecision> {
    match object_in_block(agent_output) {
        Ok(obj) => {
            let declare_final = obj
                .get("declare_final")
                .and_then(Value::as_bool)
                .ok_or_else(|| malformed("finalize decision needs a boolean `declare_final`"))?;
            let rationale = obj
                .get("rationale")
                .and_then(Value::as_str)
                .unwrap_or_default()
                .to_string();
            Ok(FinalizeDecision {
                declare_final,
                rationale,
            })
        }
        Err(e) => {
            let upper = agent_output.to_ascii_uppercase();
            let rationale = agent_output.trim().to_string();
            if upper.contains("DECLARE_FINAL") {
                Ok(FinalizeDecision {
                    declare_final: true,
                    rationale,
                })
            } else if upper.contains("CONTINUE") {
                Ok(FinalizeDecision {
                    declare_final: false,
                    rationale,
                })
            } else {
                Err(e)
            }
        }
    }
}
