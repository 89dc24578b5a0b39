//! Versioned text templates with `{name}` placeholders.
//!
//! Template files live in the crate's `templates/` directory and are compiled
//! in, so prompts used by a run are auditable from the source tree.

use crate::error::{Error, Result};

pub const DESIGN_FEEDBACK: &str = include_str!("../templates/design_feedback.txt");
pub const RWL_DESIGN: &str = include_str!("../templates/rwl_design.txt");
pub const SRL_DESIGN: &str = include_str!("../templates/srl_design.txt");
pub const CRDAL_DESIGN: &str = include_str!("../templates/crdal_design.txt");
pub const CRDAL_COREGULATION: &str = include_str!("../templates/crdal_coregulation.txt");
pub const FINALIZE_DECISION: &str = include_str!("../templates/finalize_decision.txt");
pub const PROBLEM_BRIEF: &str = include_str!("../templates/problem_brief.txt");
pub const ACTION_SCHEMA: &str = include_str!("../templates/action_schema.txt");

/// Strips the leading `#` comment lines (version header) from a template.
fn body(template: &str) -> &str {
    let mut rest = template;
    while rest.starts_with('#') {
        rest = rest.split_once('\n').map_or("", |(_, tail)| tail);
    }
    rest
}

/// Substitutes every `{name}` placeholder.
///
/// Fails if the template references a placeholder with no value, so a prompt
/// can never be sent with a literal `{history}` left in it. Values are inserted
/// verbatim and are not rescanned.
pub fn render(name: &str, template: &str, values: &[(&str, &str)]) -> Result<String> {
    let src = body(template);
    let mut out = String::with_capacity(src.len() + values.iter().map(|(_, v)| v.len()).sum::<usize>());
    let mut rest = src;
    while let Some(open) = rest.find('{') {
        out.push_str(&rest[..open]);
        let after = &rest[open + 1..];
        let close = after.find('}');
        let key = close.map(|c| &after[..c]);
        match key {
            Some(k) if !k.is_empty() && k.chars().all(|c| c.is_ascii_lowercase() || c == '_') => {
                let value = values
                    .iter()
                    .find(|(n, _)| *n == k)
                    .map(|(_, v)| *v)
                    .ok_or_else(|| Error::Template {
                        template: name.to_string(),
                        message: format!("no value for placeholder {{{k}}}"),
                    })?;
                out.push_str(value);
                rest = &after[k.len() + 1..];
            }
            _ => {
                out.push('{');
                rest = after;
            }
        }
    }
    out.push_str(rest);
    Ok(out)
}
