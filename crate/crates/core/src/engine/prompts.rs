//! Renders the prompt messages sent to LLM-backed agents.

use std::fmt::Write;

use super::{Architecture, StepRecord};
use crate::agents::ChatMessage;
use crate::domain::ProblemSpec;
use crate::error::Result;
use crate::templates::{self, render};

const DESIGN_SYSTEM: &str = "You are a battery pack Design Agent. You design packs by proposing cell layouts and read the evaluator's feedback after every proposal.";
const COREGULATION_SYSTEM: &str = "You are a co-regulation reviewer for a battery pack Design Agent.";

pub const NO_FEEDBACK_YET: &str = "No design has been submitted yet.";
pub const NO_HISTORY_YET: &str = "(none yet)";

pub fn problem_brief(problem: &ProblemSpec) -> Result<String> {
    let c = &problem.cell;
    let e = &problem.envelope_mm;
    let f = |x: f64| format!("{x}");
    render(
        "problem_brief",
        templates::PROBLEM_BRIEF,
        &[
            ("cell_diameter", &f(c.diameter_mm)),
            ("cell_height", &f(c.height_mm)),
            ("target_voltage", &f(problem.target_voltage_v)),
            ("min_voltage", &format!("{:.2}", problem.min_pack_voltage_v())),
            ("min_capacity", &f(problem.min_capacity_ah)),
            ("required_current", &f(problem.required_current_a)),
            ("max_temp", &f(problem.max_cell_temp_c)),
            ("env_width", &f(e.width_mm)),
            ("env_depth", &f(e.depth_mm)),
            ("env_height", &f(e.height_mm)),
            ("cell_voltage", &f(c.nominal_voltage_v)),
            ("cell_capacity", &f(c.nominal_capacity_ah)),
            ("cell_resistance", &f(c.internal_resistance_ohm)),
            ("min_spacing", &f(problem.min_spacing_mm)),
            ("ambient", &f(problem.ambient_temp_c)),
            ("max_steps", &problem.max_design_steps.to_string()),
        ],
    )
}

pub fn action_schema() -> Result<String> {
    render("action_schema", templates::ACTION_SCHEMA, &[])
}

fn step_block(step: &StepRecord, compact: bool) -> String {
    let mut out = format!("--- Design step {} ---\n", step.step_index);
    if let Some(meta) = &step.metacognitive_feedback_text {
        let _ = writeln!(out, "Metacognitive Feedback received:\n{}", meta.trim_end());
    }
    if compact {
        let _ = match &step.design {
            Some(d) => writeln!(
                out,
                "Proposal (raw text omitted to fit the context budget): {}S x {}P, {} cells, spacing {} mm",
                d.n_series,
                d.n_parallel,
                d.total_cells(),
                d.cell_spacing_mm
            ),
            None => writeln!(out, "Proposal (raw text omitted to fit the context budget): unparseable"),
        };
    } else {
        let _ = writeln!(out, "Your proposal:\n{}", step.agent_output.trim_end());
    }
    let _ = writeln!(out, "Design Feedback:\n{}", step.design_feedback_text.trim_end());
    if let Some(decision) = step.finalize_decision {
        let word = if decision { "declared final" } else { "chose to keep improving" };
        let _ = writeln!(out, "Finalize decision: {word}");
    }
    out
}

/// Design history text, compacting the oldest raw proposals once the full
/// text would exceed `budget_chars`.
///
/// Returns the text and whether any step was compacted.
pub fn render_history(history: &[StepRecord], budget_chars: usize) -> (String, bool) {
    if history.is_empty() {
        return (NO_HISTORY_YET.to_string(), false);
    }
    let mut blocks: Vec<String> = history.iter().map(|s| step_block(s, false)).collect();
    let mut total: usize = blocks.iter().map(String::len).sum();
    let mut compacted = false;
    for (i, step) in history.iter().enumerate() {
        if total <= budget_chars {
            break;
        }
        let short = step_block(step, true);
        total = total - blocks[i].len() + short.len();
        blocks[i] = short;
        compacted = true;
    }
    (blocks.concat(), compacted)
}

/// Shared rendered pieces for one step's prompts.
pub struct PromptContext<'a> {
    pub problem_brief: &'a str,
    pub history: &'a str,
    pub design_feedback: &'a str,
    pub trajectory_table: Option<&'a str>,
    pub metacognitive_feedback: Option<&'a str>,
}

pub fn design_messages(architecture: Architecture, ctx: &PromptContext<'_>) -> Result<Vec<ChatMessage>> {
    let schema = action_schema()?;
    let table = ctx.trajectory_table.unwrap_or("(no designs evaluated yet)");
    let meta = ctx.metacognitive_feedback.unwrap_or("(none yet)");
    let user = match architecture {
        Architecture::Rwl => render(
            "rwl_design",
            templates::RWL_DESIGN,
            &[
                ("problem_brief", ctx.problem_brief),
                ("action_schema", &schema),
                ("history", ctx.history),
                ("design_feedback", ctx.design_feedback),
            ],
        )?,
        Architecture::Srl => render(
            "srl_design",
            templates::SRL_DESIGN,
            &[
                ("problem_brief", ctx.problem_brief),
                ("action_schema", &schema),
                ("history", ctx.history),
                ("trajectory_table", table),
                ("design_feedback", ctx.design_feedback),
            ],
        )?,
        Architecture::Crdal => render(
            "crdal_design",
            templates::CRDAL_DESIGN,
            &[
                ("problem_brief", ctx.problem_brief),
                ("action_schema", &schema),
                ("history", ctx.history),
                ("design_feedback", ctx.design_feedback),
                ("metacognitive_feedback", meta),
            ],
        )?,
    };
    Ok(vec![ChatMessage::system(DESIGN_SYSTEM), ChatMessage::user(user)])
}

pub fn coregulation_messages(ctx: &PromptContext<'_>) -> Result<Vec<ChatMessage>> {
    let user = render(
        "crdal_coregulation",
        templates::CRDAL_COREGULATION,
        &[
            ("problem_brief", ctx.problem_brief),
            ("history", ctx.history),
            ("trajectory_table", ctx.trajectory_table.unwrap_or("(no designs evaluated yet)")),
            ("design_feedback", ctx.design_feedback),
        ],
    )?;
    Ok(vec![ChatMessage::system(COREGULATION_SYSTEM), ChatMessage::user(user)])
}

pub fn finalize_messages(ctx: &PromptContext<'_>) -> Result<Vec<ChatMessage>> {
    let user = render(
        "finalize_decision",
        templates::FINALIZE_DECISION,
        &[
            ("problem_brief", ctx.problem_brief),
            ("history", ctx.history),
            ("design_feedback", ctx.design_feedback),
        ],
    )?;
    Ok(vec![ChatMessage::system(DESIGN_SYSTEM), ChatMessage::user(user)])
}

/// Feedback returned in place of Design Feedback when a proposal cannot be parsed.
pub fn format_reminder(error: &str) -> String {
    let schema = action_schema().unwrap_or_default();
    format!(
        "INVALID: your response could not be parsed ({error}).\n\
         This still counts as a design generation. Follow the action schema exactly:\n{schema}"
    )
}
