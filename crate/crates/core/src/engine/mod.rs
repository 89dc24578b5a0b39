//! The RWL / SRL / CRDAL design loops.
//!
//! One loop run is strictly sequential: (co-regulate) → propose → evaluate and
//! validate → (finalize), repeated until a valid design is declared final or
//! the step cap is reached.

mod progress;
pub mod prompts;
mod record;

pub use progress::{analyze_progress, render_trajectory, TrajectoryRow, TrajectorySummary};
pub use record::{Architecture, RunRecord, StepRecord};

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::agents::{AgentBackend, AgentCall, AgentError, CallKind, ChatMessage};
use crate::domain::{parse_design_proposal, parse_finalize_decision, ProblemSpec};
use crate::error::{Error, Result};
use crate::evaluation::{evaluate, feedback_text, validate};
use prompts::PromptContext;

/// Prompt size, in characters, past which the oldest raw proposals are compacted.
pub const DEFAULT_CONTEXT_BUDGET_CHARS: usize = 4_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LoopConfig {
    pub architecture: Architecture,
    pub problem: ProblemSpec,
    /// Defaults to the problem's design-step cap and may not exceed it.
    pub max_steps: Option<usize>,
    pub run_index: usize,
    pub seed: u64,
    pub context_budget_chars: usize,
}

impl Default for LoopConfig {
    fn default() -> Self {
        Self {
            architecture: Architecture::Rwl,
            problem: ProblemSpec::default(),
            max_steps: None,
            run_index: 0,
            seed: 0,
            context_budget_chars: DEFAULT_CONTEXT_BUDGET_CHARS,
        }
    }
}

impl LoopConfig {
    pub fn new(architecture: Architecture, seed: u64) -> Self {
        Self {
            architecture,
            seed,
            ..Self::default()
        }
    }

    pub fn effective_max_steps(&self) -> usize {
        self.max_steps.unwrap_or(self.problem.max_design_steps)
    }

    fn check(&self, has_coregulator: bool) -> Result<()> {
        self.problem.check()?;
        let cap = self.problem.max_design_steps;
        let steps = self.effective_max_steps();
        if steps == 0 || steps > cap {
            return Err(Error::Config(format!("max_steps must be in 1..={cap}, got {steps}")));
        }
        match (self.architecture, has_coregulator) {
            (Architecture::Crdal, false) => Err(Error::Config("CRDAL needs a co-regulation agent".into())),
            (Architecture::Rwl | Architecture::Srl, true) => Err(Error::Config(format!(
                "{} does not use a co-regulation agent",
                self.architecture
            ))),
            _ => Ok(()),
        }
    }
}

struct Loop<'a, 'd, 'c> {
    config: &'a LoopConfig,
    design: &'a mut (dyn AgentBackend + 'd),
    coregulation: Option<&'a mut (dyn AgentBackend + 'c)>,
    brief: Option<String>,
    steps: Vec<StepRecord>,
    guard_steps: Vec<usize>,
}

impl Loop<'_, '_, '_> {
    fn wants_prompts(&self) -> bool {
        self.design.needs_prompt() || self.coregulation.as_ref().is_some_and(|c| c.needs_prompt())
    }

    fn latest_feedback(&self) -> String {
        self.steps
            .last()
            .map_or_else(|| prompts::NO_FEEDBACK_YET.to_string(), |s| s.design_feedback_text.clone())
    }

    fn history_text(&mut self, step_index: usize) -> String {
        let (text, compacted) = prompts::render_history(&self.steps, self.config.context_budget_chars);
        if compacted && self.guard_steps.last() != Some(&step_index) {
            log::warn!(
                "{} run {} step {step_index}: context budget reached, compacting old proposals",
                self.config.architecture,
                self.config.run_index
            );
            self.guard_steps.push(step_index);
        }
        text
    }

    /// Runs one step. Returns `Ok(true)` when the run is finished by a final declaration.
    fn step(&mut self, k: usize, meta: &mut Option<String>) -> std::result::Result<bool, LoopAbort> {
        let arch = self.config.architecture;
        let summary = if arch.uses_progress_analyzer() && !self.steps.is_empty() {
            Some(analyze_progress(&self.steps).map_err(LoopAbort::Engine)?)
        } else {
            None
        };
        let table = summary.as_ref().map(render_trajectory);
        let prompting = self.wants_prompts();
        let history = if prompting { self.history_text(k) } else { String::new() };
        let feedback = self.latest_feedback();
        let brief = self.brief.clone().unwrap_or_default();

        if arch == Architecture::Crdal && !self.steps.is_empty() {
            let coreg_prompt = self.coregulation.as_ref().is_some_and(|c| c.needs_prompt());
            let messages = if coreg_prompt {
                prompts::coregulation_messages(&PromptContext {
                    problem_brief: &brief,
                    history: &history,
                    design_feedback: &feedback,
                    trajectory_table: table.as_deref(),
                    metacognitive_feedback: None,
                })
                .map_err(LoopAbort::Engine)?
            } else {
                Vec::new()
            };
            let call = make_call(self.config, &self.steps, CallKind::CoRegulate, k, summary.as_ref(), None, &messages);
            let coreg = self.coregulation.as_deref_mut().expect("checked by LoopConfig::check");
            let text = coreg.respond(&call).map_err(LoopAbort::Agent)?;
            *meta = Some(text);
        }

        let messages = if self.design.needs_prompt() {
            prompts::design_messages(
                arch,
                &PromptContext {
                    problem_brief: &brief,
                    history: &history,
                    design_feedback: &feedback,
                    trajectory_table: table.as_deref(),
                    metacognitive_feedback: meta.as_deref(),
                },
            )
            .map_err(LoopAbort::Engine)?
        } else {
            Vec::new()
        };
        let call = make_call(self.config, &self.steps, CallKind::Propose, k, summary.as_ref(), meta.as_deref(), &messages);
        let output = self.design.respond(&call).map_err(LoopAbort::Agent)?;

        let mut record = StepRecord {
            step_index: k,
            design: None,
            evaluation: None,
            validation: None,
            design_feedback_text: String::new(),
            metacognitive_feedback_text: if arch == Architecture::Crdal { meta.clone() } else { None },
            agent_rationale: String::new(),
            finalize_decision: None,
            agent_output: output,
            finalize_output: None,
            parse_error: None,
        };
        let assessed = parse_design_proposal(&record.agent_output).and_then(|proposal| {
            let report = evaluate(&proposal.design, &self.config.problem)?;
            Ok((proposal, report))
        });
        match assessed {
            Ok((proposal, report)) => {
                let validation = validate(&proposal.design, &report, &self.config.problem);
                record.design_feedback_text = feedback_text(&report, &validation);
                record.agent_rationale = proposal.rationale;
                record.design = Some(proposal.design);
                record.evaluation = Some(report);
                record.validation = Some(validation);
            }
            Err(e) => {
                let msg = e.to_string();
                record.design_feedback_text = prompts::format_reminder(&msg);
                record.parse_error = Some(msg);
            }
        }
        let valid = record.is_valid();
        self.steps.push(record);
        if !valid {
            return Ok(false);
        }

        let messages = if self.design.needs_prompt() {
            let history = self.history_text(k);
            let feedback = self.latest_feedback();
            prompts::finalize_messages(&PromptContext {
                problem_brief: &brief,
                history: &history,
                design_feedback: &feedback,
                trajectory_table: None,
                metacognitive_feedback: None,
            })
            .map_err(LoopAbort::Engine)?
        } else {
            Vec::new()
        };
        let summary = if arch.uses_progress_analyzer() {
            Some(analyze_progress(&self.steps).map_err(LoopAbort::Engine)?)
        } else {
            None
        };
        let call = make_call(self.config, &self.steps, CallKind::Finalize, k, summary.as_ref(), meta.as_deref(), &messages);
        let output = self.design.respond(&call).map_err(LoopAbort::Agent)?;
        // An unparseable answer is not an affirmation.
        let declared = parse_finalize_decision(&output).is_ok_and(|d| d.declare_final);
        let last = self.steps.last_mut().expect("just pushed");
        last.finalize_decision = Some(declared);
        last.finalize_output = Some(output);
        Ok(declared)
    }
}

fn make_call<'c>(
    config: &'c LoopConfig,
    history: &'c [StepRecord],
    kind: CallKind,
    step_index: usize,
    summary: Option<&'c TrajectorySummary>,
    meta: Option<&'c str>,
    messages: &'c [ChatMessage],
) -> AgentCall<'c> {
    AgentCall {
        kind,
        architecture: config.architecture,
        step_index,
        problem: &config.problem,
        history,
        summary,
        metacognitive_feedback: meta,
        messages,
    }
}

enum LoopAbort {
    Agent(AgentError),
    Engine(Error),
}

/// Executes one loop run.
///
/// Configuration errors are returned as `Err`. Agent failures end the run as
/// failed with the error recorded in the returned [`RunRecord`].
pub fn run_loop(
    config: &LoopConfig,
    design: &mut (dyn AgentBackend + '_),
    coregulation: Option<&mut (dyn AgentBackend + '_)>,
) -> Result<RunRecord> {
    config.check(coregulation.is_some())?;
    let started = Instant::now();
    let design_backend = design.name();
    let coregulation_backend = coregulation.as_ref().map(|c| c.name());
    let mut lp = Loop {
        config,
        design,
        coregulation,
        brief: None,
        steps: Vec::new(),
        guard_steps: Vec::new(),
    };
    if lp.wants_prompts() {
        lp.brief = Some(prompts::problem_brief(&config.problem)?);
    }

    let mut meta: Option<String> = None;
    let mut final_step_index = None;
    let mut error = None;
    for k in 1..=config.effective_max_steps() {
        match lp.step(k, &mut meta) {
            Ok(true) => {
                final_step_index = Some(k);
                break;
            }
            Ok(false) => {}
            Err(LoopAbort::Agent(e)) => {
                log::error!("{} run {} aborted at step {k}: {e}", config.architecture, config.run_index);
                error = Some(e.to_string());
                break;
            }
            Err(LoopAbort::Engine(e)) => return Err(e),
        }
    }

    Ok(RunRecord {
        architecture: config.architecture,
        run_index: config.run_index,
        seed: config.seed,
        steps: lp.steps,
        final_step_index,
        succeeded: final_step_index.is_some(),
        wall_time_s: started.elapsed().as_secs_f64(),
        design_backend,
        coregulation_backend,
        error,
        context_guard_steps: lp.guard_steps,
    })
}
