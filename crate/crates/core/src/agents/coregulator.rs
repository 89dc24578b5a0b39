use super::heuristic::LayoutParams;
use super::{AgentBackend, AgentCall, AgentError, CallKind};
use crate::engine::analyze_progress;

/// Rule-based co-regulation agent.
///
/// Reads the trajectory summary and the latest assessment and answers with
/// three lines: `Progress:`, `Bottleneck:` and `Strategy:`.
#[derive(Debug, Default, Clone)]
pub struct HeuristicCoRegulator;

impl HeuristicCoRegulator {
    pub fn new() -> Self {
        Self
    }

    fn assess(call: &AgentCall<'_>) -> (String, &'static str, &'static str) {
        let problem = call.problem;
        let summary = call.summary.cloned().or_else(|| analyze_progress(call.history).ok());
        let progress = match &summary {
            None => "no designs evaluated yet".to_string(),
            Some(s) => match (s.best_valid_capacity_ah, s.steps_since_improvement) {
                (None, n) => format!("stalling: no valid design after {n} step(s)"),
                (Some(best), 0) => format!("improving: best valid capacity now {best:.2} Ah"),
                (Some(best), n) => {
                    let last_valid = s.rows.last().is_some_and(|r| r.valid);
                    let word = if last_valid { "stalling" } else { "regressing" };
                    format!("{word}: best valid capacity {best:.2} Ah, unchanged for {n} step(s)")
                }
            },
        };

        let Some(last) = call.history.last() else {
            return (progress, "none identified", "propose a feasible seed design");
        };
        let Some(design) = last.design.as_ref() else {
            return (progress, "proposal format", "follow the action schema exactly");
        };
        let violations = last.validation.as_ref().map(|v| v.violations()).unwrap_or_default();
        let has = |name: &str| violations.iter().any(|v| v.starts_with(name));
        let params = LayoutParams::infer(design, problem);
        let room_above = (params.layers + 1) as f64 * problem.cell.height_mm <= problem.envelope_mm.height_mm;

        let (bottleneck, strategy) = if has("thermal") || has("current") {
            ("thermal limit at the required current", "add parallel strings to cut per-cell current")
        } else if has("capacity") {
            ("capacity below the minimum", "add parallel strings")
        } else if has("envelope_height") {
            ("envelope height", "remove a layer")
        } else if has("envelope") {
            if room_above {
                ("envelope footprint", "add a layer to stack cells vertically")
            } else {
                ("envelope footprint", "reduce spacing or parallel strings")
            }
        } else if !violations.is_empty() {
            ("geometry", "regenerate a uniform grid at the minimum spacing")
        } else {
            let footprint_full = last.evaluation.as_ref().is_some_and(|e| {
                e.bounding_d_mm > 0.8 * problem.envelope_mm.depth_mm
                    || e.bounding_w_mm > 0.8 * problem.envelope_mm.width_mm && params.layers == 1
            });
            if footprint_full && room_above {
                ("footprint of the current layer", "add a layer and scale parallel strings")
            } else {
                ("capacity headroom remains", "add parallel strings")
            }
        };
        (progress, bottleneck, strategy)
    }
}

impl AgentBackend for HeuristicCoRegulator {
    fn name(&self) -> String {
        "heuristic:coregulator".into()
    }

    fn needs_prompt(&self) -> bool {
        false
    }

    fn respond(&mut self, call: &AgentCall<'_>) -> Result<String, AgentError> {
        if call.kind != CallKind::CoRegulate {
            return Err(AgentError::Config(
                "the heuristic co-regulator only answers co-regulation calls".into(),
            ));
        }
        let (progress, bottleneck, strategy) = Self::assess(call);
        Ok(format!("Progress: {progress}\nBottleneck: {bottleneck}\nStrategy: {strategy}"))
    }
}
