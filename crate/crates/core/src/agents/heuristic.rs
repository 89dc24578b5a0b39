//! Scripted design agent with three behavioural profiles.
//!
//! Designs are described by a handful of layout parameters (series count,
//! parallel strings, spacing, layers) and realised as a width-first hex grid.
//! The profiles differ only in how they react to feedback:
//!
//! * `rwl_sim` mostly widens spacing on thermal failure and never stacks layers.
//! * `srl_sim` watches the stall counter from the progress analyzer, switches to
//!   adding parallel strings after two stalls, and sometimes explores stacking.
//! * `crdal_sim` follows the strategy line of the co-regulation feedback.
//!
//! All three finalize once no move in their move set yields a strictly better
//! valid design.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{AgentBackend, AgentCall, AgentError, CallKind};
use crate::domain::{hex_grid, render_proposal, PackDesign, ProblemSpec};
use crate::engine::{analyze_progress, Architecture, StepRecord, TrajectorySummary};
use crate::evaluation::{evaluate, validate};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HeuristicMode {
    RwlSim,
    SrlSim,
    CrdalSim,
}

impl HeuristicMode {
    pub fn for_architecture(architecture: Architecture) -> Self {
        match architecture {
            Architecture::Rwl => HeuristicMode::RwlSim,
            Architecture::Srl => HeuristicMode::SrlSim,
            Architecture::Crdal => HeuristicMode::CrdalSim,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            HeuristicMode::RwlSim => "rwl_sim",
            HeuristicMode::SrlSim => "srl_sim",
            HeuristicMode::CrdalSim => "crdal_sim",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LayoutParams {
    pub n_series: u32,
    pub n_parallel: u32,
    pub spacing_mm: f64,
    pub layers: usize,
}

impl LayoutParams {
    /// Reads the parameters back from a design; layers are distinct cell-height bands.
    pub fn infer(design: &PackDesign, problem: &ProblemSpec) -> Self {
        let bands: BTreeSet<i64> = design
            .cell_locations
            .iter()
            .map(|p| (p.z / problem.cell.height_mm).floor() as i64)
            .collect();
        Self {
            n_series: design.n_series,
            n_parallel: design.n_parallel,
            spacing_mm: design.cell_spacing_mm,
            layers: bands.len().max(1),
        }
    }
}

/// Width-first hex grid holding exactly `n_series * n_parallel` cells.
///
/// Each layer uses as many columns as fit the envelope width; rows are added
/// until the layer holds its share. The last layer may be partly filled.
pub fn pack_layout(params: &LayoutParams, problem: &ProblemSpec) -> PackDesign {
    let cell = &problem.cell;
    let total = params.n_series as usize * params.n_parallel as usize;
    let layers = params.layers.max(1);
    let per_layer = total.div_ceil(layers);
    let pitch = cell.diameter_mm + params.spacing_mm;
    let usable = problem.envelope_mm.width_mm - cell.diameter_mm - pitch / 2.0;
    let cols_fit = if usable < 0.0 {
        1
    } else {
        (usable / pitch).floor() as usize + 1
    };
    let (cols, rows) = if per_layer <= cols_fit {
        (per_layer.max(1), 1)
    } else {
        (cols_fit, per_layer.div_ceil(cols_fit))
    };
    let mut cells = hex_grid(cols, rows, layers, params.spacing_mm, cell);
    cells.truncate(total);
    PackDesign {
        cell_locations: cells,
        n_series: params.n_series,
        n_parallel: params.n_parallel,
        cell_spacing_mm: params.spacing_mm,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Hint {
    AddParallel,
    AddLayer,
}

/// Pulls the suggested action out of the `Strategy:` line of metacognitive feedback.
fn parse_hint(feedback: Option<&str>) -> Option<Hint> {
    let line = feedback?
        .lines()
        .find(|l| l.trim_start().to_ascii_lowercase().starts_with("strategy"))?
        .to_ascii_lowercase();
    if line.contains("layer") {
        Some(Hint::AddLayer)
    } else if line.contains("parallel") {
        Some(Hint::AddParallel)
    } else {
        None
    }
}

fn max_layers(problem: &ProblemSpec) -> usize {
    ((problem.envelope_mm.height_mm / problem.cell.height_mm).floor() as usize).max(1)
}

/// Capacity of the realised layout if the evaluator's numbers and the
/// bounding box pass; skips the pairwise clearance check.
fn screened_capacity(params: &LayoutParams, problem: &ProblemSpec) -> Option<f64> {
    let design = pack_layout(params, problem);
    let r = evaluate(&design, problem).ok()?;
    let env = &problem.envelope_mm;
    let ok = r.pack_voltage_v >= problem.min_pack_voltage_v()
        && r.pack_capacity_ah >= problem.min_capacity_ah
        && r.temp_at_draw_c <= problem.max_cell_temp_c
        && r.max_continuous_current_a >= problem.required_current_a
        && r.bounding_w_mm <= env.width_mm
        && r.bounding_d_mm <= env.depth_mm
        && r.bounding_h_mm <= env.height_mm;
    ok.then_some(r.pack_capacity_ah)
}

/// Capacity of the realised layout if it passes full validation.
fn valid_capacity(params: &LayoutParams, problem: &ProblemSpec) -> Option<f64> {
    let design = pack_layout(params, problem);
    let report = evaluate(&design, problem).ok()?;
    validate(&design, &report, problem)
        .overall_valid
        .then_some(report.pack_capacity_ah)
}

pub struct HeuristicAgent {
    mode: HeuristicMode,
    rng: ChaCha8Rng,
    /// Improvement chosen while answering the last finalize call.
    pending: Option<(LayoutParams, String)>,
}

impl HeuristicAgent {
    pub fn new(mode: HeuristicMode, seed: u64) -> Self {
        Self {
            mode,
            rng: ChaCha8Rng::seed_from_u64(seed),
            pending: None,
        }
    }

    fn seed_design(&mut self, problem: &ProblemSpec) -> LayoutParams {
        LayoutParams {
            n_series: problem.min_series(),
            n_parallel: self.rng.random_range(12..=19),
            spacing_mm: problem.min_spacing_mm,
            layers: 1,
        }
    }

    fn summary(call: &AgentCall<'_>) -> Option<TrajectorySummary> {
        call.summary.cloned().or_else(|| analyze_progress(call.history).ok())
    }

    /// Candidate improvements of a valid design, with the move that produced each.
    fn improvement_candidates(
        &mut self,
        current: &LayoutParams,
        problem: &ProblemSpec,
    ) -> Vec<(LayoutParams, &'static str)> {
        let steps: &[u32] = match self.mode {
            HeuristicMode::RwlSim => &[1, 2],
            _ => &[1, 2, 4],
        };
        let mut out: Vec<(LayoutParams, &'static str)> = steps
            .iter()
            .map(|&k| {
                (
                    LayoutParams {
                        n_parallel: current.n_parallel + k,
                        ..*current
                    },
                    "add parallel strings",
                )
            })
            .collect();
        let stack = match self.mode {
            HeuristicMode::RwlSim => false,
            HeuristicMode::SrlSim => self.rng.random_bool(0.5),
            HeuristicMode::CrdalSim => true,
        };
        if stack && current.layers < max_layers(problem) {
            let layers = current.layers + 1;
            let n_parallel = current.n_parallel * layers as u32 / current.layers as u32;
            out.push((
                LayoutParams {
                    layers,
                    n_parallel,
                    ..*current
                },
                "add a layer and scale parallel strings",
            ));
        }
        out
    }

    fn decide_finalize(&mut self, call: &AgentCall<'_>) -> String {
        let problem = call.problem;
        let Some(design) = call.history.last().and_then(|s| s.design.as_ref()) else {
            return finalize_text(false, "no design to finalize");
        };
        let current = LayoutParams::infer(design, problem);
        let current_capacity = f64::from(current.n_parallel) * problem.cell.nominal_capacity_ah;

        // Screen with the cheap evaluator, order by preference, then fully
        // validate in that order and take the first that passes.
        let mut better: Vec<(LayoutParams, &'static str, f64)> = self
            .improvement_candidates(&current, problem)
            .into_iter()
            .filter_map(|(p, why)| screened_capacity(&p, problem).map(|c| (p, why, c)))
            .filter(|&(_, _, c)| c > current_capacity)
            .collect();
        let hint = parse_hint(call.metacognitive_feedback);
        match self.mode {
            HeuristicMode::RwlSim => {
                better.shuffle(&mut self.rng);
            }
            _ => {
                let prefer_layers = self.mode == HeuristicMode::CrdalSim && hint == Some(Hint::AddLayer);
                better.sort_by(|a, b| {
                    let layer_key = |p: &LayoutParams| prefer_layers && p.layers > current.layers;
                    layer_key(&b.0)
                        .cmp(&layer_key(&a.0))
                        .then(b.2.total_cmp(&a.2))
                });
            }
        }
        let Some(chosen) = better.into_iter().find(|(p, _, _)| valid_capacity(p, problem).is_some()) else {
            self.pending = None;
            return finalize_text(
                true,
                &format!("{}: no move in my move set improves on {current_capacity:.2} Ah", self.mode.label()),
            );
        };
        let why = format!("{}: {} reaches {:.2} Ah", self.mode.label(), chosen.1, chosen.2);
        self.pending = Some((chosen.0, why.clone()));
        finalize_text(false, &why)
    }

    /// Fix-up for an invalid design, driven by the violated constraints.
    fn repair(
        &mut self,
        current: LayoutParams,
        step: &StepRecord,
        call: &AgentCall<'_>,
    ) -> (LayoutParams, String) {
        let problem = call.problem;
        let violations = step
            .validation
            .as_ref()
            .map(|v| v.violations())
            .unwrap_or_default();
        let has = |name: &str| violations.iter().any(|v| v.starts_with(name));
        let stalls = Self::summary(call).map_or(0, |s| s.steps_since_improvement);
        let hint = parse_hint(call.metacognitive_feedback);
        let mut next = current;
        let mut actions: Vec<String> = Vec::new();

        let min_parallel = (problem.min_capacity_ah / problem.cell.nominal_capacity_ah).ceil() as u32;
        if has("capacity") && next.n_parallel < min_parallel {
            next.n_parallel = min_parallel;
            actions.push(format!("raised parallel strings to {min_parallel} for capacity"));
        }
        if next.n_series < problem.min_series() {
            next.n_series = problem.min_series();
            actions.push(format!("raised series count to {}", next.n_series));
        }

        if has("thermal") || has("current") {
            let add_parallel = match self.mode {
                HeuristicMode::RwlSim => !self.rng.random_bool(0.7),
                HeuristicMode::SrlSim => stalls >= 2 || !self.rng.random_bool(0.7),
                HeuristicMode::CrdalSim => true,
            };
            if self.mode == HeuristicMode::CrdalSim
                && hint == Some(Hint::AddLayer)
                && next.layers < max_layers(problem)
            {
                next.layers += 1;
                actions.push("added a layer".into());
            }
            if add_parallel {
                let k = match self.mode {
                    HeuristicMode::RwlSim => self.rng.random_range(1..=3),
                    _ => self.rng.random_range(3..=5),
                };
                next.n_parallel += k;
                actions.push(format!("added {k} parallel strings to cut per-cell current"));
            } else {
                next.spacing_mm += 1.0;
                actions.push(format!("widened spacing to {:.1} mm for cooling", next.spacing_mm));
            }
        } else if violations.iter().any(|v| v.starts_with("envelope")) {
            let envelope_height = has("envelope_height");
            let may_stack = !envelope_height
                && next.layers < max_layers(problem)
                && match self.mode {
                    HeuristicMode::RwlSim => false,
                    HeuristicMode::SrlSim => stalls >= 2,
                    HeuristicMode::CrdalSim => hint == Some(Hint::AddLayer),
                };
            if envelope_height && next.layers > 1 {
                next.layers -= 1;
                actions.push("removed a layer to fit the height".into());
            } else if may_stack {
                next.layers += 1;
                actions.push("added a layer to shrink the footprint".into());
            } else if next.spacing_mm - 1.0 >= problem.min_spacing_mm {
                next.spacing_mm -= 1.0;
                actions.push(format!("narrowed spacing to {:.1} mm", next.spacing_mm));
            } else {
                let k = self.rng.random_range(1..=2).min(next.n_parallel.saturating_sub(1));
                next.n_parallel -= k;
                actions.push(format!("removed {k} parallel strings to fit the envelope"));
            }
        }

        if next.spacing_mm < problem.min_spacing_mm {
            next.spacing_mm = problem.min_spacing_mm;
            actions.push("restored minimum spacing".into());
        }
        if actions.is_empty() {
            actions.push("regenerated the grid layout".into());
        }
        (next, format!("{}: {}", self.mode.label(), actions.join("; ")))
    }

    fn propose(&mut self, call: &AgentCall<'_>) -> String {
        let problem = call.problem;
        let last_designed = call
            .history
            .iter()
            .rev()
            .find(|s| s.design.is_some());
        let (params, rationale) = match last_designed {
            None => {
                self.pending = None;
                let p = self.seed_design(problem);
                let why = format!(
                    "{}: seed design {}S{}P uniform hex grid",
                    self.mode.label(),
                    p.n_series,
                    p.n_parallel
                );
                (p, why)
            }
            Some(step) => {
                let current = LayoutParams::infer(step.design.as_ref().unwrap(), problem);
                if step.is_valid() {
                    match self.pending.take() {
                        Some(pending) => pending,
                        None => (
                            LayoutParams {
                                n_parallel: current.n_parallel + 1,
                                ..current
                            },
                            format!("{}: add one parallel string", self.mode.label()),
                        ),
                    }
                } else {
                    self.repair(current, step, call)
                }
            }
        };
        let design = pack_layout(&params, problem);
        render_proposal(&design, &rationale, false)
    }
}

fn finalize_text(declare_final: bool, rationale: &str) -> String {
    let body = serde_json::json!({ "declare_final": declare_final, "rationale": rationale });
    format!("```json\n{body}\n```")
}

impl AgentBackend for HeuristicAgent {
    fn name(&self) -> String {
        format!("heuristic:{}", self.mode.label())
    }

    fn needs_prompt(&self) -> bool {
        false
    }

    fn respond(&mut self, call: &AgentCall<'_>) -> Result<String, AgentError> {
        match call.kind {
            CallKind::Propose => Ok(self.propose(call)),
            CallKind::Finalize => Ok(self.decide_finalize(call)),
            CallKind::CoRegulate => Err(AgentError::Config(
                "the heuristic design agent cannot answer co-regulation calls".into(),
            )),
        }
    }
}
