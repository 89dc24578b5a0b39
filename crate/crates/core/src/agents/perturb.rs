use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::heuristic::{pack_layout, LayoutParams};
use super::{AgentBackend, AgentCall, AgentError, CallKind};
use crate::domain::render_proposal;

/// Random-walk baseline: applies one random move per step and ignores feedback.
///
/// Finalizes a valid design with probability 0.3. Useful as a floor for the
/// scripted policies and for exercising the loop on arbitrary trajectories.
pub struct PerturbAgent {
    rng: ChaCha8Rng,
}

impl PerturbAgent {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    fn propose(&mut self, call: &AgentCall<'_>) -> String {
        let problem = call.problem;
        let last = call.history.iter().rev().find_map(|s| s.design.as_ref());
        let (params, why) = match last {
            None => (
                LayoutParams {
                    n_series: problem.min_series(),
                    n_parallel: self.rng.random_range(12..=19),
                    spacing_mm: problem.min_spacing_mm,
                    layers: 1,
                },
                "perturb: seed design".to_string(),
            ),
            Some(design) => {
                let mut p = LayoutParams::infer(design, problem);
                let why = match self.rng.random_range(0..6) {
                    0 => {
                        let k = self.rng.random_range(1..=6);
                        p.n_parallel += k;
                        format!("perturb: +{k} parallel")
                    }
                    1 => {
                        let k = self.rng.random_range(1..=3).min(p.n_parallel - 1);
                        p.n_parallel -= k;
                        format!("perturb: -{k} parallel")
                    }
                    2 => {
                        p.spacing_mm += 1.0;
                        "perturb: wider spacing".to_string()
                    }
                    3 => {
                        p.spacing_mm = (p.spacing_mm - 1.0).max(problem.min_spacing_mm);
                        "perturb: narrower spacing".to_string()
                    }
                    4 => {
                        p.layers += 1;
                        "perturb: add a layer".to_string()
                    }
                    _ => {
                        p.layers = (p.layers - 1).max(1);
                        "perturb: remove a layer".to_string()
                    }
                };
                (p, why)
            }
        };
        render_proposal(&pack_layout(&params, problem), &why, false)
    }
}

impl AgentBackend for PerturbAgent {
    fn name(&self) -> String {
        "perturb".into()
    }

    fn needs_prompt(&self) -> bool {
        false
    }

    fn respond(&mut self, call: &AgentCall<'_>) -> Result<String, AgentError> {
        match call.kind {
            CallKind::Propose => Ok(self.propose(call)),
            CallKind::Finalize => {
                let stop = self.rng.random_bool(0.3);
                let body = serde_json::json!({ "declare_final": stop, "rationale": "perturb: coin flip" });
                Ok(format!("```json\n{body}\n```"))
            }
            CallKind::CoRegulate => Err(AgentError::Config(
                "perturb backend cannot answer co-regulation calls".into(),
            )),
        }
    }
}
