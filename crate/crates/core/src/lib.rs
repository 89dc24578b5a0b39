//! Battery-pack cell configuration benchmark.
//!
//! The crate is organised around the pieces of an agentic design experiment:
//!
//! * [`domain`]: problem constants, design payloads, packing geometry and the
//!   design-proposal document format.
//! * [`evaluation`]: the numerical evaluator, the validator and the feedback text
//!   returned to agents.
//! * [`engine`]: the RWL / SRL / CRDAL loops, the progress analyzer and prompt
//!   templates.
//! * [`agents`]: pluggable agent backends (HTTP chat completion, scripted
//!   heuristics, replay, random perturbation) and the exhaustive oracle.
//! * [`experiment`]: seeded batches, JSONL run logs and design features.
//! * [`stats`]: ANOVA, Welch tests, effect sizes, PCA and batch summaries.

pub mod agents;
pub mod config;
pub mod domain;
pub mod engine;
pub mod error;
pub mod evaluation;
pub mod experiment;
pub mod stats;
pub mod templates;

pub use domain::{CellSpec, PackDesign, Point3, ProblemSpec};
pub use error::{Error, Result};
pub use evaluation::{evaluate, validate, EvaluationReport, ValidationReport};
