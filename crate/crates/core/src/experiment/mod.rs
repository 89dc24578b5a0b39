//! Seeded batches of loop runs.
//!
//! Run `i` of every system uses seed `base_seed + i`, so systems face the same
//! random streams. Each run gets fresh agent backends and writes its own log.

mod features;
mod runlog;

pub use features::{DesignFeatureVector, FEATURE_NAMES};
pub use runlog::{read_run_log, run_log_name, write_run_log, RunHeader, RUN_LOG_VERSION};

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::agents::BackendSpec;
use crate::domain::ProblemSpec;
use crate::engine::{run_loop, Architecture, LoopConfig, RunRecord, DEFAULT_CONTEXT_BUDGET_CHARS};
use crate::error::{Error, Result};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BatchConfig {
    pub base_seed: u64,
    pub runs_per_system: usize,
    pub systems: Vec<Architecture>,
    pub out_dir: PathBuf,
    pub design_backend: BackendSpec,
    /// Used by CRDAL runs only.
    pub coregulation_backend: BackendSpec,
    pub workers: usize,
    pub max_steps: Option<usize>,
    pub context_budget_chars: usize,
}

impl Default for BatchConfig {
    fn default() -> Self {
        Self {
            base_seed: 0,
            runs_per_system: 30,
            systems: Architecture::ALL.to_vec(),
            out_dir: PathBuf::from("batch_out"),
            design_backend: BackendSpec::default(),
            coregulation_backend: BackendSpec::default(),
            workers: 4,
            max_steps: None,
            context_budget_chars: DEFAULT_CONTEXT_BUDGET_CHARS,
        }
    }
}

impl BatchConfig {
    pub fn check(&self) -> Result<()> {
        if self.runs_per_system == 0 {
            return Err(Error::Config("runs_per_system must be at least 1".into()));
        }
        if self.systems.is_empty() {
            return Err(Error::Config("no systems selected".into()));
        }
        if self.workers == 0 {
            return Err(Error::Config("workers must be at least 1".into()));
        }
        Ok(())
    }

    pub fn seed_for(&self, run_index: usize) -> u64 {
        self.base_seed.wrapping_add(run_index as u64)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub file: String,
    pub architecture: Architecture,
    pub run_index: usize,
    pub seed: u64,
    pub succeeded: bool,
    pub steps_taken: usize,
    pub final_capacity_ah: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchManifest {
    pub v: u32,
    pub base_seed: u64,
    pub runs_per_system: usize,
    pub systems: Vec<Architecture>,
    pub problem: ProblemSpec,
    pub runs: Vec<ManifestEntry>,
}

impl BatchManifest {
    pub fn read(batch_dir: &Path) -> Result<Self> {
        let path = batch_dir.join(MANIFEST_FILE);
        let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::json(path.display().to_string(), e))
    }

    /// Loads every run log the manifest lists, in manifest order.
    pub fn load_runs(&self, batch_dir: &Path) -> Result<Vec<RunRecord>> {
        self.runs.iter().map(|e| read_run_log(&batch_dir.join(&e.file))).collect()
    }
}

/// One run with freshly built backends.
///
/// A backend that cannot be built (missing transcript, missing credentials)
/// yields a failed run with no steps rather than an error, so batches never
/// lose a run silently.
pub fn execute_run(config: &LoopConfig, design: &BackendSpec, coregulation: &BackendSpec) -> Result<RunRecord> {
    let arch = config.architecture;
    let built = design
        .build_design(arch, config.seed, config.run_index)
        .and_then(|d| {
            let c = match arch {
                Architecture::Crdal => Some(coregulation.build_coregulation(arch, config.seed, config.run_index)?),
                _ => None,
            };
            Ok((d, c))
        });
    match built {
        Ok((mut d, mut c)) => run_loop(config, d.as_mut(), c.as_deref_mut()),
        Err(e) => {
            log::error!("{arch} run {}: cannot build backends: {e}", config.run_index);
            Ok(RunRecord {
                architecture: arch,
                run_index: config.run_index,
                seed: config.seed,
                steps: Vec::new(),
                final_step_index: None,
                succeeded: false,
                wall_time_s: 0.0,
                design_backend: format!("{:?}", design.kind).to_ascii_lowercase(),
                coregulation_backend: None,
                error: Some(e.to_string()),
                context_guard_steps: Vec::new(),
            })
        }
    }
}

/// Executes every run of the batch and writes logs plus a manifest.
///
/// Runs that fail to execute or to persist are reported together as
/// [`Error::PartialBatch`] after everything else has been written.
pub fn run_batch(config: &BatchConfig, problem: &ProblemSpec) -> Result<BatchManifest> {
    config.check()?;
    problem.check()?;
    let out = &config.out_dir;
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;

    let jobs: Vec<(Architecture, usize)> = config
        .systems
        .iter()
        .flat_map(|&a| (0..config.runs_per_system).map(move |i| (a, i)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;

    let results: Vec<(Architecture, usize, Result<ManifestEntry>)> = pool.install(|| {
        jobs.par_iter()
            .map(|&(arch, i)| {
                let loop_config = LoopConfig {
                    architecture: arch,
                    problem: problem.clone(),
                    max_steps: config.max_steps,
                    run_index: i,
                    seed: config.seed_for(i),
                    context_budget_chars: config.context_budget_chars,
                };
                let entry = execute_run(&loop_config, &config.design_backend, &config.coregulation_backend)
                    .and_then(|run| {
                        let file = run_log_name(arch, i);
                        write_run_log(&out.join(&file), &run)?;
                        log::info!(
                            "{arch} run {i}: {} in {} step(s)",
                            if run.succeeded { "succeeded" } else { "failed" },
                            run.steps_taken()
                        );
                        Ok(ManifestEntry {
                            file,
                            architecture: arch,
                            run_index: i,
                            seed: run.seed,
                            succeeded: run.succeeded,
                            steps_taken: run.steps_taken(),
                            final_capacity_ah: run.final_capacity_ah(),
                            error: run.error,
                        })
                    });
                (arch, i, entry)
            })
            .collect()
    });

    let mut runs = Vec::with_capacity(results.len());
    let mut failures = Vec::new();
    for (arch, i, r) in results {
        match r {
            Ok(entry) => runs.push(entry),
            Err(e) => failures.push(format!("{arch} run {i}: {e}")),
        }
    }
    let manifest = BatchManifest {
        v: RUN_LOG_VERSION,
        base_seed: config.base_seed,
        runs_per_system: config.runs_per_system,
        systems: config.systems.clone(),
        problem: problem.clone(),
        runs,
    };
    let path = out.join(MANIFEST_FILE);
    let text = serde_json::to_string_pretty(&manifest).map_err(|e| Error::json("manifest", e))?;
    fs::write(&path, text + "\n").map_err(|e| Error::io(&path, e))?;

    if failures.is_empty() {
        Ok(manifest)
    } else {
        Err(Error::PartialBatch {
            failed: failures.len(),
            total: jobs.len(),
            details: failures.join("; "),
        })
    }
}
