//! JSONL run logs: a header line with run metadata, then one step per line.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::engine::{Architecture, RunRecord, StepRecord};
use crate::error::{Error, Result};

pub const RUN_LOG_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunHeader {
    pub v: u32,
    pub architecture: Architecture,
    pub run_index: usize,
    pub seed: u64,
    pub final_step_index: Option<usize>,
    pub succeeded: bool,
    pub wall_time_s: f64,
    pub design_backend: String,
    pub coregulation_backend: Option<String>,
    pub error: Option<String>,
    pub context_guard_steps: Vec<usize>,
    pub step_count: usize,
}

pub fn run_log_name(architecture: Architecture, run_index: usize) -> String {
    format!("{}_run{run_index:02}.jsonl", architecture.label().to_ascii_lowercase())
}

pub fn write_run_log(path: &Path, run: &RunRecord) -> Result<()> {
    let header = RunHeader {
        v: RUN_LOG_VERSION,
        architecture: run.architecture,
        run_index: run.run_index,
        seed: run.seed,
        final_step_index: run.final_step_index,
        succeeded: run.succeeded,
        wall_time_s: run.wall_time_s,
        design_backend: run.design_backend.clone(),
        coregulation_backend: run.coregulation_backend.clone(),
        error: run.error.clone(),
        context_guard_steps: run.context_guard_steps.clone(),
        step_count: run.steps.len(),
    };
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    write_line(&mut w, path, &header)?;
    for step in &run.steps {
        write_line(&mut w, path, step)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn write_line<T: Serialize>(w: &mut impl Write, path: &Path, value: &T) -> Result<()> {
    serde_json::to_writer(&mut *w, value).map_err(|e| Error::json("run log line", e))?;
    w.write_all(b"\n").map_err(|e| Error::io(path, e))
}

pub fn read_run_log(path: &Path) -> Result<RunRecord> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut lines = BufReader::new(file).lines();
    let first = lines
        .next()
        .ok_or_else(|| Error::Config(format!("{}: empty run log", path.display())))?
        .map_err(|e| Error::io(path, e))?;
    let header: RunHeader =
        serde_json::from_str(&first).map_err(|e| Error::json(format!("{} header", path.display()), e))?;
    if header.v != RUN_LOG_VERSION {
        return Err(Error::Config(format!(
            "{}: unsupported run log version {}",
            path.display(),
            header.v
        )));
    }
    let mut steps = Vec::with_capacity(header.step_count);
    for (i, l) in lines.enumerate() {
        let l = l.map_err(|e| Error::io(path, e))?;
        if l.trim().is_empty() {
            continue;
        }
        let step: StepRecord =
            serde_json::from_str(&l).map_err(|e| Error::json(format!("{} line {}", path.display(), i + 2), e))?;
        steps.push(step);
    }
    if steps.len() != header.step_count {
        return Err(Error::Config(format!(
            "{}: header declares {} steps, found {}",
            path.display(),
            header.step_count,
            steps.len()
        )));
    }
    Ok(RunRecord {
        architecture: header.architecture,
        run_index: header.run_index,
        seed: header.seed,
        steps,
        final_step_index: header.final_step_index,
        succeeded: header.succeeded,
        wall_time_s: header.wall_time_s,
        design_backend: header.design_backend,
        coregulation_backend: header.coregulation_backend,
        error: header.error,
        context_guard_steps: header.context_guard_steps,
    })
}
