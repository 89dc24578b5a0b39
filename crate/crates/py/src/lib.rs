//! Python bindings: physics, loops, batches and statistics.
//!
//! Structured results cross the boundary as plain dicts/lists (via JSON), so
//! the Python side needs no class wrappers.

use std::path::PathBuf;

use packbench_core::agents::{
    oracle_best_design, AgentBackendKind, BackendSpec, HeuristicAgent, HeuristicCoRegulator, HeuristicMode,
    PerturbAgent,
};
use packbench_core::domain::parse_design_file;
use packbench_core::engine::{self, Architecture, LoopConfig};
use packbench_core::evaluation::feedback_text;
use packbench_core::experiment::{run_batch as core_run_batch, BatchConfig};
use packbench_core::{evaluate, stats, validate, Error, ProblemSpec};
use pyo3::exceptions::{PyOSError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use serde::Serialize;

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Io { .. } => PyOSError::new_err(e.to_string()),
        Error::Agent(_) | Error::PartialBatch { .. } | Error::Template { .. } => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn to_py<'py, T: Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

fn problem_from(json: Option<&str>) -> PyResult<ProblemSpec> {
    let problem = match json {
        None => ProblemSpec::default(),
        Some(text) => serde_json::from_str(text).map_err(|e| PyValueError::new_err(format!("problem: {e}")))?,
    };
    problem.check().map_err(py_err)?;
    Ok(problem)
}

fn arch_from(name: &str) -> PyResult<Architecture> {
    name.parse().map_err(PyValueError::new_err)
}

/// Default problem specification as a dict.
#[pyfunction]
fn default_problem(py: Python<'_>) -> PyResult<Bound<'_, PyAny>> {
    to_py(py, &ProblemSpec::default())
}

/// Evaluates and validates a proposal document (bare JSON or fenced block).
///
/// Returns `{"valid", "feedback", "evaluation", "validation"}`.
#[pyfunction]
#[pyo3(signature = (text, problem_json=None))]
fn validate_design<'py>(py: Python<'py>, text: &str, problem_json: Option<&str>) -> PyResult<Bound<'py, PyAny>> {
    let problem = problem_from(problem_json)?;
    let proposal = parse_design_file(text).map_err(py_err)?;
    let report = evaluate(&proposal.design, &problem).map_err(py_err)?;
    let validation = validate(&proposal.design, &report, &problem);
    let out = serde_json::json!({
        "valid": validation.overall_valid,
        "feedback": feedback_text(&report, &validation),
        "evaluation": report,
        "validation": validation,
    });
    to_py(py, &out)
}

/// Best valid uniform hex-grid design for the problem.
#[pyfunction]
#[pyo3(signature = (problem_json=None))]
fn oracle<'py>(py: Python<'py>, problem_json: Option<&str>) -> PyResult<Bound<'py, PyAny>> {
    let problem = problem_from(problem_json)?;
    let best = py.detach(|| oracle_best_design(&problem)).map_err(py_err)?;
    to_py(py, &best)
}

/// Runs one loop with scripted backends and returns the run record.
///
/// `backend` is `"heuristic"` or `"perturb"`; CRDAL always pairs it with the
/// heuristic co-regulator.
#[pyfunction]
#[pyo3(signature = (arch, seed=0, max_steps=None, backend="heuristic", problem_json=None))]
fn run_loop<'py>(
    py: Python<'py>,
    arch: &str,
    seed: u64,
    max_steps: Option<usize>,
    backend: &str,
    problem_json: Option<&str>,
) -> PyResult<Bound<'py, PyAny>> {
    let architecture = arch_from(arch)?;
    let config = LoopConfig {
        problem: problem_from(problem_json)?,
        max_steps,
        ..LoopConfig::new(architecture, seed)
    };
    let run = py.detach(|| {
        let mut design: Box<dyn packbench_core::agents::AgentBackend> = match backend {
            "heuristic" => Box::new(HeuristicAgent::new(HeuristicMode::for_architecture(architecture), seed)),
            "perturb" => Box::new(PerturbAgent::new(seed)),
            other => return Err(Error::Config(format!("unsupported backend `{other}` (heuristic or perturb)"))),
        };
        if architecture == Architecture::Crdal {
            let mut coreg = HeuristicCoRegulator::new();
            engine::run_loop(&config, design.as_mut(), Some(&mut coreg))
        } else {
            engine::run_loop(&config, design.as_mut(), None)
        }
    });
    to_py(py, &run.map_err(py_err)?)
}

/// Seeded batch with heuristic backends; writes logs and returns the manifest.
#[pyfunction]
#[pyo3(signature = (out_dir, base_seed=0, runs_per_system=30, workers=4, systems=None, problem_json=None))]
fn run_batch<'py>(
    py: Python<'py>,
    out_dir: PathBuf,
    base_seed: u64,
    runs_per_system: usize,
    workers: usize,
    systems: Option<Vec<String>>,
    problem_json: Option<&str>,
) -> PyResult<Bound<'py, PyAny>> {
    let problem = problem_from(problem_json)?;
    let systems = match systems {
        Some(names) => names.iter().map(|n| arch_from(n)).collect::<PyResult<Vec<_>>>()?,
        None => Architecture::ALL.to_vec(),
    };
    let config = BatchConfig {
        base_seed,
        runs_per_system,
        systems,
        out_dir,
        design_backend: BackendSpec::of(AgentBackendKind::Heuristic),
        coregulation_backend: BackendSpec::of(AgentBackendKind::Heuristic),
        workers,
        ..BatchConfig::default()
    };
    let manifest = py.detach(|| core_run_batch(&config, &problem)).map_err(py_err)?;
    to_py(py, &manifest)
}

/// Writes the CSV/JSON reports for a batch directory and returns the report.
#[pyfunction]
#[pyo3(signature = (batch_dir, out_dir=None))]
fn summarize(py: Python<'_>, batch_dir: PathBuf, out_dir: Option<PathBuf>) -> PyResult<Bound<'_, PyAny>> {
    let out = out_dir.unwrap_or_else(|| batch_dir.clone());
    let report = py.detach(|| stats::summarize(&batch_dir, &out)).map_err(py_err)?;
    to_py(py, &report)
}

#[pyfunction]
fn one_way_anova(py: Python<'_>, groups: Vec<Vec<f64>>) -> PyResult<Bound<'_, PyAny>> {
    to_py(py, &stats::one_way_anova(&groups).map_err(py_err)?)
}

#[pyfunction]
fn welch_t(py: Python<'_>, a: Vec<f64>, b: Vec<f64>) -> PyResult<Bound<'_, PyAny>> {
    to_py(py, &stats::welch_t(&a, &b).map_err(py_err)?)
}

#[pyfunction]
fn cohens_d(a: Vec<f64>, b: Vec<f64>) -> PyResult<f64> {
    stats::cohens_d(&a, &b).map_err(py_err)
}

#[pyfunction]
#[pyo3(signature = (alpha, comparisons))]
fn bonferroni_alpha(alpha: f64, comparisons: usize) -> f64 {
    stats::bonferroni_alpha(alpha, comparisons)
}

#[pyfunction]
fn pca_2d<'py>(py: Python<'py>, rows: Vec<Vec<f64>>, names: Vec<String>) -> PyResult<Bound<'py, PyAny>> {
    let names: Vec<&str> = names.iter().map(String::as_str).collect();
    to_py(py, &stats::pca_2d(&rows, &names).map_err(py_err)?)
}

#[pymodule]
fn packbench(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(default_problem, m)?)?;
    m.add_function(wrap_pyfunction!(validate_design, m)?)?;
    m.add_function(wrap_pyfunction!(oracle, m)?)?;
    m.add_function(wrap_pyfunction!(run_loop, m)?)?;
    m.add_function(wrap_pyfunction!(run_batch, m)?)?;
    m.add_function(wrap_pyfunction!(summarize, m)?)?;
    m.add_function(wrap_pyfunction!(one_way_anova, m)?)?;
    m.add_function(wrap_pyfunction!(welch_t, m)?)?;
    m.add_function(wrap_pyfunction!(cohens_d, m)?)?;
    m.add_function(wrap_pyfunction!(bonferroni_alpha, m)?)?;
    m.add_function(wrap_pyfunction!(pca_2d, m)?)?;
    Ok(())
}
