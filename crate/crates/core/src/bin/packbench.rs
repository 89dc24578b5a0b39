//! `packbench`: run design loops, batches, statistics and the oracle.
//!
//! Exit codes: 0 success, 1 run failure or invalid design, 2 usage or
//! configuration error.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use packbench_core::agents::{oracle_best_design, AgentBackendKind, BackendSpec};
use packbench_core::config::CliConfigFile;
use packbench_core::domain::{parse_design_file, proposal_json};
use packbench_core::engine::{Architecture, LoopConfig, RunRecord};
use packbench_core::evaluation::feedback_text;
use packbench_core::experiment::{execute_run, run_batch, write_run_log};
use packbench_core::stats::{summarize, StatReport, SystemSummary};
use packbench_core::{evaluate, validate, Error};

/// `println!` that tolerates a closed stdout (e.g. piping into `head`).
macro_rules! out {
    ($($arg:tt)*) => {{
        use std::io::Write as _;
        let _ = writeln!(std::io::stdout().lock(), $($arg)*);
    }};
}


#[derive(Parser)]
#[command(name = "packbench", version, about = "Battery-pack design loop benchmark")]
struct Cli {
    /// Log progress (repeat for debug output). RUST_LOG overrides.
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute one design loop.
    Run(RunArgs),
    /// Execute a seeded batch of loops for several architectures.
    Batch(BatchArgs),
    /// Summarize a batch directory into CSV and JSON reports.
    Stats(StatsArgs),
    /// Exhaustive hex-grid search for the best valid design.
    Oracle(OracleArgs),
    /// Re-run a loop from recorded agent transcripts.
    Replay(ReplayArgs),
    /// Evaluate and validate a design file.
    ValidateDesign(ValidateArgs),
}

#[derive(Args)]
struct LoopArgs {
    /// Loop architecture: rwl, srl or crdal.
    #[arg(long, default_value = "rwl")]
    arch: Architecture,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0)]
    run_index: usize,
    /// Step cap (at most the problem's cap).
    #[arg(long)]
    max_steps: Option<usize>,
    /// JSON config; its `problem` section overrides the default problem.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Write the JSONL run log here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    common: LoopArgs,
    /// Design agent backend: llm, heuristic, replay or perturb.
    #[arg(long, default_value = "heuristic")]
    backend: AgentBackendKind,
    /// Transcript for a replay design backend.
    #[arg(long)]
    transcript: Option<PathBuf>,
    /// Co-regulation backend for CRDAL: llm, heuristic or replay.
    #[arg(long, default_value = "heuristic")]
    coreg_backend: AgentBackendKind,
    #[arg(long)]
    coreg_transcript: Option<PathBuf>,
}

#[derive(Args)]
struct ReplayArgs {
    #[command(flatten)]
    common: LoopArgs,
    /// Design agent transcript (JSONL, one response per call).
    #[arg(long)]
    transcript: PathBuf,
    /// Co-regulation transcript for CRDAL.
    #[arg(long)]
    coreg_transcript: Option<PathBuf>,
}

#[derive(Args)]
struct BatchArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    base_seed: Option<u64>,
    #[arg(long)]
    runs: Option<usize>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct StatsArgs {
    #[arg(long)]
    batch_dir: PathBuf,
    /// Report directory; defaults to the batch directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct OracleArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// Write the best design as a JSON proposal document.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long)]
    design: PathBuf,
    #[arg(long)]
    config: Option<PathBuf>,
}

enum Failure {
    /// Completed, but the outcome is a failure (failed run, invalid design).
    Outcome(String),
    Usage(String),
    Runtime(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_) | Error::Json { .. } => Failure::Usage(e.to_string()),
            other => Failure::Runtime(other),
        }
    }
}

fn load_config(path: Option<&Path>) -> Result<CliConfigFile, Failure> {
    match path {
        Some(p) => CliConfigFile::load(p).map_err(|e| match e {
            Error::Io { .. } => Failure::Usage(e.to_string()),
            other => Failure::from(other),
        }),
        None => Ok(CliConfigFile::default()),
    }
}

fn backend(kind: AgentBackendKind, transcript: Option<PathBuf>) -> BackendSpec {
    BackendSpec {
        transcript,
        ..BackendSpec::of(kind)
    }
}

fn report_run(run: &RunRecord) -> Result<(), Failure> {
    let label = format!("{} run {} (seed {})", run.architecture, run.run_index, run.seed);
    match (run.succeeded, run.final_step()) {
        (true, Some(step)) => {
            let e = step.evaluation.as_ref().expect("final step is evaluated");
            out!(
                "{label}: final design at step {} — {}S x {}P, {} cells, {:.2} Ah, {:.2} C",
                step.step_index,
                e.n_series,
                e.n_parallel,
                e.total_cells,
                e.pack_capacity_ah,
                e.temp_at_draw_c
            );
            Ok(())
        }
        _ => {
            let why = run
                .error
                .clone()
                .unwrap_or_else(|| "no final design declared within the step cap".into());
            out!("{label}: FAILED after {} step(s): {why}", run.steps.len());
            Err(Failure::Outcome(why))
        }
    }
}

fn run_one(common: &LoopArgs, design: BackendSpec, coreg: BackendSpec) -> Result<(), Failure> {
    let cfg = load_config(common.config.as_deref())?;
    let loop_config = LoopConfig {
        architecture: common.arch,
        problem: cfg.problem,
        max_steps: common.max_steps,
        run_index: common.run_index,
        seed: common.seed,
        ..LoopConfig::default()
    };
    let run = execute_run(&loop_config, &design, &coreg)?;
    if let Some(out) = &common.out {
        if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir).map_err(|e| Failure::Runtime(Error::Io { path: dir.into(), source: e }))?;
        }
        write_run_log(out, &run)?;
    }
    report_run(&run)
}

fn print_table(title: &str, rows: &[SystemSummary]) {
    out!("{title}");
    out!(
        "  {:<6} {:>8} {:>9} {:>9} {:>9} {:>9} {:>9}",
        "system", "success", "min", "max", "mean", "std", "median"
    );
    for s in rows {
        let success = format!("{}/{}", s.n_success, s.n_runs);
        match s.stats {
            Some(d) => out!(
                "  {:<6} {:>8} {:>9.2} {:>9.2} {:>9.2} {:>9.2} {:>9.2}",
                s.architecture.label(),
                success,
                d.min,
                d.max,
                d.mean,
                d.std,
                d.median
            ),
            None => out!("  {:<6} {:>8} {:>9}", s.architecture.label(), success, "-"),
        }
    }
}

fn print_report(r: &StatReport) {
    print_table("Final design capacity (Ah), successful runs:", &r.capacity);
    print_table("Design steps to final design, successful runs:", &r.steps);
    if let Some(a) = &r.capacity_anova {
        out!(
            "Capacity ANOVA: F({}, {}) = {:.3}, p = {:.3e}, partial eta^2 = {:.3}",
            a.df1, a.df2, a.f, a.p, a.partial_eta_sq
        );
    }
    out!("Pairwise capacity tests (Bonferroni alpha = {:.4}):", r.bonferroni_alpha);
    for p in &r.capacity_pairwise {
        out!(
            "  {} vs {}: t({:.1}) = {:.3}, p = {:.3e}, d = {:.3}{}",
            p.system_a,
            p.system_b,
            p.df,
            p.t,
            p.p,
            p.cohens_d,
            if p.significant { " *" } else { "" }
        );
    }
    for n in &r.notes {
        out!("note: {n}");
    }
}

fn dispatch(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Run(a) => {
            if a.backend == AgentBackendKind::Replay && a.transcript.is_none() {
                return Err(Failure::Usage("--backend replay requires --transcript".into()));
            }
            let design = backend(a.backend, a.transcript);
            let coreg = backend(a.coreg_backend, a.coreg_transcript);
            run_one(&a.common, design, coreg)
        }
        Command::Replay(a) => {
            if a.common.arch == Architecture::Crdal && a.coreg_transcript.is_none() {
                return Err(Failure::Usage("CRDAL replay requires --coreg-transcript".into()));
            }
            let design = backend(AgentBackendKind::Replay, Some(a.transcript));
            let coreg = backend(AgentBackendKind::Replay, a.coreg_transcript);
            run_one(&a.common, design, coreg)
        }
        Command::Batch(a) => {
            let cfg = load_config(a.config.as_deref())?;
            let mut batch = cfg.batch;
            if let Some(s) = a.base_seed {
                batch.base_seed = s;
            }
            if let Some(n) = a.runs {
                batch.runs_per_system = n;
            }
            if let Some(w) = a.workers {
                batch.workers = w;
            }
            if let Some(o) = a.out {
                batch.out_dir = o;
            }
            let manifest = run_batch(&batch, &cfg.problem)?;
            for arch in &manifest.systems {
                let mine: Vec<_> = manifest.runs.iter().filter(|r| r.architecture == *arch).collect();
                let ok = mine.iter().filter(|r| r.succeeded).count();
                out!("{arch}: {ok}/{} runs succeeded", mine.len());
            }
            out!("logs and manifest written to {}", batch.out_dir.display());
            Ok(())
        }
        Command::Stats(a) => {
            let out = a.out.unwrap_or_else(|| a.batch_dir.clone());
            let report = summarize(&a.batch_dir, &out)?;
            print_report(&report);
            out!("reports written to {}", out.display());
            Ok(())
        }
        Command::Oracle(a) => {
            let cfg = load_config(a.config.as_deref())?;
            let best = oracle_best_design(&cfg.problem)?;
            let d = &best.design;
            out!(
                "Best design: {}S x {}P, {} cells, grid {} x {} x {}, spacing {} mm",
                d.n_series,
                d.n_parallel,
                d.total_cells(),
                best.cols,
                best.rows,
                best.layers,
                best.spacing_mm
            );
            out!("Capacity: {:.2} Ah", best.capacity_ah);
            if let Some(out) = a.out {
                let rationale = format!(
                    "uniform hex grid {} x {} x {} truncated to {} cells",
                    best.cols,
                    best.rows,
                    best.layers,
                    d.total_cells()
                );
                fs::write(&out, proposal_json(d, &rationale, true) + "\n")
                    .map_err(|e| Failure::Runtime(Error::Io { path: out.clone(), source: e }))?;
            }
            Ok(())
        }
        Command::ValidateDesign(a) => {
            let cfg = load_config(a.config.as_deref())?;
            let text = fs::read_to_string(&a.design)
                .map_err(|e| Failure::Usage(format!("{}: {e}", a.design.display())))?;
            let proposal = parse_design_file(&text).map_err(|e| Failure::Outcome(e.to_string()))?;
            let report = evaluate(&proposal.design, &cfg.problem)?;
            let validation = validate(&proposal.design, &report, &cfg.problem);
            out!("{}", feedback_text(&report, &validation));
            if validation.overall_valid {
                Ok(())
            } else {
                Err(Failure::Outcome("design is invalid".into()))
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Outcome(msg)) => {
            eprintln!("{msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e}");
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            ExitCode::from(1)
        }
    }
}
