//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs as a plain binary (`harness = false`) so the lines always reach stdout:
//! `cargo test -p packbench-core --test acceptance`.

mod common;

use std::panic::{self, AssertUnwindSafe};
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use common::{finalize_text, grid, hand_temp_c, invalid_107s, log_without_timestamps, proposal_text, valid_50ah};
use packbench_core::agents::{oracle_best_design, BackendSpec, AgentBackendKind, ReplayAgent};
use packbench_core::engine::{run_loop, Architecture, LoopConfig};
use packbench_core::evaluation::feedback_text;
use packbench_core::experiment::{run_batch, BatchConfig, BatchManifest};
use packbench_core::stats::{bonferroni_alpha, cohens_d, one_way_anova, pca_2d, welch_t};
use packbench_core::{evaluate, validate, ProblemSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const ORACLE_CAPACITY_AH: f64 = 192.5;
const ORACLE_TIME_LIMIT: Duration = Duration::from_secs(10);
const THERMAL_TOL_C: f64 = 0.5;
const DETERMINISM_TIME_LIMIT: Duration = Duration::from_secs(60);
const ORDERING_RUNS: usize = 30;
const STATS_TOL: f64 = 1e-3;
const F_EQUALS_T2_REL_TOL: f64 = 1e-9;
const PCA_TOL: f64 = 1e-9;
const RANDOM_DATASETS: usize = 100;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn oracle_ceiling() -> Outcome {
    let start = Instant::now();
    let best = oracle_best_design(&ProblemSpec::default()).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    ensure(best.capacity_ah == ORACLE_CAPACITY_AH, || format!("capacity {}", best.capacity_ah))?;
    ensure(best.design.n_series == 108 && best.design.n_parallel == 77, || {
        format!("{}S x {}P", best.design.n_series, best.design.n_parallel)
    })?;
    ensure(best.design.total_cells() == 8316 && best.layers == 3, || {
        format!("{} cells, {} layers", best.design.total_cells(), best.layers)
    })?;
    ensure(elapsed < ORACLE_TIME_LIMIT, || format!("took {elapsed:?}"))?;
    Ok(format!("108S x 77P, 8316 cells, 3 layers, {ORACLE_CAPACITY_AH:.2} Ah in {elapsed:.2?}"))
}

fn thermal_spot_checks() -> Outcome {
    // (cols, rows, layers, cells, P, hand-computed bounding box in mm, reference C)
    let fixtures = [
        (49, 56, 3, 8100, 75, [988.0, 970.628, 195.0], 26.2),
        (49, 45, 1, 2160, 20, [988.0, 780.102, 65.0], 55.1),
        (27, 27, 3, 2160, 20, [548.0, 468.333, 195.0], 88.4),
    ];
    let problem = ProblemSpec::default();
    let mut got = Vec::new();
    for (c, r, l, n, p, dims, reference) in fixtures {
        let e = evaluate(&grid(c, r, l, n, 108, p), &problem).map_err(|e| e.to_string())?;
        let hand = hand_temp_c(dims[0], dims[1], dims[2], n, p);
        ensure((e.temp_at_draw_c - hand).abs() <= THERMAL_TOL_C, || {
            format!("{n} cells: evaluator {:.3} C vs hand {hand:.3} C", e.temp_at_draw_c)
        })?;
        ensure((e.temp_at_draw_c - reference).abs() <= THERMAL_TOL_C, || {
            format!("{n} cells: {:.3} C vs reference {reference}", e.temp_at_draw_c)
        })?;
        got.push(format!("{:.2}", e.temp_at_draw_c));
    }
    Ok(format!("{} C (tolerance {THERMAL_TOL_C} C)", got.join(" / ")))
}

fn validator_discrimination() -> Outcome {
    let problem = ProblemSpec::default();
    let check = |d: &packbench_core::PackDesign| {
        let e = evaluate(d, &problem).unwrap();
        let v = validate(d, &e, &problem);
        (v.overall_valid, feedback_text(&e, &v))
    };
    let (ok, _) = check(&grid(49, 56, 3, 8100, 108, 75));
    ensure(ok, || "8100-cell 108S x 75P design rejected".into())?;

    let mut tight = grid(27, 20, 1, 540, 108, 5);
    for c in &mut tight.cell_locations {
        c.x *= 19.0 / 20.0;
        c.y *= 19.0 / 20.0;
    }
    let mut mismatch = valid_50ah();
    mismatch.n_parallel = 21;
    let cases = [
        ("107S", invalid_107s(), "FAILED: voltage"),
        ("4 layers", grid(27, 20, 4, 2160, 108, 20), "FAILED: envelope height (260.00 mm > 250.00 mm)"),
        ("19 mm pitch", tight, "FAILED: clearance"),
        ("S x P != cells", mismatch, "FAILED: connections"),
    ];
    let mut messages = Vec::new();
    for (label, d, needle) in cases {
        let (ok, text) = check(&d);
        ensure(!ok, || format!("{label} accepted"))?;
        let line = text
            .lines()
            .find(|l| l.starts_with(needle))
            .ok_or_else(|| format!("{label}: no `{needle}` line"))?;
        messages.push(line.to_string());
    }
    let mut spacing = valid_50ah();
    spacing.cell_spacing_mm = 1.0;
    let (ok, text) = check(&spacing);
    ensure(!ok, || "1 mm declared spacing accepted".into())?;
    messages.push(text.lines().find(|l| l.starts_with("FAILED: spacing")).ok_or("no spacing line")?.to_string());
    let mut distinct = messages.clone();
    distinct.sort();
    distinct.dedup();
    ensure(distinct.len() == 5, || format!("messages not distinct: {messages:?}"))?;
    Ok("accepts 108S x 75P; 5 distinct rejections (voltage, height, clearance, connections, spacing)".into())
}

fn run_cli_batch(out: &Path) -> Result<(), String> {
    let o = Command::new(env!("CARGO_BIN_EXE_packbench"))
        .args(["batch", "--base-seed", "1000", "--runs", "5", "--out", out.to_str().unwrap()])
        .env_remove("RUST_LOG")
        .output()
        .map_err(|e| e.to_string())?;
    ensure(o.status.success(), || String::from_utf8_lossy(&o.stderr).into_owned())
}

fn loop_determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let start = Instant::now();
    run_cli_batch(&a)?;
    run_cli_batch(&b)?;
    let elapsed = start.elapsed();
    let manifest = BatchManifest::read(&a).map_err(|e| e.to_string())?;
    ensure(manifest.runs.len() == 15, || format!("{} runs", manifest.runs.len()))?;
    for entry in &manifest.runs {
        let (x, y) = (log_without_timestamps(&a.join(&entry.file)), log_without_timestamps(&b.join(&entry.file)));
        ensure(x == y, || format!("{} differs", entry.file))?;
    }
    let ma = std::fs::read(a.join("manifest.json")).map_err(|e| e.to_string())?;
    let mb = std::fs::read(b.join("manifest.json")).map_err(|e| e.to_string())?;
    ensure(ma == mb, || "manifests differ".into())?;
    ensure(elapsed < DETERMINISM_TIME_LIMIT, || format!("took {elapsed:?}"))?;
    Ok(format!("15 logs identical across two batches in {elapsed:.2?}"))
}

fn simulated_ordering() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let config = BatchConfig {
        base_seed: 1,
        runs_per_system: ORDERING_RUNS,
        out_dir: dir.path().to_path_buf(),
        design_backend: BackendSpec::of(AgentBackendKind::Heuristic),
        coregulation_backend: BackendSpec::of(AgentBackendKind::Heuristic),
        ..BatchConfig::default()
    };
    let manifest = run_batch(&config, &ProblemSpec::default()).map_err(|e| e.to_string())?;
    let mut means = Vec::new();
    for arch in Architecture::ALL {
        let caps: Vec<f64> = manifest
            .runs
            .iter()
            .filter(|r| r.architecture == arch && r.succeeded)
            .filter_map(|r| r.final_capacity_ah)
            .collect();
        ensure(!caps.is_empty(), || format!("{arch}: no successful runs"))?;
        if let Some(bad) = caps.iter().find(|c| !(50.0..=ORACLE_CAPACITY_AH).contains(*c)) {
            return Err(format!("{arch}: final capacity {bad} outside [50, {ORACLE_CAPACITY_AH}]"));
        }
        means.push(caps.iter().sum::<f64>() / caps.len() as f64);
    }
    let (rwl, srl, crdal) = (means[0], means[1], means[2]);
    ensure(crdal > srl && srl > rwl, || format!("means rwl {rwl:.2}, srl {srl:.2}, crdal {crdal:.2}"))?;
    Ok(format!("means crdal {crdal:.2} > srl {srl:.2} > rwl {rwl:.2} Ah; all finals in [50, 192.5]"))
}

fn statistics_oracles() -> Outcome {
    let g = |xs: [f64; 4]| xs.to_vec();
    let anova = one_way_anova(&[g([1., 2., 3., 4.]), g([3., 4., 5., 6.]), g([5., 6., 7., 8.])]).map_err(|e| e.to_string())?;
    ensure((anova.f - 9.6).abs() <= STATS_TOL, || format!("F = {}", anova.f))?;
    ensure((anova.partial_eta_sq - 0.6809).abs() <= STATS_TOL, || format!("eta^2 = {}", anova.partial_eta_sq))?;
    let (a, b) = ([1., 2., 3., 4.], [2., 4., 6., 8.]);
    let w = welch_t(&a, &b).map_err(|e| e.to_string())?;
    let d = cohens_d(&a, &b).map_err(|e| e.to_string())?;
    ensure((w.t - -1.7321).abs() <= STATS_TOL, || format!("t = {}", w.t))?;
    ensure((w.df - 4.4118).abs() <= STATS_TOL, || format!("df = {}", w.df))?;
    ensure((d - -1.2247).abs() <= STATS_TOL, || format!("d = {d}"))?;

    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst: f64 = 0.0;
    for _ in 0..RANDOM_DATASETS {
        let n = rng.random_range(3..15);
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(-50.0..50.0)).collect();
        let y: Vec<f64> = (0..n).map(|_| rng.random_range(-50.0..50.0)).collect();
        let f = one_way_anova(&[x.clone(), y.clone()]).map_err(|e| e.to_string())?.f;
        let t = welch_t(&x, &y).map_err(|e| e.to_string())?.t;
        worst = worst.max((f - t * t).abs() / f.max(1.0));
    }
    ensure(worst <= F_EQUALS_T2_REL_TOL, || format!("F vs t^2 relative error {worst:e}"))?;
    let alpha = bonferroni_alpha(0.05, 3);
    ensure((alpha - 0.0167).abs() < 5e-5, || format!("alpha {alpha}"))?;
    Ok(format!(
        "F = {:.4}, eta^2 = {:.4}, t = {:.4}, df = {:.4}, d = {d:.4}; F = t^2 within {worst:.1e}; alpha = {alpha:.4}",
        anova.f, anova.partial_eta_sq, w.t, w.df
    ))
}

/// Brute-force eigensolve of the 2x2 covariance of z-scored columns.
fn eig2(rows: &[Vec<f64>]) -> ([f64; 2], [[f64; 2]; 2]) {
    let n = rows.len() as f64;
    let z: Vec<Vec<f64>> = (0..2)
        .map(|j| {
            let col: Vec<f64> = rows.iter().map(|r| r[j]).collect();
            let m = col.iter().sum::<f64>() / n;
            let sd = (col.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
            col.iter().map(|x| (x - m) / sd).collect()
        })
        .collect();
    let cov = |i: usize, j: usize| z[i].iter().zip(&z[j]).map(|(a, b)| a * b).sum::<f64>() / (n - 1.0);
    let (a, b, c) = (cov(0, 0), cov(0, 1), cov(1, 1));
    let mid = (a + c) / 2.0;
    let rad = (((a - c) / 2.0).powi(2) + b * b).sqrt();
    let l = [mid + rad, mid - rad];
    let vec_for = |lambda: f64| {
        let (x, y) = if b.abs() > 1e-15 { (b, lambda - a) } else if lambda == a { (1.0, 0.0) } else { (0.0, 1.0) };
        let norm = (x * x + y * y).sqrt();
        [x / norm, y / norm]
    };
    (l, [vec_for(l[0]), vec_for(l[1])])
}

fn pca_correctness() -> Outcome {
    let toy = vec![
        vec![2.5, 2.4],
        vec![0.5, 0.7],
        vec![2.2, 2.9],
        vec![1.9, 2.2],
        vec![3.1, 3.0],
        vec![2.3, 2.7],
        vec![2.0, 1.6],
        vec![1.0, 1.1],
        vec![1.5, 1.6],
        vec![1.1, 0.9],
    ];
    let pca = pca_2d(&toy, &["x", "y"]).map_err(|e| e.to_string())?;
    let (lambda, vecs) = eig2(&toy);
    let mut worst: f64 = 0.0;
    for c in 0..2 {
        worst = worst.max((pca.eigenvalues[c] - lambda[c]).abs());
        let got = [pca.loadings[0][c], pca.loadings[1][c]];
        let s = if got[0] * vecs[c][0] + got[1] * vecs[c][1] < 0.0 { -1.0 } else { 1.0 };
        worst = worst.max((got[0] - s * vecs[c][0]).abs()).max((got[1] - s * vecs[c][1]).abs());
    }
    ensure(worst <= PCA_TOL, || format!("toy eigensolve mismatch {worst:e}"))?;

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for i in 0..RANDOM_DATASETS {
        let n = rng.random_range(5..40);
        let rows: Vec<Vec<f64>> = (0..n).map(|_| (0..5).map(|_| rng.random_range(-10.0..10.0)).collect()).collect();
        let p = pca_2d(&rows, &["a", "b", "c", "d", "e"]).map_err(|e| e.to_string())?;
        let [r1, r2] = p.explained_variance_ratio;
        ensure(r1 >= r2 && r2 >= 0.0 && r1 + r2 <= 1.0 + 1e-12, || format!("dataset {i}: ratios {r1}, {r2}"))?;
    }
    Ok(format!("toy eigensolve within {worst:.1e}; ratios ordered and <= 1 on {RANDOM_DATASETS} datasets"))
}

fn cap_semantics() -> Outcome {
    let cfg = LoopConfig::new(Architecture::Rwl, 0);
    let mut bad = ReplayAgent::new(vec![proposal_text(&invalid_107s(), false); 30]);
    let run = run_loop(&cfg, &mut bad, None).map_err(|e| e.to_string())?;
    ensure(!run.succeeded && run.steps.len() == 30 && run.error.is_none(), || {
        format!("invalid-only run: succeeded {}, {} steps, error {:?}", run.succeeded, run.steps.len(), run.error)
    })?;
    let mut good = ReplayAgent::new(vec![proposal_text(&valid_50ah(), false), finalize_text(true)]);
    let run = run_loop(&cfg, &mut good, None).map_err(|e| e.to_string())?;
    ensure(run.succeeded && run.final_step_index == Some(1), || {
        format!("valid+final run: succeeded {}, final {:?}", run.succeeded, run.final_step_index)
    })?;
    Ok("invalid-only replay fails at step 30; valid + finalize succeeds at step 1".into())
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("oracle ceiling", oracle_ceiling),
        ("thermal spot checks", thermal_spot_checks),
        ("validator discrimination", validator_discrimination),
        ("loop determinism", loop_determinism),
        ("simulated system ordering", simulated_ordering),
        ("statistics oracles", statistics_oracles),
        ("PCA correctness", pca_correctness),
        ("step cap semantics", cap_semantics),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (name, check) in criteria {
        let outcome = panic::catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match outcome {
            Ok(detail) => println!("[PASS] {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("[FAIL] {name}: {why}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
