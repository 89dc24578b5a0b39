//! Batch summary: per-system descriptives, ANOVA, pairwise Welch tests, cell
//! counts and the design-space PCA, written as CSV and JSON.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{bonferroni_alpha, cohens_d, describe, one_way_anova, pca_2d, welch_t, AnovaResult, Descriptive};
use crate::engine::{Architecture, RunRecord};
use crate::error::{Error, Result};
use crate::experiment::{BatchManifest, DesignFeatureVector, FEATURE_NAMES};

/// Family-wise significance level before the Bonferroni adjustment.
pub const STAT_ALPHA: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemSummary {
    pub architecture: Architecture,
    pub n_runs: usize,
    pub n_success: usize,
    pub success_rate: f64,
    /// Over successful runs only; `None` when there are none.
    pub stats: Option<Descriptive>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairwiseTest {
    pub system_a: Architecture,
    pub system_b: Architecture,
    pub t: f64,
    pub df: f64,
    pub p: f64,
    pub cohens_d: f64,
    pub alpha: f64,
    pub significant: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaSummary {
    pub n_rows: usize,
    pub features: Vec<String>,
    pub dropped: Vec<String>,
    pub eigenvalues: [f64; 2],
    pub explained_variance_ratio: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatReport {
    pub base_seed: u64,
    pub capacity: Vec<SystemSummary>,
    pub steps: Vec<SystemSummary>,
    pub capacity_anova: Option<AnovaResult>,
    pub steps_anova: Option<AnovaResult>,
    pub bonferroni_alpha: f64,
    pub capacity_pairwise: Vec<PairwiseTest>,
    pub steps_pairwise: Vec<PairwiseTest>,
    pub pca: Option<PcaSummary>,
    /// Analyses that were skipped and why.
    pub notes: Vec<String>,
}

#[derive(Serialize)]
struct SummaryRow {
    system: Architecture,
    n_runs: usize,
    n_success: usize,
    success_rate: f64,
    min: Option<f64>,
    max: Option<f64>,
    mean: Option<f64>,
    std: Option<f64>,
    median: Option<f64>,
}

#[derive(Serialize)]
struct CellCountRow {
    system: Architecture,
    run_index: usize,
    step_index: usize,
    n_series: u32,
    n_parallel: u32,
    total_cells: usize,
    valid: bool,
    is_final: bool,
}

#[derive(Serialize)]
struct ScoreRow {
    system: Architecture,
    run_index: usize,
    step_index: usize,
    is_final: bool,
    pc1: f64,
    pc2: f64,
}

#[derive(Serialize)]
struct LoadingRow<'a> {
    feature: &'a str,
    pc1: f64,
    pc2: f64,
}

#[derive(Serialize)]
struct VarianceRow {
    component: &'static str,
    eigenvalue: f64,
    explained_variance_ratio: f64,
}

fn per_system(
    systems: &[Architecture],
    runs: &[RunRecord],
    metric: impl Fn(&RunRecord) -> Option<f64>,
) -> (Vec<SystemSummary>, Vec<(Architecture, Vec<f64>)>) {
    let mut summaries = Vec::new();
    let mut groups = Vec::new();
    for &arch in systems {
        let mine: Vec<&RunRecord> = runs.iter().filter(|r| r.architecture == arch).collect();
        let values: Vec<f64> = mine.iter().filter(|r| r.succeeded).filter_map(|r| metric(r)).collect();
        let n_success = mine.iter().filter(|r| r.succeeded).count();
        summaries.push(SystemSummary {
            architecture: arch,
            n_runs: mine.len(),
            n_success,
            success_rate: if mine.is_empty() { 0.0 } else { n_success as f64 / mine.len() as f64 },
            stats: describe(&values),
        });
        groups.push((arch, values));
    }
    (summaries, groups)
}

fn comparisons(
    label: &str,
    groups: &[(Architecture, Vec<f64>)],
    alpha: f64,
    notes: &mut Vec<String>,
) -> (Option<AnovaResult>, Vec<PairwiseTest>) {
    let usable: Vec<&(Architecture, Vec<f64>)> = groups.iter().filter(|(_, v)| v.len() >= 2).collect();
    let anova = if usable.len() >= 2 {
        let data: Vec<Vec<f64>> = usable.iter().map(|(_, v)| v.clone()).collect();
        match one_way_anova(&data) {
            Ok(a) => Some(a),
            Err(e) => {
                notes.push(format!("{label} ANOVA skipped: {e}"));
                None
            }
        }
    } else {
        notes.push(format!("{label} ANOVA skipped: fewer than 2 systems with 2+ successful runs"));
        None
    };

    let mut pairs = Vec::new();
    for (i, (a, va)) in groups.iter().enumerate() {
        for (b, vb) in &groups[i + 1..] {
            let test = welch_t(va, vb).and_then(|w| Ok((w, cohens_d(va, vb)?)));
            match test {
                Ok((w, d)) => pairs.push(PairwiseTest {
                    system_a: *a,
                    system_b: *b,
                    t: w.t,
                    df: w.df,
                    p: w.p,
                    cohens_d: d,
                    alpha,
                    significant: w.p < alpha,
                }),
                Err(e) => notes.push(format!("{label} {a} vs {b} skipped: {e}")),
            }
        }
    }
    (anova, pairs)
}

fn write_csv<T: Serialize>(path: &Path, rows: impl IntoIterator<Item = T>) -> Result<()> {
    let csv_err = |e: csv::Error| Error::Config(format!("{}: {e}", path.display()));
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    for r in rows {
        w.serialize(r).map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn summary_rows(s: &[SystemSummary]) -> impl Iterator<Item = SummaryRow> + '_ {
    s.iter().map(|s| SummaryRow {
        system: s.architecture,
        n_runs: s.n_runs,
        n_success: s.n_success,
        success_rate: s.success_rate,
        min: s.stats.map(|d| d.min),
        max: s.stats.map(|d| d.max),
        mean: s.stats.map(|d| d.mean),
        std: s.stats.map(|d| d.std),
        median: s.stats.map(|d| d.median),
    })
}

/// Summarizes a batch directory and writes the report files into `out_dir`.
///
/// Failed runs count toward success rates only; capacity and step statistics
/// use successful runs.
pub fn summarize(batch_dir: &Path, out_dir: &Path) -> Result<StatReport> {
    let manifest = BatchManifest::read(batch_dir)?;
    if manifest.runs.is_empty() {
        return Err(Error::EmptyBatch);
    }
    let runs = manifest.load_runs(batch_dir)?;
    let systems = &manifest.systems;
    let n_pairs = systems.len() * systems.len().saturating_sub(1) / 2;
    let alpha = bonferroni_alpha(STAT_ALPHA, n_pairs);
    let mut notes = Vec::new();

    let (capacity, cap_groups) = per_system(systems, &runs, RunRecord::final_capacity_ah);
    let (steps, step_groups) = per_system(systems, &runs, |r| r.final_step_index.map(|k| k as f64));
    let (capacity_anova, capacity_pairwise) = comparisons("capacity", &cap_groups, alpha, &mut notes);
    let (steps_anova, steps_pairwise) = comparisons("steps", &step_groups, alpha, &mut notes);

    let cell = &manifest.problem.cell;
    let mut keys = Vec::new();
    let mut feature_rows = Vec::new();
    let mut cell_counts = Vec::new();
    for run in &runs {
        for step in &run.steps {
            let is_final = run.final_step_index == Some(step.step_index);
            if let Some(d) = &step.design {
                cell_counts.push(CellCountRow {
                    system: run.architecture,
                    run_index: run.run_index,
                    step_index: step.step_index,
                    n_series: d.n_series,
                    n_parallel: d.n_parallel,
                    total_cells: d.total_cells(),
                    valid: step.is_valid(),
                    is_final,
                });
            }
            if let Some(f) = DesignFeatureVector::from_step(step, cell) {
                keys.push((run.architecture, run.run_index, step.step_index, is_final));
                feature_rows.push(f.values());
            }
        }
    }

    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let pca = match pca_2d(&feature_rows, &FEATURE_NAMES) {
        Ok(p) => {
            write_csv(
                &out_dir.join("pca_scores.csv"),
                keys.iter().zip(&p.scores).map(|(&(system, run_index, step_index, is_final), s)| ScoreRow {
                    system,
                    run_index,
                    step_index,
                    is_final,
                    pc1: s[0],
                    pc2: s[1],
                }),
            )?;
            write_csv(
                &out_dir.join("pca_loadings.csv"),
                p.features.iter().zip(&p.loadings).map(|(f, l)| LoadingRow {
                    feature: f,
                    pc1: l[0],
                    pc2: l[1],
                }),
            )?;
            write_csv(
                &out_dir.join("pca_variance.csv"),
                ["pc1", "pc2"].iter().enumerate().map(|(i, c)| VarianceRow {
                    component: c,
                    eigenvalue: p.eigenvalues[i],
                    explained_variance_ratio: p.explained_variance_ratio[i],
                }),
            )?;
            Some(PcaSummary {
                n_rows: feature_rows.len(),
                features: p.features,
                dropped: p.dropped,
                eigenvalues: p.eigenvalues,
                explained_variance_ratio: p.explained_variance_ratio,
            })
        }
        Err(e) => {
            notes.push(format!("PCA skipped: {e}"));
            None
        }
    };

    let report = StatReport {
        base_seed: manifest.base_seed,
        capacity,
        steps,
        capacity_anova,
        steps_anova,
        bonferroni_alpha: alpha,
        capacity_pairwise,
        steps_pairwise,
        pca,
        notes,
    };
    write_csv(&out_dir.join("capacity_summary.csv"), summary_rows(&report.capacity))?;
    write_csv(&out_dir.join("steps_summary.csv"), summary_rows(&report.steps))?;
    write_csv(&out_dir.join("capacity_pairwise.csv"), &report.capacity_pairwise)?;
    write_csv(&out_dir.join("steps_pairwise.csv"), &report.steps_pairwise)?;
    write_csv(&out_dir.join("cell_counts.csv"), cell_counts)?;
    let path = out_dir.join("stat_report.json");
    let text = serde_json::to_string_pretty(&report).map_err(|e| Error::json("stat report", e))?;
    fs::write(&path, text + "\n").map_err(|e| Error::io(&path, e))?;
    Ok(report)
}
