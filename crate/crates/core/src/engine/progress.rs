//! The Progress Analyzer: a deterministic digest of the design history.
//!
//! It only presents data. Judging whether progress is improving, stalling or
//! regressing is left to the agents reading the table.

use std::fmt::Write;

use serde::{Deserialize, Serialize};

use super::StepRecord;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRow {
    pub step_index: usize,
    pub valid: bool,
    pub capacity_ah: Option<f64>,
    pub temp_c: Option<f64>,
    pub voltage_v: Option<f64>,
    /// Outer `(width, depth, height)` in millimetres.
    pub dims_mm: Option<[f64; 3]>,
    pub violations: Vec<String>,
    pub delta_capacity_ah: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySummary {
    pub rows: Vec<TrajectoryRow>,
    pub best_valid_capacity_ah: Option<f64>,
    pub steps_since_improvement: usize,
}

pub fn analyze_progress(history: &[StepRecord]) -> Result<TrajectorySummary> {
    if history.is_empty() {
        return Err(Error::EmptyHistory);
    }
    let mut rows: Vec<TrajectoryRow> = Vec::with_capacity(history.len());
    let mut best: Option<f64> = None;
    let mut last_improvement: Option<usize> = None;

    for (i, step) in history.iter().enumerate() {
        let capacity = step.capacity_ah();
        let delta = match (i.checked_sub(1).and_then(|p| rows[p].capacity_ah), capacity) {
            (Some(prev), Some(cur)) => Some(cur - prev),
            _ => None,
        };
        let violations = match (&step.validation, &step.parse_error) {
            (Some(v), _) => v.violations(),
            (None, Some(_)) => vec!["malformed_proposal".to_string()],
            (None, None) => vec!["not_evaluated".to_string()],
        };
        let valid = step.is_valid();
        if valid {
            if let Some(c) = capacity {
                if best.is_none_or(|b| c > b) {
                    best = Some(c);
                    last_improvement = Some(i);
                }
            }
        }
        rows.push(TrajectoryRow {
            step_index: step.step_index,
            valid,
            capacity_ah: capacity,
            temp_c: step.evaluation.as_ref().map(|e| e.temp_at_draw_c),
            voltage_v: step.evaluation.as_ref().map(|e| e.pack_voltage_v),
            dims_mm: step
                .evaluation
                .as_ref()
                .map(|e| [e.bounding_w_mm, e.bounding_d_mm, e.bounding_h_mm]),
            violations,
            delta_capacity_ah: delta,
        });
    }

    let steps_since_improvement = match last_improvement {
        Some(i) => history.len() - 1 - i,
        None => history.len(),
    };
    Ok(TrajectorySummary {
        rows,
        best_valid_capacity_ah: best,
        steps_since_improvement,
    })
}

fn opt(v: Option<f64>, signed: bool) -> String {
    match (v, signed) {
        (Some(x), true) => format!("{x:+.2}"),
        (Some(x), false) => format!("{x:.2}"),
        (None, _) => "-".to_string(),
    }
}

/// Fixed-width table for embedding in prompts.
pub fn render_trajectory(summary: &TrajectorySummary) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:>4} | {:<5} | {:>11} | {:>13} | {:>8} | {:>9} | {:<25} | {}",
        "step", "valid", "capacity_Ah", "d_capacity_Ah", "temp_C", "voltage_V", "W x D x H (mm)", "violations"
    );
    for row in &summary.rows {
        let dims = row
            .dims_mm
            .map_or_else(|| "-".to_string(), |[w, d, h]| format!("{w:.2} x {d:.2} x {h:.2}"));
        let violations = if row.violations.is_empty() {
            "none".to_string()
        } else {
            row.violations.join(", ")
        };
        let _ = writeln!(
            out,
            "{:>4} | {:<5} | {:>11} | {:>13} | {:>8} | {:>9} | {:<25} | {}",
            row.step_index,
            if row.valid { "yes" } else { "no" },
            opt(row.capacity_ah, false),
            opt(row.delta_capacity_ah, true),
            opt(row.temp_c, false),
            opt(row.voltage_v, false),
            dims,
            violations
        );
    }
    match summary.best_valid_capacity_ah {
        Some(best) => {
            let _ = write!(
                out,
                "Best valid capacity: {best:.2} Ah; steps since last improvement: {}",
                summary.steps_since_improvement
            );
        }
        None => {
            let _ = write!(
                out,
                "Best valid capacity: no valid design yet; steps without a valid design: {}",
                summary.steps_since_improvement
            );
        }
    }
    out
}
