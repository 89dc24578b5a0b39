use std::fmt::Write;

use super::{ConstraintKind, EvaluationReport, PhysicalIssue, ValidationReport};
use crate::templates;

fn constraint_line(kind: ConstraintKind, measured: f64, limit: f64, passed: bool) -> String {
    let cmp = if kind.is_upper_bound() { "<=" } else { ">=" };
    let unit = kind.unit();
    let status = if passed { "PASS" } else { "FAIL" };
    format!("  {:<8} {measured:.2} {unit} (required {cmp} {limit:.2} {unit}) {status}", kind.name())
}

fn failure_lines(validation: &ValidationReport, report: &EvaluationReport) -> String {
    let mut out = String::new();
    for issue in &validation.physical_issues {
        let _ = match issue {
            PhysicalIssue::InsufficientClearance {
                measured_mm,
                required_mm,
            } => writeln!(
                out,
                "FAILED: clearance (cells overlap or are too close: {measured_mm:.2} mm center distance < {required_mm:.2} mm)"
            ),
            PhysicalIssue::SpacingBelowMinimum { declared_mm, min_mm } => writeln!(
                out,
                "FAILED: spacing (declared {declared_mm:.2} mm < minimum {min_mm:.2} mm)"
            ),
            PhysicalIssue::ExceedsEnvelope {
                axis,
                measured_mm,
                limit_mm,
            } => writeln!(
                out,
                "FAILED: envelope {} ({measured_mm:.2} mm > {limit_mm:.2} mm)",
                axis.name()
            ),
        };
    }
    if !validation.connections_feasible {
        let _ = writeln!(
            out,
            "FAILED: connections ({}S x {}P = {} cells claimed, {} cells placed)",
            report.n_series,
            report.n_parallel,
            u64::from(report.n_series) * u64::from(report.n_parallel),
            report.total_cells
        );
    }
    for c in validation.constraint_results.iter().filter(|c| !c.passed) {
        let cmp = if c.name.is_upper_bound() { ">" } else { "<" };
        let unit = c.name.unit();
        let _ = writeln!(
            out,
            "FAILED: {} ({:.2} {unit} {cmp} {:.2} {unit})",
            c.name.name(),
            c.measured,
            c.limit
        );
    }
    out
}

/// Deterministic Design Feedback text for one evaluated design.
pub fn feedback_text(report: &EvaluationReport, validation: &ValidationReport) -> String {
    let verdict = if validation.overall_valid { "VALID" } else { "INVALID" };
    let constraints = validation
        .constraint_results
        .iter()
        .map(|c| constraint_line(c.name, c.measured, c.limit, c.passed))
        .collect::<Vec<_>>()
        .join("\n");
    let clearance = validation
        .min_clearance_mm
        .map_or_else(|| "n/a (no vertically overlapping cells)".to_string(), |c| format!("{c:.2}"));
    let f2 = |x: f64| format!("{x:.2}");

    templates::render(
        "design_feedback",
        templates::DESIGN_FEEDBACK,
        &[
            ("verdict", verdict),
            ("failures", &failure_lines(validation, report)),
            ("constraints", &constraints),
            ("n_series", &report.n_series.to_string()),
            ("n_parallel", &report.n_parallel.to_string()),
            ("total_cells", &report.total_cells.to_string()),
            ("spacing", &f2(report.cell_spacing_mm)),
            ("width", &f2(report.bounding_w_mm)),
            ("depth", &f2(report.bounding_d_mm)),
            ("height", &f2(report.bounding_h_mm)),
            ("volume", &f2(report.volume_l)),
            ("area", &f2(report.surface_area_m2)),
            ("clearance", &clearance),
            ("voltage", &f2(report.pack_voltage_v)),
            ("capacity", &f2(report.pack_capacity_ah)),
            ("current", &f2(report.required_current_a)),
            ("cell_current", &f2(report.per_cell_current_a)),
            ("cell_heat", &format!("{:.4}", report.heat_per_cell_w)),
            ("total_heat", &f2(report.total_heat_w)),
            ("temperature", &f2(report.temp_at_draw_c)),
            ("max_current", &f2(report.max_continuous_current_a)),
        ],
    )
    .expect("design feedback template placeholders are all supplied")
}
