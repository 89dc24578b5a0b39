use serde::{Deserialize, Serialize};

use super::EvaluationReport;
use crate::domain::{min_clearance, PackDesign, ProblemSpec};

const CLEARANCE_TOLERANCE_MM: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConstraintKind {
    Voltage,
    Capacity,
    Thermal,
    Current,
}

impl ConstraintKind {
    pub const ALL: [ConstraintKind; 4] = [
        ConstraintKind::Voltage,
        ConstraintKind::Capacity,
        ConstraintKind::Thermal,
        ConstraintKind::Current,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ConstraintKind::Voltage => "voltage",
            ConstraintKind::Capacity => "capacity",
            ConstraintKind::Thermal => "thermal",
            ConstraintKind::Current => "current",
        }
    }

    pub fn unit(self) -> &'static str {
        match self {
            ConstraintKind::Voltage => "V",
            ConstraintKind::Capacity => "Ah",
            ConstraintKind::Thermal => "C",
            ConstraintKind::Current => "A",
        }
    }

    /// `true` when the measured value must stay at or below the limit.
    pub fn is_upper_bound(self) -> bool {
        matches!(self, ConstraintKind::Thermal)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstraintResult {
    pub name: ConstraintKind,
    pub passed: bool,
    pub measured: f64,
    pub limit: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    Width,
    Depth,
    Height,
}

impl Axis {
    pub fn name(self) -> &'static str {
        match self {
            Axis::Width => "width",
            Axis::Depth => "depth",
            Axis::Height => "height",
        }
    }
}

/// A reason a design is physically invalid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "issue", rename_all = "snake_case")]
pub enum PhysicalIssue {
    InsufficientClearance { measured_mm: f64, required_mm: f64 },
    SpacingBelowMinimum { declared_mm: f64, min_mm: f64 },
    ExceedsEnvelope { axis: Axis, measured_mm: f64, limit_mm: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub physically_valid: bool,
    pub connections_feasible: bool,
    pub constraint_results: Vec<ConstraintResult>,
    pub overall_valid: bool,
    pub physical_issues: Vec<PhysicalIssue>,
    /// `None` when no two cells overlap vertically.
    pub min_clearance_mm: Option<f64>,
}

impl ValidationReport {
    pub fn failed_constraints(&self) -> impl Iterator<Item = ConstraintKind> + '_ {
        self.constraint_results.iter().filter(|c| !c.passed).map(|c| c.name)
    }

    pub fn constraint(&self, kind: ConstraintKind) -> Option<&ConstraintResult> {
        self.constraint_results.iter().find(|c| c.name == kind)
    }

    /// Short names of everything that failed, in report order.
    pub fn violations(&self) -> Vec<String> {
        let mut out: Vec<String> = self
            .physical_issues
            .iter()
            .map(|issue| match issue {
                PhysicalIssue::InsufficientClearance { .. } => "clearance".to_string(),
                PhysicalIssue::SpacingBelowMinimum { .. } => "spacing".to_string(),
                PhysicalIssue::ExceedsEnvelope { axis, .. } => format!("envelope_{}", axis.name()),
            })
            .collect();
        if !self.connections_feasible {
            out.push("connections".to_string());
        }
        out.extend(self.failed_constraints().map(|k| k.name().to_string()));
        out
    }
}

/// Checks physical validity, connection feasibility and the four design constraints.
///
/// Failures are reported, never raised.
pub fn validate(design: &PackDesign, report: &EvaluationReport, problem: &ProblemSpec) -> ValidationReport {
    let mut physical_issues = Vec::new();

    let clearance = min_clearance(design, &problem.cell);
    let required = problem.cell.diameter_mm + problem.min_spacing_mm.max(design.cell_spacing_mm);
    if clearance < required - CLEARANCE_TOLERANCE_MM {
        physical_issues.push(PhysicalIssue::InsufficientClearance {
            measured_mm: clearance,
            required_mm: required,
        });
    }
    if design.cell_spacing_mm < problem.min_spacing_mm {
        physical_issues.push(PhysicalIssue::SpacingBelowMinimum {
            declared_mm: design.cell_spacing_mm,
            min_mm: problem.min_spacing_mm,
        });
    }
    let env = &problem.envelope_mm;
    for (axis, measured_mm, limit_mm) in [
        (Axis::Width, report.bounding_w_mm, env.width_mm),
        (Axis::Depth, report.bounding_d_mm, env.depth_mm),
        (Axis::Height, report.bounding_h_mm, env.height_mm),
    ] {
        if measured_mm > limit_mm {
            physical_issues.push(PhysicalIssue::ExceedsEnvelope {
                axis,
                measured_mm,
                limit_mm,
            });
        }
    }

    let connections_feasible = design.claimed_cells() == design.total_cells() as u64;

    let constraint_results = ConstraintKind::ALL
        .into_iter()
        .map(|name| {
            let (measured, limit) = match name {
                ConstraintKind::Voltage => (report.pack_voltage_v, problem.min_pack_voltage_v()),
                ConstraintKind::Capacity => (report.pack_capacity_ah, problem.min_capacity_ah),
                ConstraintKind::Thermal => (report.temp_at_draw_c, problem.max_cell_temp_c),
                ConstraintKind::Current => (report.max_continuous_current_a, problem.required_current_a),
            };
            let passed = if name.is_upper_bound() {
                measured <= limit
            } else {
                measured >= limit
            };
            ConstraintResult {
                name,
                passed,
                measured,
                limit,
            }
        })
        .collect::<Vec<_>>();

    let physically_valid = physical_issues.is_empty();
    let overall_valid =
        physically_valid && connections_feasible && constraint_results.iter().all(|c| c.passed);

    ValidationReport {
        physically_valid,
        connections_feasible,
        constraint_results,
        overall_valid,
        physical_issues,
        min_clearance_mm: clearance.is_finite().then_some(clearance),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{Envelope, Point3};
    use crate::evaluation::evaluate;
    use crate::evaluation::tests::grid_design;

    fn check(design: &PackDesign, problem: &ProblemSpec) -> ValidationReport {
        let report = evaluate(design, problem).unwrap();
        validate(design, &report, problem)
    }

    #[test]
    fn large_three_layer_design_is_valid() {
        let d = grid_design(49, 56, 3, 8100, 108, 75);
        let v = check(&d, &ProblemSpec::default());
        assert!(v.overall_valid, "{v:?}");
        assert_eq!(v.constraint_results.len(), 4);
    }

    #[test]
    fn series_107_fails_voltage_only() {
        let d = grid_design(49, 56, 3, 107 * 75, 107, 75);
        let v = check(&d, &ProblemSpec::default());
        let volt = v.constraint(ConstraintKind::Voltage).unwrap();
        assert!(!volt.passed);
        assert!((volt.measured - 395.9).abs() < 1e-9);
        assert!((volt.limit - 396.0).abs() < 1e-9);
        assert_eq!(v.violations(), vec!["voltage"]);
    }

    #[test]
    fn close_cells_are_physically_invalid() {
        let d = PackDesign {
            cell_locations: vec![Point3::new(9.0, 9.0, 0.0), Point3::new(28.0, 9.0, 0.0)],
            n_series: 1,
            n_parallel: 2,
            cell_spacing_mm: 2.0,
        };
        let v = check(&d, &ProblemSpec::default());
        assert!(!v.physically_valid);
        assert!(v.connections_feasible);
        assert_eq!(v.min_clearance_mm, Some(19.0));
        assert!(matches!(
            v.physical_issues[0],
            PhysicalIssue::InsufficientClearance { measured_mm, required_mm } if measured_mm == 19.0 && required_mm == 20.0
        ));
    }

    #[test]
    fn declared_spacing_must_be_honoured() {
        // 20 mm pitch satisfies 2 mm spacing but not a declared 5 mm.
        let mut d = grid_design(3, 1, 1, 3, 1, 3);
        d.cell_spacing_mm = 5.0;
        assert!(!check(&d, &ProblemSpec::default()).physically_valid);
    }

    #[test]
    fn declared_spacing_below_minimum() {
        let mut d = grid_design(3, 1, 1, 3, 1, 3);
        d.cell_spacing_mm = 1.0;
        let v = check(&d, &ProblemSpec::default());
        assert_eq!(v.violations()[0], "spacing");
    }

    #[test]
    fn four_layers_exceed_height() {
        let d = grid_design(27, 20, 4, 108 * 20, 108, 20);
        let v = check(&d, &ProblemSpec::default());
        assert!(v.physical_issues.iter().any(|i| matches!(
            i,
            PhysicalIssue::ExceedsEnvelope { axis: Axis::Height, measured_mm, .. } if *measured_mm == 260.0
        )));
        assert!(!v.overall_valid);
    }

    #[test]
    fn connection_count_must_match() {
        let d = grid_design(49, 56, 3, 8000, 108, 75);
        let v = check(&d, &ProblemSpec::default());
        assert!(!v.connections_feasible);
        assert!(v.physically_valid);
        assert!(!v.overall_valid);
    }

    #[test]
    fn shrinking_envelope_never_validates() {
        let d = grid_design(49, 56, 3, 8100, 108, 75);
        let mut p = ProblemSpec::default();
        let mut previous = check(&d, &p).overall_valid;
        for w in (500..=1000).rev().step_by(50) {
            p.envelope_mm = Envelope {
                width_mm: w as f64,
                ..p.envelope_mm
            };
            let now = check(&d, &p).overall_valid;
            assert!(!now || previous);
            previous = now;
        }
        assert!(!previous);
    }
}
