//! Problem constants, design payloads and packing geometry.

mod geometry;
mod proposal;

pub use geometry::{bounding_box, hex_grid, min_clearance, BoundingBox};
pub use proposal::{
    parse_design_file, parse_design_proposal, parse_finalize_decision, proposal_json, render_proposal,
    FinalizeDecision, Proposal,
    ProposalDocument,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Cylindrical cell constants (18650 by default).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CellSpec {
    pub diameter_mm: f64,
    pub height_mm: f64,
    pub nominal_voltage_v: f64,
    pub nominal_capacity_ah: f64,
    pub internal_resistance_ohm: f64,
}

impl Default for CellSpec {
    fn default() -> Self {
        Self {
            diameter_mm: 18.0,
            height_mm: 65.0,
            nominal_voltage_v: 3.7,
            nominal_capacity_ah: 2.5,
            internal_resistance_ohm: 0.05,
        }
    }
}

impl CellSpec {
    pub fn radius_mm(&self) -> f64 {
        self.diameter_mm / 2.0
    }

    pub fn check(&self) -> Result<()> {
        let fields = [
            ("diameter_mm", self.diameter_mm),
            ("height_mm", self.height_mm),
            ("nominal_voltage_v", self.nominal_voltage_v),
            ("nominal_capacity_ah", self.nominal_capacity_ah),
            ("internal_resistance_ohm", self.internal_resistance_ohm),
        ];
        for (name, value) in fields {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::Config(format!("cell.{name} must be positive, got {value}")));
            }
        }
        Ok(())
    }
}

/// Outer pack envelope in millimetres.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Envelope {
    pub width_mm: f64,
    pub depth_mm: f64,
    pub height_mm: f64,
}

/// The design brief: envelope, targets and physics constants.
///
/// Every physics parameter used by the evaluator and validator comes from here.
/// Deserialization fills missing keys from the defaults, so a config file only
/// needs to list the values it overrides.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProblemSpec {
    pub envelope_mm: Envelope,
    pub target_voltage_v: f64,
    /// Allowed fractional shortfall below the target voltage.
    pub voltage_tolerance_frac: f64,
    pub min_capacity_ah: f64,
    pub required_current_a: f64,
    pub max_cell_temp_c: f64,
    pub ambient_temp_c: f64,
    pub min_spacing_mm: f64,
    /// Convective film coefficient applied to the outer bounding-box area.
    pub heat_transfer_w_per_m2k: f64,
    pub max_design_steps: usize,
    pub cell: CellSpec,
}

impl Default for ProblemSpec {
    fn default() -> Self {
        Self {
            envelope_mm: Envelope {
                width_mm: 1000.0,
                depth_mm: 1000.0,
                height_mm: 250.0,
            },
            target_voltage_v: 400.0,
            voltage_tolerance_frac: 0.01,
            min_capacity_ah: 50.0,
            required_current_a: 48.0,
            max_cell_temp_c: 60.0,
            ambient_temp_c: 20.0,
            min_spacing_mm: 2.0,
            heat_transfer_w_per_m2k: 10.0,
            max_design_steps: 30,
            cell: CellSpec::default(),
        }
    }
}

impl ProblemSpec {
    pub fn check(&self) -> Result<()> {
        self.cell.check()?;
        let positive = [
            ("envelope_mm.width_mm", self.envelope_mm.width_mm),
            ("envelope_mm.depth_mm", self.envelope_mm.depth_mm),
            ("envelope_mm.height_mm", self.envelope_mm.height_mm),
            ("target_voltage_v", self.target_voltage_v),
            ("min_capacity_ah", self.min_capacity_ah),
            ("required_current_a", self.required_current_a),
            ("heat_transfer_w_per_m2k", self.heat_transfer_w_per_m2k),
        ];
        for (name, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::Config(format!("{name} must be positive, got {value}")));
            }
        }
        if !(self.min_spacing_mm >= 0.0) {
            return Err(Error::Config("min_spacing_mm must be non-negative".into()));
        }
        if !(0.0..1.0).contains(&self.voltage_tolerance_frac) {
            return Err(Error::Config("voltage_tolerance_frac must lie in [0, 1)".into()));
        }
        if !(self.ambient_temp_c < self.max_cell_temp_c) {
            return Err(Error::Config(
                "ambient_temp_c must be below max_cell_temp_c".into(),
            ));
        }
        if self.max_design_steps == 0 {
            return Err(Error::Config("max_design_steps must be at least 1".into()));
        }
        Ok(())
    }

    /// Lowest pack voltage accepted by the voltage constraint.
    pub fn min_pack_voltage_v(&self) -> f64 {
        self.target_voltage_v * (1.0 - self.voltage_tolerance_frac)
    }

    /// Smallest series count whose nominal voltage meets the voltage constraint.
    pub fn min_series(&self) -> u32 {
        let n = (self.min_pack_voltage_v() / self.cell.nominal_voltage_v).ceil() as u32;
        n.max(1)
    }
}

/// A cell center: `(x, y)` is the cylinder axis, `z` the cell base elevation. Millimetres.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 3]", into = "[f64; 3]")]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }
}

impl From<[f64; 3]> for Point3 {
    fn from([x, y, z]: [f64; 3]) -> Self {
        Self { x, y, z }
    }
}

impl From<Point3> for [f64; 3] {
    fn from(p: Point3) -> Self {
        [p.x, p.y, p.z]
    }
}

/// The design-action payload produced by a design agent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PackDesign {
    pub cell_locations: Vec<Point3>,
    pub n_series: u32,
    pub n_parallel: u32,
    pub cell_spacing_mm: f64,
}

impl PackDesign {
    pub fn total_cells(&self) -> usize {
        self.cell_locations.len()
    }

    /// Cells implied by the claimed connections.
    pub fn claimed_cells(&self) -> u64 {
        u64::from(self.n_series) * u64::from(self.n_parallel)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_design_brief() {
        let p = ProblemSpec::default();
        assert_eq!(p.cell.diameter_mm, 18.0);
        assert_eq!(p.cell.height_mm, 65.0);
        assert_eq!(p.cell.nominal_voltage_v, 3.7);
        assert_eq!(p.cell.nominal_capacity_ah, 2.5);
        assert_eq!(p.cell.internal_resistance_ohm, 0.05);
        assert_eq!(p.min_capacity_ah, 50.0);
        assert_eq!(p.required_current_a, 48.0);
        assert_eq!(p.max_cell_temp_c, 60.0);
        assert_eq!(p.ambient_temp_c, 20.0);
        assert_eq!(p.min_spacing_mm, 2.0);
        assert_eq!(p.max_design_steps, 30);
        p.check().unwrap();
    }

    #[test]
    fn min_series_admits_108() {
        let p = ProblemSpec::default();
        assert_eq!(p.min_series(), 108);
        assert!((p.min_pack_voltage_v() - 396.0).abs() < 1e-12);
    }

    #[test]
    fn partial_override_keeps_defaults() {
        let p: ProblemSpec = serde_json::from_str(r#"{"min_capacity_ah": 80}"#).unwrap();
        assert_eq!(p.min_capacity_ah, 80.0);
        assert_eq!(p.required_current_a, 48.0);
        assert!(serde_json::from_str::<ProblemSpec>(r#"{"bogus": 1}"#).is_err());
    }

    #[test]
    fn check_rejects_inverted_temperatures() {
        let p = ProblemSpec {
            ambient_temp_c: 70.0,
            ..ProblemSpec::default()
        };
        assert!(p.check().is_err());
    }

    #[test]
    fn point_serializes_as_triplet() {
        let s = serde_json::to_string(&Point3::new(9.0, 9.0, 0.0)).unwrap();
        assert_eq!(s, "[9.0,9.0,0.0]");
    }
}
