//! Numerical evaluator and validator.
//!
//! All lengths enter in millimetres; the thermal model works in SI.

mod feedback;
mod validate;

pub use feedback::feedback_text;
pub use validate::{validate, Axis, ConstraintKind, ConstraintResult, PhysicalIssue, ValidationReport};

use serde::{Deserialize, Serialize};

use crate::domain::{bounding_box, PackDesign, ProblemSpec};
use crate::error::{Error, Result};

/// Lumped passive-cooling model: heat leaves through the pack's outer surface.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermalModel {
    pub heat_transfer_w_per_m2k: f64,
    pub ambient_temp_c: f64,
}

impl ThermalModel {
    pub fn new(heat_transfer_w_per_m2k: f64, ambient_temp_c: f64) -> Self {
        assert!(heat_transfer_w_per_m2k > 0.0, "heat transfer coefficient must be positive");
        Self {
            heat_transfer_w_per_m2k,
            ambient_temp_c,
        }
    }

    pub fn from_problem(problem: &ProblemSpec) -> Self {
        Self::new(problem.heat_transfer_w_per_m2k, problem.ambient_temp_c)
    }

    /// Joule heat in one cell carrying `cell_current_a`.
    pub fn cell_heat_w(cell_current_a: f64, resistance_ohm: f64) -> f64 {
        cell_current_a * cell_current_a * resistance_ohm
    }

    /// Steady temperature for `total_heat_w` leaving through `area_m2`.
    pub fn steady_temp_c(&self, total_heat_w: f64, area_m2: f64) -> f64 {
        self.ambient_temp_c + total_heat_w / (self.heat_transfer_w_per_m2k * area_m2)
    }

    /// Pack current at which the steady temperature reaches `limit_c`.
    pub fn max_current_a(
        &self,
        limit_c: f64,
        area_m2: f64,
        total_cells: usize,
        n_parallel: u32,
        resistance_ohm: f64,
    ) -> f64 {
        let headroom = (limit_c - self.ambient_temp_c).max(0.0);
        let per_cell = (headroom * self.heat_transfer_w_per_m2k * area_m2
            / (total_cells as f64 * resistance_ohm))
            .sqrt();
        f64::from(n_parallel) * per_cell
    }
}

/// Mechanical, electrical and thermal metrics of one design.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub bounding_w_mm: f64,
    pub bounding_d_mm: f64,
    pub bounding_h_mm: f64,
    pub volume_l: f64,
    pub surface_area_m2: f64,
    pub pack_voltage_v: f64,
    pub pack_capacity_ah: f64,
    pub required_current_a: f64,
    pub per_cell_current_a: f64,
    pub heat_per_cell_w: f64,
    pub total_heat_w: f64,
    pub temp_at_draw_c: f64,
    pub max_continuous_current_a: f64,
    pub total_cells: usize,
    pub n_series: u32,
    pub n_parallel: u32,
    pub cell_spacing_mm: f64,
}

pub fn evaluate(design: &PackDesign, problem: &ProblemSpec) -> Result<EvaluationReport> {
    if design.n_parallel == 0 || design.n_series == 0 {
        return Err(Error::DegenerateInput("connections must be at least 1S1P".into()));
    }
    let cell = &problem.cell;
    let bbox = bounding_box(design, cell)?;
    let thermal = ThermalModel::from_problem(problem);

    let total_cells = design.total_cells();
    let per_cell_current_a = problem.required_current_a / f64::from(design.n_parallel);
    let heat_per_cell_w = ThermalModel::cell_heat_w(per_cell_current_a, cell.internal_resistance_ohm);
    let total_heat_w = total_cells as f64 * heat_per_cell_w;
    let surface_area_m2 = bbox.surface_area_mm2() * 1e-6;

    Ok(EvaluationReport {
        bounding_w_mm: bbox.width_mm,
        bounding_d_mm: bbox.depth_mm,
        bounding_h_mm: bbox.height_mm,
        volume_l: bbox.volume_mm3() * 1e-6,
        surface_area_m2,
        pack_voltage_v: f64::from(design.n_series) * cell.nominal_voltage_v,
        pack_capacity_ah: f64::from(design.n_parallel) * cell.nominal_capacity_ah,
        required_current_a: problem.required_current_a,
        per_cell_current_a,
        heat_per_cell_w,
        total_heat_w,
        temp_at_draw_c: thermal.steady_temp_c(total_heat_w, surface_area_m2),
        max_continuous_current_a: thermal.max_current_a(
            problem.max_cell_temp_c,
            surface_area_m2,
            total_cells,
            design.n_parallel,
            cell.internal_resistance_ohm,
        ),
        total_cells,
        n_series: design.n_series,
        n_parallel: design.n_parallel,
        cell_spacing_mm: design.cell_spacing_mm,
    })
}
