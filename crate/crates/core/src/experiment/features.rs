use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::domain::CellSpec;
use crate::engine::StepRecord;

/// Coordinates closer than this are treated as the same grid line.
const CLUSTER_TOL_MM: f64 = 1.0;

pub const FEATURE_NAMES: [&str; 8] = [
    "total_cells",
    "n_series",
    "n_parallel",
    "spacing_mm",
    "cells_along_width",
    "cells_along_depth",
    "layer_count",
    "capacity_ah",
];

/// Descriptive features of one proposed design.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DesignFeatureVector {
    pub total_cells: usize,
    pub n_series: u32,
    pub n_parallel: u32,
    pub spacing_mm: f64,
    pub cells_along_width: usize,
    pub cells_along_depth: usize,
    pub layer_count: usize,
    pub capacity_ah: f64,
}

/// Number of clusters after sorting, splitting wherever consecutive values
/// differ by more than the tolerance.
fn clusters(mut values: Vec<f64>) -> usize {
    if values.is_empty() {
        return 0;
    }
    values.sort_by(f64::total_cmp);
    1 + values.windows(2).filter(|w| w[1] - w[0] > CLUSTER_TOL_MM).count()
}

impl DesignFeatureVector {
    /// `None` for steps whose proposal did not parse.
    pub fn from_step(step: &StepRecord, cell: &CellSpec) -> Option<Self> {
        let d = step.design.as_ref()?;
        let pts = &d.cell_locations;
        let layers: BTreeSet<i64> = pts.iter().map(|p| (p.z / cell.height_mm).floor() as i64).collect();
        let capacity_ah = step
            .capacity_ah()
            .unwrap_or(f64::from(d.n_parallel) * cell.nominal_capacity_ah);
        Some(Self {
            total_cells: pts.len(),
            n_series: d.n_series,
            n_parallel: d.n_parallel,
            spacing_mm: d.cell_spacing_mm,
            cells_along_width: clusters(pts.iter().map(|p| p.x).collect()),
            cells_along_depth: clusters(pts.iter().map(|p| p.y).collect()),
            layer_count: layers.len(),
            capacity_ah,
        })
    }

    /// Values in [`FEATURE_NAMES`] order.
    pub fn values(&self) -> Vec<f64> {
        vec![
            self.total_cells as f64,
            f64::from(self.n_series),
            f64::from(self.n_parallel),
            self.spacing_mm,
            self.cells_along_width as f64,
            self.cells_along_depth as f64,
            self.layer_count as f64,
            self.capacity_ah,
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{hex_grid, PackDesign};

    #[test]
    fn hex_grid_features() {
        let cell = CellSpec::default();
        let design = PackDesign {
            cell_locations: hex_grid(5, 4, 2, 2.0, &cell),
            n_series: 4,
            n_parallel: 10,
            cell_spacing_mm: 2.0,
        };
        let step = StepRecord {
            step_index: 1,
            design: Some(design),
            evaluation: None,
            validation: None,
            design_feedback_text: String::new(),
            metacognitive_feedback_text: None,
            agent_rationale: String::new(),
            finalize_decision: None,
            agent_output: String::new(),
            finalize_output: None,
            parse_error: None,
        };
        let f = DesignFeatureVector::from_step(&step, &cell).unwrap();
        // Odd rows are offset by half a pitch, so x takes 10 distinct values.
        assert_eq!(f.cells_along_width, 10);
        assert_eq!(f.cells_along_depth, 4);
        assert_eq!(f.layer_count, 2);
        assert_eq!(f.total_cells, 40);
        assert_eq!(f.capacity_ah, 25.0);
        assert_eq!(f.values().len(), FEATURE_NAMES.len());
    }

    #[test]
    fn cluster_tolerance() {
        assert_eq!(clusters(vec![0.0, 0.5, 0.9, 5.0]), 2);
        assert_eq!(clusters(vec![]), 0);
    }
}
