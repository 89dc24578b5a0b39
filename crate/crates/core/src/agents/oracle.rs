use serde::{Deserialize, Serialize};

use crate::domain::{hex_grid, PackDesign, ProblemSpec};
use crate::error::{Error, Result};
use crate::evaluation::{evaluate, validate};

/// Best uniform hex-grid design found by exhaustive search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleDesign {
    pub design: PackDesign,
    pub capacity_ah: f64,
    pub cols: usize,
    pub rows: usize,
    pub layers: usize,
    pub spacing_mm: f64,
}

/// Search bounds on the grid shape.
const MAX_COLS: usize = 60;
const MAX_ROWS: usize = 70;
const MAX_LAYERS: usize = 3;

/// Maximum-capacity valid design among uniform hex grids.
///
/// Enumerates every `cols x rows x layers` grid at the minimum spacing that
/// fits the envelope, keeps the minimum series count and as many parallel
/// strings as the grid holds, then validates candidates in order of
/// decreasing capacity until one passes.
pub fn oracle_best_design(problem: &ProblemSpec) -> Result<OracleDesign> {
    problem.check()?;
    let cell = &problem.cell;
    let env = &problem.envelope_mm;
    let n_series = problem.min_series();
    let max_layers = ((env.height_mm / cell.height_mm).floor() as usize).min(MAX_LAYERS);
    let spacing = problem.min_spacing_mm;
    let pitch = cell.diameter_mm + spacing;
    let row_step = pitch * 3f64.sqrt() / 2.0;
    if env.width_mm < cell.diameter_mm || env.depth_mm < cell.diameter_mm {
        return Err(Error::DegenerateInput("envelope smaller than one cell".into()));
    }
    let max_cols = (((env.width_mm - cell.diameter_mm) / pitch).floor() as usize + 1).min(MAX_COLS);
    let max_rows = (((env.depth_mm - cell.diameter_mm) / row_step).floor() as usize + 1).min(MAX_ROWS);

    struct Candidate {
        n_parallel: u32,
        cells: usize,
        cols: usize,
        rows: usize,
        layers: usize,
    }

    let mut candidates = Vec::new();
    for cols in 1..=max_cols {
        for rows in 1..=max_rows {
            let offset = if rows > 1 { pitch / 2.0 } else { 0.0 };
            let width = (cols - 1) as f64 * pitch + cell.diameter_mm + offset;
            if width > env.width_mm {
                continue;
            }
            for layers in 1..=max_layers {
                let cells = cols * rows * layers;
                let n_parallel = (cells / n_series as usize) as u32;
                if n_parallel == 0 {
                    continue;
                }
                candidates.push(Candidate {
                    n_parallel,
                    cells,
                    cols,
                    rows,
                    layers,
                });
            }
        }
    }
    candidates.sort_by_key(|c| {
        (
            std::cmp::Reverse(c.n_parallel),
            c.cells,
            c.cols,
            c.rows,
            c.layers,
        )
    });

    for c in candidates {
        let mut cells = hex_grid(c.cols, c.rows, c.layers, spacing, cell);
        cells.truncate(n_series as usize * c.n_parallel as usize);
        let design = PackDesign {
            cell_locations: cells,
            n_series,
            n_parallel: c.n_parallel,
            cell_spacing_mm: spacing,
        };
        let report = evaluate(&design, problem)?;
        // Cheap rejections before the full geometric check.
        if report.pack_capacity_ah < problem.min_capacity_ah {
            break;
        }
        if report.temp_at_draw_c > problem.max_cell_temp_c
            || report.max_continuous_current_a < problem.required_current_a
        {
            continue;
        }
        if validate(&design, &report, problem).overall_valid {
            return Ok(OracleDesign {
                capacity_ah: report.pack_capacity_ah,
                design,
                cols: c.cols,
                rows: c.rows,
                layers: c.layers,
                spacing_mm: spacing,
            });
        }
    }
    Err(Error::DegenerateInput(
        "no uniform hex-grid design satisfies every constraint".into(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_problem_optimum() {
        let best = oracle_best_design(&ProblemSpec::default()).unwrap();
        assert_eq!(best.capacity_ah, 192.5);
        assert_eq!(best.design.n_parallel, 77);
        assert_eq!(best.layers, 3);
        assert_eq!(best.design.total_cells(), 8316);
    }

    #[test]
    fn smaller_envelope_lowers_the_ceiling() {
        let mut p = ProblemSpec::default();
        // 500 x 500 mm cannot meet capacity and thermal limits at all; 700 x 700 can.
        p.envelope_mm.width_mm = 700.0;
        p.envelope_mm.depth_mm = 700.0;
        let best = oracle_best_design(&p).unwrap();
        assert!(best.capacity_ah < 192.5);
        assert!(best.capacity_ah >= p.min_capacity_ah);
    }

    #[test]
    fn infeasible_problem_is_an_error() {
        let mut p = ProblemSpec::default();
        p.min_capacity_ah = 500.0;
        assert!(oracle_best_design(&p).is_err());
    }
}
