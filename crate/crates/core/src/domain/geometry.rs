use std::collections::HashMap;
use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use super::{CellSpec, PackDesign, Point3};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub width_mm: f64,
    pub depth_mm: f64,
    pub height_mm: f64,
}

impl BoundingBox {
    pub fn volume_mm3(&self) -> f64 {
        self.width_mm * self.depth_mm * self.height_mm
    }

    pub fn surface_area_mm2(&self) -> f64 {
        let (w, d, h) = (self.width_mm, self.depth_mm, self.height_mm);
        2.0 * (w * d + w * h + d * h)
    }
}

/// Outer dimensions of the pack: center extents plus one cell diameter (height).
pub fn bounding_box(design: &PackDesign, cell: &CellSpec) -> Result<BoundingBox> {
    let mut cells = design.cell_locations.iter();
    let first = cells.next().ok_or(Error::EmptyDesign)?;
    let (mut lo, mut hi) = (*first, *first);
    for p in cells {
        lo.x = lo.x.min(p.x);
        lo.y = lo.y.min(p.y);
        lo.z = lo.z.min(p.z);
        hi.x = hi.x.max(p.x);
        hi.y = hi.y.max(p.y);
        hi.z = hi.z.max(p.z);
    }
    Ok(BoundingBox {
        width_mm: hi.x - lo.x + cell.diameter_mm,
        depth_mm: hi.y - lo.y + cell.diameter_mm,
        height_mm: hi.z - lo.z + cell.height_mm,
    })
}

/// Smallest axis-to-axis distance over all pairs of cells that overlap vertically.
///
/// Two cells overlap vertically when their bases are less than one cell height
/// apart. Returns `f64::INFINITY` when no such pair exists.
///
/// Cells are bucketed on a square xy grid two diameters wide and only
/// neighbouring buckets are compared. If nothing closer than a bucket width
/// turns up, the exact sweep decides.
pub fn min_clearance(design: &PackDesign, cell: &CellSpec) -> f64 {
    let pts = &design.cell_locations;
    let bucket = 2.0 * cell.diameter_mm;
    if pts.len() < 64 || !(bucket > 0.0) || pts.iter().any(|p| !p.x.is_finite() || !p.y.is_finite()) {
        return sweep_clearance(pts, cell);
    }
    let key = |p: &Point3| ((p.x / bucket).floor() as i64, (p.y / bucket).floor() as i64);
    let mut grid: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    for (i, p) in pts.iter().enumerate() {
        grid.entry(key(p)).or_default().push(i);
    }
    let mut best = f64::INFINITY;
    for (i, a) in pts.iter().enumerate() {
        let (kx, ky) = key(a);
        for dx in -1..=1 {
            for dy in -1..=1 {
                let Some(bin) = grid.get(&(kx + dx, ky + dy)) else {
                    continue;
                };
                for &j in bin {
                    if j <= i {
                        continue;
                    }
                    let b = &pts[j];
                    if (a.z - b.z).abs() >= cell.height_mm {
                        continue;
                    }
                    best = best.min((b.x - a.x).hypot(b.y - a.y));
                }
            }
        }
    }
    // Pairs farther apart than one bucket may sit in non-adjacent buckets.
    if best < bucket {
        best
    } else {
        sweep_clearance(pts, cell)
    }
}

fn sweep_clearance(points: &[Point3], cell: &CellSpec) -> f64 {
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a.x.partial_cmp(&b.x).unwrap_or(Ordering::Equal));

    // Sweep in x: once the x gap alone reaches the current best, later cells cannot win.
    let mut best = f64::INFINITY;
    for (i, a) in pts.iter().enumerate() {
        for b in &pts[i + 1..] {
            let dx = b.x - a.x;
            if dx >= best {
                break;
            }
            if (a.z - b.z).abs() >= cell.height_mm {
                continue;
            }
            let d = dx.hypot(b.y - a.y);
            if d < best {
                best = d;
            }
        }
    }
    best
}

/// Uniform hexagonal close-packed grid.
///
/// Rows advance by `pitch * sqrt(3)/2` in y and odd rows shift by half a pitch
/// in x, where `pitch = diameter + spacing`. Layers stack directly on top of
/// each other. The first cell sits at `(radius, radius, 0)`.
pub fn hex_grid(
    cols: usize,
    rows: usize,
    layers: usize,
    spacing_mm: f64,
    cell: &CellSpec,
) -> Vec<Point3> {
    let pitch = cell.diameter_mm + spacing_mm;
    let row_step = pitch * 3f64.sqrt() / 2.0;
    let r = cell.radius_mm();
    let mut out = Vec::with_capacity(cols * rows * layers);
    for layer in 0..layers {
        let z = layer as f64 * cell.height_mm;
        for row in 0..rows {
            let y = r + row as f64 * row_step;
            let offset = if row % 2 == 1 { pitch / 2.0 } else { 0.0 };
            for col in 0..cols {
                out.push(Point3::new(r + offset + col as f64 * pitch, y, z));
            }
        }
    }
    out
}
