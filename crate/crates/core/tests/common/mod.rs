//! Helpers shared by the integration tests.
#![allow(dead_code)]

use std::path::Path;

use packbench_core::domain::{hex_grid, PackDesign};
use packbench_core::CellSpec;

/// First `take` cells of a `cols x rows x layers` hex grid at 2 mm spacing.
pub fn grid(cols: usize, rows: usize, layers: usize, take: usize, n_series: u32, n_parallel: u32) -> PackDesign {
    let mut cells = hex_grid(cols, rows, layers, 2.0, &CellSpec::default());
    assert!(take <= cells.len());
    cells.truncate(take);
    PackDesign {
        cell_locations: cells,
        n_series,
        n_parallel,
        cell_spacing_mm: 2.0,
    }
}

/// Steady-state temperature from the closed form, with the default problem's
/// constants written out: 48 A draw, 0.05 Ohm cells, h = 10 W/m2K, 20 C ambient.
pub fn hand_temp_c(width_mm: f64, depth_mm: f64, height_mm: f64, cells: usize, n_parallel: u32) -> f64 {
    let i = 48.0 / n_parallel as f64;
    let q = i * i * 0.05;
    let (w, d, h) = (width_mm / 1000.0, depth_mm / 1000.0, height_mm / 1000.0);
    let area = 2.0 * (w * d + w * h + d * h);
    20.0 + cells as f64 * q / (10.0 * area)
}

/// Agent-style proposal text, built without the crate's renderer.
pub fn proposal_text(design: &PackDesign, declare_final: bool) -> String {
    let locations: Vec<[f64; 3]> = design.cell_locations.iter().map(|p| [p.x, p.y, p.z]).collect();
    let doc = serde_json::json!({
        "cell_locations": locations,
        "cell_connections": [design.n_series, design.n_parallel],
        "cell_spacing": design.cell_spacing_mm,
        "rationale": "scripted",
        "declare_final": declare_final,
    });
    format!("Here is my design.\n```json\n{doc}\n```\n")
}

pub fn finalize_text(declare_final: bool) -> String {
    format!("```json\n{{\"declare_final\": {declare_final}, \"rationale\": \"scripted\"}}\n```")
}

/// 108S x 20P on one 49 x 45 layer: valid, exactly 50 Ah, 55.1 C.
pub fn valid_50ah() -> PackDesign {
    grid(49, 45, 1, 2160, 108, 20)
}

/// 107S x 20P: fails the voltage constraint only.
pub fn invalid_107s() -> PackDesign {
    grid(49, 45, 1, 2140, 107, 20)
}

pub fn write_jsonl(path: &Path, lines: &[String]) {
    let body: String = lines
        .iter()
        .map(|l| serde_json::to_string(l).unwrap() + "\n")
        .collect();
    std::fs::write(path, body).unwrap();
}

/// A run log with the wall-clock field blanked, for byte comparisons.
pub fn log_without_timestamps(path: &Path) -> String {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let mut header: serde_json::Value = serde_json::from_str(lines.next().unwrap()).unwrap();
    header["wall_time_s"] = serde_json::Value::Null;
    let mut out = header.to_string();
    for l in lines {
        out.push('\n');
        out.push_str(l);
    }
    out
}
