//! Evaluator and validator checks against hand-computed fixtures.

mod common;

use common::{grid, hand_temp_c, invalid_107s, valid_50ah};
use packbench_core::evaluation::feedback_text;
use packbench_core::{evaluate, validate, ProblemSpec};

/// `(label, design builder args, bounding box mm, temperature C)`.
///
/// Hand computation, row step = 20 * sqrt(3)/2 = 17.3205 mm:
/// * 8100 cells, 49x56x3 truncated, 75P: I = 0.64 A, Q = 0.02048 W, NQ = 165.888 W;
///   box 988 x (55*17.3205+18 = 970.63) x 195 -> A = 2.68182 m2 -> 20 + 6.186 = 26.19 C.
/// * 2160 cells, 49x45x1, 20P: I = 2.4 A, Q = 0.288 W, NQ = 622.08 W;
///   box 988 x 780.10 x 65 -> A = 1.77134 m2 -> 20 + 35.12 = 55.12 C.
/// * 2160 cells, 27x27x3 truncated, 20P: box (26*20+18+10 = 548) x 468.33 x 195
///   -> A = 0.90966 m2 -> 20 + 68.39 = 88.39 C.
const FIXTURES: [(&str, (usize, usize, usize, usize, u32, u32), [f64; 3], f64); 3] = [
    ("8100 cells 108S75P", (49, 56, 3, 8100, 108, 75), [988.0, 970.628, 195.0], 26.19),
    ("2160 cells one layer", (49, 45, 1, 2160, 108, 20), [988.0, 780.102, 65.0], 55.12),
    ("2160 cells three layers", (27, 27, 3, 2160, 108, 20), [548.0, 468.333, 195.0], 88.39),
];

#[test]
fn thermal_fixtures_reproduce() {
    let problem = ProblemSpec::default();
    for (label, (c, r, l, take, s, p), dims, temp) in FIXTURES {
        let d = grid(c, r, l, take, s, p);
        let e = evaluate(&d, &problem).unwrap();
        assert!((e.bounding_w_mm - dims[0]).abs() < 1e-3, "{label}: width {}", e.bounding_w_mm);
        assert!((e.bounding_d_mm - dims[1]).abs() < 1e-3, "{label}: depth {}", e.bounding_d_mm);
        assert!((e.bounding_h_mm - dims[2]).abs() < 1e-9, "{label}: height {}", e.bounding_h_mm);
        assert!((e.temp_at_draw_c - temp).abs() < 0.5, "{label}: {} C", e.temp_at_draw_c);
        let oracle = hand_temp_c(dims[0], dims[1], dims[2], take, p);
        assert!((oracle - temp).abs() < 0.01, "{label}: oracle {oracle}");
        assert!((e.temp_at_draw_c - oracle).abs() < 1e-3, "{label}");
    }
}

#[test]
fn large_and_minimal_designs_validate() {
    let problem = ProblemSpec::default();
    let d = grid(49, 56, 3, 8100, 108, 75);
    let e = evaluate(&d, &problem).unwrap();
    assert_eq!(e.pack_capacity_ah, 187.5);
    assert!((e.pack_voltage_v - 399.6).abs() < 1e-9);
    assert!(validate(&d, &e, &problem).overall_valid);

    let d = valid_50ah();
    let e = evaluate(&d, &problem).unwrap();
    assert_eq!(e.pack_capacity_ah, 50.0);
    assert!(validate(&d, &e, &problem).overall_valid);
}

fn failure_lines(d: &packbench_core::PackDesign) -> Vec<String> {
    let problem = ProblemSpec::default();
    let e = evaluate(d, &problem).unwrap();
    let v = validate(d, &e, &problem);
    assert!(!v.overall_valid);
    feedback_text(&e, &v)
        .lines()
        .filter(|l| l.starts_with("FAILED"))
        .map(str::to_string)
        .collect()
}

#[test]
fn validator_failure_messages() {
    let voltage = failure_lines(&invalid_107s());
    assert_eq!(voltage.len(), 1, "{voltage:?}");
    assert!(voltage[0].contains("voltage"));

    let height = failure_lines(&grid(27, 20, 4, 2160, 108, 20));
    assert!(height.iter().any(|l| l.contains("height") && l.contains("260")), "{height:?}");

    // Pitch 19 mm (1 mm gap) while 2 mm is declared and required.
    let mut tight = grid(27, 20, 1, 540, 108, 5);
    for p in &mut tight.cell_locations {
        p.x *= 19.0 / 20.0;
        p.y *= 19.0 / 20.0;
    }
    let clearance = failure_lines(&tight);
    assert!(clearance.iter().any(|l| l.contains("clearance")), "{clearance:?}");

    let mut mismatch = valid_50ah();
    mismatch.n_parallel = 21;
    let conn = failure_lines(&mismatch);
    assert!(conn.iter().any(|l| l.contains("connections")), "{conn:?}");

    let mut spacing = valid_50ah();
    spacing.cell_spacing_mm = 1.0;
    let sp = failure_lines(&spacing);
    assert!(sp.iter().any(|l| l.contains("spacing")), "{sp:?}");
}
