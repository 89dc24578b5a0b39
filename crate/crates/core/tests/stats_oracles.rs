//! Statistics checked against hand-worked values and independent numerics.

use approx::assert_relative_eq;
use packbench_core::stats::special::{f_sf, t_two_sided_p};
use packbench_core::stats::{bonferroni_alpha, cohens_d, one_way_anova, pca_2d, welch_t};
use proptest::prelude::*;

/// `∫_a^∞ g(x) dx` via `x = a + u/(1-u)` and composite Simpson on [0, 1].
/// `g` must decay fast enough that the transformed integrand vanishes at u = 1.
fn tail_integral(g: impl Fn(f64) -> f64, a: f64) -> f64 {
    let n = 200_000;
    let h = 1.0 / n as f64;
    let f = |u: f64| {
        if u >= 1.0 {
            return 0.0;
        }
        let w = 1.0 - u;
        g(a + u / w) / (w * w)
    };
    let mut s = f(0.0) + f(1.0);
    for i in 1..n {
        s += f(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

fn t_p_by_quadrature(t: f64, df: f64) -> f64 {
    let kernel = |x: f64| (1.0 + x * x / df).powf(-(df + 1.0) / 2.0);
    tail_integral(kernel, t.abs()) / tail_integral(kernel, 0.0)
}

fn f_p_by_quadrature(f: f64, d1: f64, d2: f64) -> f64 {
    let kernel = |x: f64| x.powf(d1 / 2.0 - 1.0) * (1.0 + d1 * x / d2).powf(-(d1 + d2) / 2.0);
    tail_integral(kernel, f) / tail_integral(kernel, 0.0)
}

const G1: [f64; 4] = [1.0, 2.0, 3.0, 4.0];
const G2: [f64; 4] = [3.0, 4.0, 5.0, 6.0];
const G3: [f64; 4] = [5.0, 6.0, 7.0, 8.0];
const B: [f64; 4] = [2.0, 4.0, 6.0, 8.0];

#[test]
fn anova_hand_example() {
    // Means 2.5 / 4.5 / 6.5 around 4.5: SSB = 4*(4+0+4) = 32, SSW = 3*5 = 15.
    let r = one_way_anova(&[G1.to_vec(), G2.to_vec(), G3.to_vec()]).unwrap();
    assert_relative_eq!(r.ss_between, 32.0, epsilon = 1e-12);
    assert_relative_eq!(r.ss_within, 15.0, epsilon = 1e-12);
    assert_eq!((r.df1, r.df2), (2.0, 9.0));
    assert_relative_eq!(r.f, 9.6, epsilon = 1e-12);
    assert_relative_eq!(r.partial_eta_sq, 32.0 / 47.0, epsilon = 1e-12);
    // F(2, d2) has survival (d2 / (d2 + 2F))^(d2/2).
    let closed = (9.0f64 / (9.0 + 19.2)).powf(4.5);
    assert_relative_eq!(r.p, closed, max_relative = 1e-10);
}

#[test]
fn welch_hand_example() {
    // a: mean 2.5, var 5/3; b: mean 5, var 20/3; se^2 = 25/12.
    let r = welch_t(&G1, &B).unwrap();
    let se2: f64 = 25.0 / 12.0;
    assert_relative_eq!(r.t, -2.5 / se2.sqrt(), epsilon = 1e-12);
    assert!((r.t - -1.7321).abs() < 1e-4);
    let va = 5.0 / 12.0;
    let vb = 20.0 / 12.0;
    let df = se2 * se2 / (va * va / 3.0 + vb * vb / 3.0);
    assert_relative_eq!(r.df, df, epsilon = 1e-12);
    assert!((r.df - 4.4118).abs() < 1e-4);
    assert_relative_eq!(r.p, t_p_by_quadrature(r.t, r.df), epsilon = 1e-7);

    let d = cohens_d(&G1, &B).unwrap();
    assert_relative_eq!(d, -2.5 / (25.0f64 / 6.0).sqrt(), epsilon = 1e-12);
    assert!((d - -1.2247).abs() < 1e-4);
}

#[test]
fn bonferroni_three_comparisons() {
    assert_relative_eq!(bonferroni_alpha(0.05, 3), 0.05 / 3.0);
    assert_eq!(bonferroni_alpha(0.05, 1), 0.05);
}

#[test]
fn p_values_match_quadrature() {
    for (t, df) in [(0.3, 3.0), (1.7321, 4.4118), (2.0, 10.0), (3.5, 29.0), (-5.0, 58.0)] {
        let p = t_two_sided_p(t, df);
        assert_relative_eq!(p, t_p_by_quadrature(t, df), epsilon = 1e-7, max_relative = 1e-5);
    }
    for (f, d1, d2) in [(0.5, 2.0, 9.0), (9.6, 2.0, 9.0), (3.1, 2.0, 87.0), (1.2, 4.0, 20.0), (4.0, 3.0, 6.0)] {
        let p = f_sf(f, d1, d2);
        assert_relative_eq!(p, f_p_by_quadrature(f, d1, d2), epsilon = 1e-7, max_relative = 1e-5);
    }
}

#[test]
fn pca_two_features_closed_form() {
    // For two standardized features the correlation matrix is [[1, r], [r, 1]]:
    // eigenvalues 1 ± |r|, eigenvectors (1, ±1)/sqrt(2).
    let x = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
    let y = [2.0, 1.0, 4.0, 3.0, 7.0, 5.0];
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    let r = sxy / (sxx * syy).sqrt();
    assert!(r > 0.0);

    let rows: Vec<Vec<f64>> = x.iter().zip(&y).map(|(a, b)| vec![*a, *b]).collect();
    let pca = pca_2d(&rows, &["x", "y"]).unwrap();
    assert_relative_eq!(pca.eigenvalues[0], 1.0 + r, epsilon = 1e-12);
    assert_relative_eq!(pca.eigenvalues[1], 1.0 - r, epsilon = 1e-12);
    assert_relative_eq!(pca.explained_variance_ratio[0], (1.0 + r) / 2.0, epsilon = 1e-12);
    let h = 0.5f64.sqrt();
    let pc1 = [pca.loadings[0][0], pca.loadings[1][0]];
    let pc2 = [pca.loadings[0][1], pca.loadings[1][1]];
    // Compare up to sign.
    let s1 = pc1[0].signum();
    assert_relative_eq!(s1 * pc1[0], h, epsilon = 1e-12);
    assert_relative_eq!(s1 * pc1[1], h, epsilon = 1e-12);
    let s2 = pc2[0].signum();
    assert_relative_eq!(s2 * pc2[0], h, epsilon = 1e-12);
    assert_relative_eq!(s2 * pc2[1], -h, epsilon = 1e-12);

    let sx = (sxx / (n - 1.0)).sqrt();
    let sy = (syy / (n - 1.0)).sqrt();
    for (i, score) in pca.scores.iter().enumerate() {
        let z = [(x[i] - mx) / sx, (y[i] - my) / sy];
        assert_relative_eq!(score[0], s1 * h * (z[0] + z[1]), epsilon = 1e-12);
        assert_relative_eq!(score[1], s2 * h * (z[0] - z[1]), epsilon = 1e-12);
    }
}

#[test]
fn pca_drops_constant_features() {
    let rows = vec![vec![1.0, 5.0, 2.0], vec![2.0, 5.0, 1.0], vec![3.0, 5.0, 5.0], vec![4.0, 5.0, 3.0]];
    let pca = pca_2d(&rows, &["a", "const", "b"]).unwrap();
    assert_eq!(pca.features, vec!["a", "b"]);
    assert_eq!(pca.dropped, vec!["const"]);
}

fn sample() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-100.0f64..100.0, 3..12)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn two_group_anova_equals_squared_t(n in 3usize..12, seed_a in prop::collection::vec(-50.0f64..50.0, 12), seed_b in prop::collection::vec(-50.0f64..50.0, 12)) {
        // With equal group sizes the Welch statistic equals the pooled one.
        let a = seed_a[..n].to_vec();
        let b = seed_b[..n].to_vec();
        let anova = one_way_anova(&[a.clone(), b.clone()]).unwrap();
        let w = welch_t(&a, &b).unwrap();
        prop_assert!((anova.f - w.t * w.t).abs() <= 1e-9 * anova.f.max(1.0));
        // F(1, ν) and two-sided t(ν) tails coincide.
        let via_t = t_two_sided_p(w.t, anova.df2);
        prop_assert!((anova.p - via_t).abs() <= 1e-9 * via_t.max(1e-300) + 1e-14);
    }

    #[test]
    fn welch_is_antisymmetric(a in sample(), b in sample()) {
        let ab = welch_t(&a, &b).unwrap();
        let ba = welch_t(&b, &a).unwrap();
        prop_assert!((ab.t + ba.t).abs() <= 1e-12 * ab.t.abs().max(1.0));
        prop_assert!((ab.df - ba.df).abs() <= 1e-9 * ab.df);
        prop_assert!((ab.p - ba.p).abs() <= 1e-12);
        prop_assert!((0.0..=1.0).contains(&ab.p));
        prop_assert!(ab.df >= (a.len().min(b.len()) - 1) as f64 - 1e-9);
        prop_assert!(ab.df <= (a.len() + b.len() - 2) as f64 + 1e-9);
    }

    #[test]
    fn pca_variance_ratios_are_consistent(rows in prop::collection::vec(prop::collection::vec(-10.0f64..10.0, 4), 5..30)) {
        let names = ["a", "b", "c", "d"];
        let Ok(pca) = pca_2d(&rows, &names) else { return Ok(()) };
        let p = pca.features.len() as f64;
        let [r1, r2] = pca.explained_variance_ratio;
        prop_assert!(r1 >= r2 - 1e-12 && r2 >= -1e-12);
        prop_assert!(r1 + r2 <= 1.0 + 1e-9);
        // Correlation-matrix trace equals the number of kept features.
        prop_assert!((r1 * p - pca.eigenvalues[0]).abs() < 1e-8);
        // Score variance along each component equals its eigenvalue.
        for c in 0..2 {
            let col: Vec<f64> = pca.scores.iter().map(|s| s[c]).collect();
            let m = col.iter().sum::<f64>() / col.len() as f64;
            let v = col.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (col.len() - 1) as f64;
            prop_assert!((v - pca.eigenvalues[c]).abs() < 1e-8 * pca.eigenvalues[0].max(1.0));
        }
    }
}
