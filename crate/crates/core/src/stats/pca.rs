use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use super::{mean, sample_var};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pca2 {
    /// Features kept after dropping zero-variance columns, in input order.
    pub features: Vec<String>,
    pub dropped: Vec<String>,
    /// `(pc1, pc2)` per input row.
    pub scores: Vec<[f64; 2]>,
    /// `(pc1, pc2)` loading per kept feature.
    pub loadings: Vec<[f64; 2]>,
    pub eigenvalues: [f64; 2],
    pub explained_variance_ratio: [f64; 2],
}

/// Two-component PCA of z-scored features (sample standard deviation).
///
/// Each component's largest-magnitude loading is made positive, so results
/// are deterministic up to exact ties.
pub fn pca_2d(rows: &[Vec<f64>], names: &[&str]) -> Result<Pca2> {
    if rows.len() < 3 {
        return Err(Error::DegenerateInput(format!("PCA needs at least 3 rows, got {}", rows.len())));
    }
    let width = names.len();
    if let Some(bad) = rows.iter().find(|r| r.len() != width) {
        return Err(Error::DegenerateInput(format!(
            "row has {} features, expected {width}",
            bad.len()
        )));
    }

    let mut kept = Vec::new();
    let mut dropped = Vec::new();
    let mut columns: Vec<Vec<f64>> = Vec::new();
    for (j, name) in names.iter().enumerate() {
        let col: Vec<f64> = rows.iter().map(|r| r[j]).collect();
        let (m, v) = (mean(&col), sample_var(&col));
        if !(v > 0.0) || !v.is_finite() {
            log::warn!("PCA: dropping feature `{name}` (zero variance)");
            dropped.push(name.to_string());
            continue;
        }
        let sd = v.sqrt();
        columns.push(col.iter().map(|x| (x - m) / sd).collect());
        kept.push(name.to_string());
    }
    if kept.len() < 2 {
        return Err(Error::DegenerateInput(format!(
            "PCA needs at least 2 features with nonzero variance, got {}",
            kept.len()
        )));
    }

    let n = rows.len();
    let p = kept.len();
    let z = DMatrix::from_fn(n, p, |i, j| columns[j][i]);
    let cov = (z.transpose() * &z) / (n as f64 - 1.0);
    let eig = SymmetricEigen::new(cov);

    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let total: f64 = eig.eigenvalues.iter().map(|l| l.max(0.0)).sum();

    let mut eigenvalues = [0.0; 2];
    let mut ratio = [0.0; 2];
    let mut vecs = [vec![0.0; p], vec![0.0; p]];
    for c in 0..2 {
        let k = order[c];
        let lambda = eig.eigenvalues[k].max(0.0);
        eigenvalues[c] = lambda;
        ratio[c] = if total > 0.0 { lambda / total } else { 0.0 };
        let v: Vec<f64> = eig.eigenvectors.column(k).iter().copied().collect();
        let lead = v
            .iter()
            .copied()
            .reduce(|best, x| if x.abs() > best.abs() { x } else { best })
            .unwrap_or(1.0);
        let sign = if lead < 0.0 { -1.0 } else { 1.0 };
        vecs[c] = v.iter().map(|x| x * sign).collect();
    }

    let scores = (0..n)
        .map(|i| {
            let s = |c: usize| (0..p).map(|j| z[(i, j)] * vecs[c][j]).sum::<f64>();
            [s(0), s(1)]
        })
        .collect();
    let loadings = (0..p).map(|j| [vecs[0][j], vecs[1][j]]).collect();

    Ok(Pca2 {
        features: kept,
        dropped,
        scores,
        loadings,
        eigenvalues,
        explained_variance_ratio: ratio,
    })
}
