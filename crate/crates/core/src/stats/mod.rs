//! Statistics for comparing loop architectures.
//!
//! Everything here is implemented in-repo except the symmetric eigensolver.
//! Standard deviations are sample (n − 1) throughout.

mod anova;
mod pca;
pub mod special;
mod summary;
mod ttest;

pub use anova::{one_way_anova, AnovaResult};
pub use pca::{pca_2d, Pca2};
pub use summary::{summarize, PairwiseTest, StatReport, SystemSummary, STAT_ALPHA};
pub use ttest::{bonferroni_alpha, cohens_d, welch_t, WelchResult};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub(crate) fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample variance; 0 for fewer than two values.
pub(crate) fn sample_var(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64
}

pub(crate) fn require_len(xs: &[f64], min: usize, what: &str) -> Result<()> {
    if xs.len() < min {
        return Err(Error::DegenerateInput(format!(
            "{what} needs at least {min} values, got {}",
            xs.len()
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Descriptive {
    pub n: usize,
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    /// Sample standard deviation; 0 for a single value.
    pub std: f64,
    pub median: f64,
}

pub fn describe(xs: &[f64]) -> Option<Descriptive> {
    if xs.is_empty() {
        return None;
    }
    let mut sorted = xs.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let median = if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
    };
    Some(Descriptive {
        n,
        min: sorted[0],
        max: sorted[n - 1],
        mean: mean(xs),
        std: sample_var(xs).sqrt(),
        median,
    })
}
