use serde::{Deserialize, Serialize};

use super::special::t_two_sided_p;
use super::{mean, require_len, sample_var};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WelchResult {
    pub t: f64,
    pub df: f64,
    pub p: f64,
}

/// Welch's unequal-variance t-test with Welch–Satterthwaite degrees of freedom.
pub fn welch_t(a: &[f64], b: &[f64]) -> Result<WelchResult> {
    require_len(a, 2, "t-test sample")?;
    require_len(b, 2, "t-test sample")?;
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (va, vb) = (sample_var(a) / na, sample_var(b) / nb);
    let se2 = va + vb;
    if se2 == 0.0 {
        return Err(Error::DegenerateInput("both samples have zero variance".into()));
    }
    let t = (mean(a) - mean(b)) / se2.sqrt();
    let df = se2 * se2 / (va * va / (na - 1.0) + vb * vb / (nb - 1.0));
    Ok(WelchResult {
        t,
        df,
        p: t_two_sided_p(t, df),
    })
}

/// Cohen's d with the pooled (n−1 weighted) standard deviation.
pub fn cohens_d(a: &[f64], b: &[f64]) -> Result<f64> {
    require_len(a, 2, "effect-size sample")?;
    require_len(b, 2, "effect-size sample")?;
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let pooled = ((na - 1.0) * sample_var(a) + (nb - 1.0) * sample_var(b)) / (na + nb - 2.0);
    if pooled == 0.0 {
        return Err(Error::DegenerateInput("pooled standard deviation is zero".into()));
    }
    Ok((mean(a) - mean(b)) / pooled.sqrt())
}

/// Per-comparison significance threshold for `comparisons` tests.
pub fn bonferroni_alpha(alpha: f64, comparisons: usize) -> f64 {
    alpha / comparisons.max(1) as f64
}
