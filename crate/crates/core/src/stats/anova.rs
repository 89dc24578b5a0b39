use serde::{Deserialize, Serialize};

use super::special::f_sf;
use super::{mean, require_len};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnovaResult {
    pub f: f64,
    pub df1: f64,
    pub df2: f64,
    pub p: f64,
    pub partial_eta_sq: f64,
    pub ss_between: f64,
    pub ss_within: f64,
}

/// Classic one-way ANOVA over independent groups.
///
/// When both sums of squares are zero the groups are identical constants and
/// `F` is reported as 0 (`p = 1`, `η² = 0`).
pub fn one_way_anova(groups: &[Vec<f64>]) -> Result<AnovaResult> {
    if groups.len() < 2 {
        return Err(Error::DegenerateInput(format!(
            "ANOVA needs at least 2 groups, got {}",
            groups.len()
        )));
    }
    for g in groups {
        require_len(g, 2, "ANOVA group")?;
    }
    let n: usize = groups.iter().map(Vec::len).sum();
    let grand = groups.iter().flatten().sum::<f64>() / n as f64;
    let mut ssb = 0.0;
    let mut ssw = 0.0;
    for g in groups {
        let m = mean(g);
        ssb += g.len() as f64 * (m - grand).powi(2);
        ssw += g.iter().map(|x| (x - m).powi(2)).sum::<f64>();
    }
    let df1 = (groups.len() - 1) as f64;
    let df2 = (n - groups.len()) as f64;
    let (f, p, eta) = if ssw == 0.0 && ssb == 0.0 {
        (0.0, 1.0, 0.0)
    } else if ssw == 0.0 {
        (f64::INFINITY, 0.0, 1.0)
    } else {
        let f = (ssb / df1) / (ssw / df2);
        (f, f_sf(f, df1, df2), ssb / (ssb + ssw))
    };
    Ok(AnovaResult {
        f,
        df1,
        df2,
        p,
        partial_eta_sq: eta,
        ss_between: ssb,
        ss_within: ssw,
    })
}
