use serde::{Deserialize, Serialize};

use super::grouped::GroupedData;
use crate::error::{Error, Result};

/// Nonparametric Gini bounds from grouped boundaries, counts and means.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GiniBounds {
    pub lower: f64,
    pub upper: f64,
}

/// Gastwirth bounds.
///
/// The lower bound concentrates each group at its mean. The upper bound adds,
/// per group, the largest within-group Gini a mean-preserving distribution on
/// the group interval can reach: the two-point spread at the endpoints for
/// bounded groups, and its supremum `(x̄_K − t_{K−1}) / x̄_K` for the open top.
pub fn gastwirth_bounds(data: &GroupedData) -> Result<GiniBounds> {
    let means = data
        .group_means()
        .ok_or_else(|| Error::domain("Gastwirth bounds need group means"))?;
    let n = data.n_total() as f64;
    let shares: Vec<f64> = data.counts().iter().map(|&c| c as f64 / n).collect();
    let overall: f64 = shares.iter().zip(means).map(|(s, m)| s * m).sum();

    let lower = between_group_gini(&shares, means);

    let top = data.groups() - 1;
    let mut within = 0.0;
    for (k, (&s, &m)) in shares.iter().zip(means).enumerate() {
        let (lo, hi) = data.interval(k);
        if !(m > lo && m <= hi) {
            return Err(Error::invariant(format!("mean {m} of group {} lies outside ({lo}, {hi}]", k + 1)));
        }
        let g_max = if k == top {
            (m - lo) / m
        } else {
            (hi - m) * (m - lo) / ((hi - lo) * m)
        };
        within += s * s * (m / overall) * g_max;
    }
    Ok(GiniBounds {
        lower,
        upper: lower + within,
    })
}

/// Gini of the discrete distribution with mass `shares[k]` at `means[k]`.
fn between_group_gini(shares: &[f64], means: &[f64]) -> f64 {
    let overall: f64 = shares.iter().zip(means).map(|(s, m)| s * m).sum();
    let mut spread = 0.0;
    for (si, mi) in shares.iter().zip(means) {
        for (sj, mj) in shares.iter().zip(means) {
            spread += si * sj * (mi - mj).abs();
        }
    }
    spread / (2.0 * overall)
}

/// Gini of a raw sample, `Σ_i Σ_j |x_i − x_j| / (2 n² x̄)`.
pub fn sample_gini(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::domain("Gini of an empty sample"));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let total: f64 = sorted.iter().sum();
    if !(total > 0.0) {
        return Err(Error::domain("Gini needs a positive total"));
    }
    let weighted: f64 = sorted
        .iter()
        .enumerate()
        .map(|(i, x)| (2.0 * (i as f64 + 1.0) - n - 1.0) * x)
        .sum();
    Ok(weighted / (n * total))
}
