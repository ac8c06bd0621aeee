use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Half-sample mode: repeatedly keep the shortest run of `⌈m/2⌉` sorted
/// points until three or fewer remain.
///
/// With three left, the mean of the closer adjacent pair is returned (the
/// middle point on a tie); with two, their mean; with one, itself.
pub fn half_sample_mode(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::domain("half-sample mode of an empty sample"));
    }
    if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
        return Err(Error::domain(format!("half-sample mode needs finite values, got {bad}")));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut x = &sorted[..];
    while x.len() > 3 {
        let h = x.len().div_ceil(2);
        let start = (0..=x.len() - h)
            .min_by(|&i, &j| (x[i + h - 1] - x[i]).total_cmp(&(x[j + h - 1] - x[j])))
            .expect("non-empty range");
        x = &x[start..start + h];
    }
    Ok(match x {
        [a] => *a,
        [a, b] => 0.5 * (a + b),
        [a, b, c] => {
            let (left, right) = (b - a, c - b);
            if left < right {
                0.5 * (a + b)
            } else if right < left {
                0.5 * (b + c)
            } else {
                *b
            }
        }
        _ => unreachable!("loop leaves one to three points"),
    })
}

/// Quantile with linear interpolation between order statistics (type 7).
pub fn quantile_type7(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Posterior mean, SD (denominator `M − 1`), half-sample mode and an
/// equal-tailed credible interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PosteriorSummary {
    pub mean: f64,
    pub sd: f64,
    pub mode: f64,
    pub lower: f64,
    pub upper: f64,
}

impl PosteriorSummary {
    pub fn contains(&self, v: f64) -> bool {
        self.lower <= v && v <= self.upper
    }
}

pub fn posterior_summaries(values: &[f64], level: f64) -> Result<PosteriorSummary> {
    if values.is_empty() {
        return Err(Error::domain("posterior summary of an empty sample"));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::domain(format!("credible level must lie in (0, 1), got {level}")));
    }
    let m = values.len() as f64;
    // Centring on the first value keeps constant samples exact.
    let mean = values[0] + values.iter().map(|v| v - values[0]).sum::<f64>() / m;
    let sd = if values.len() > 1 {
        (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (m - 1.0)).sqrt()
    } else {
        0.0
    };
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let tail = 0.5 * (1.0 - level);
    Ok(PosteriorSummary {
        mean,
        sd,
        mode: half_sample_mode(values)?,
        lower: quantile_type7(&sorted, tail),
        upper: quantile_type7(&sorted, 1.0 - tail),
    })
}
