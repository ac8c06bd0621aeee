use serde::{Deserialize, Serialize};

use super::select_draws;
use crate::draws::Draws;
use crate::error::{Error, Result};

/// Fewest draws accepted by the harmonic-mean estimator.
pub const MIN_HM_DRAWS: usize = 100;
/// Importance-weight effective sample size below which a warning is attached.
pub const MIN_HM_ESS: f64 = 10.0;

/// Harmonic-mean log marginal likelihood with its delta-method standard error.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogMarginal {
    pub value: f64,
    pub se: f64,
    /// Effective sample size of the weights `1/L_i`.
    pub ess: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

/// `log ML = −[logsumexp(−ℓ) − ln M]`, `SE = sd(w)/(√M · mean(w))` with
/// `w_i = exp(min ℓ − ℓ_i)`.
pub fn harmonic_mean_log_ml(log_liks: &[f64]) -> Result<LogMarginal> {
    let m = log_liks.len();
    if m < MIN_HM_DRAWS {
        return Err(Error::domain(format!("harmonic mean needs at least {MIN_HM_DRAWS} draws, got {m}")));
    }
    if let Some(bad) = log_liks.iter().find(|l| !l.is_finite()) {
        return Err(Error::domain(format!("non-finite log-likelihood {bad} among the draws")));
    }
    let c = log_liks.iter().copied().fold(f64::INFINITY, f64::min);
    let w: Vec<f64> = log_liks.iter().map(|l| (c - l).exp()).collect();
    let mf = m as f64;
    let sum: f64 = w.iter().sum();
    let mean = sum / mf;
    let var = w.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (mf - 1.0);
    let ess = sum * sum / w.iter().map(|v| v * v).sum::<f64>();
    let value = c - (mean).ln();
    let warning = (ess < MIN_HM_ESS).then(|| {
        format!("harmonic-mean weights have effective sample size {ess:.2} (< {MIN_HM_ESS}); estimate unreliable")
    });
    Ok(LogMarginal {
        value,
        se: var.sqrt() / (mf.sqrt() * mean),
        ess,
        warning,
    })
}

/// Harmonic-mean estimate from the per-draw log-likelihoods of a chain.
pub fn log_marginal_likelihood_hm(draws: &Draws, condition_r: Option<usize>) -> Result<LogMarginal> {
    if draws.meta.prior_only {
        return Err(Error::domain("prior-only draws carry no likelihood"));
    }
    let ll: Vec<f64> = select_draws(draws, condition_r)?.iter().map(|d| d.log_lik).collect();
    harmonic_mean_log_ml(&ll)
}
