use serde::{Deserialize, Serialize};

use super::normal::{std_normal_cdf, std_normal_sf, HALF_LN_2PI};
use super::IncomeDistribution;
use crate::error::{Error, Result};

/// Lognormal parameters on the log scale: `ln X ~ N(mu, sigma2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LognormalParams {
    mu: f64,
    sigma2: f64,
}

impl LognormalParams {
    pub fn new(mu: f64, sigma2: f64) -> Result<Self> {
        if !mu.is_finite() {
            return Err(Error::domain(format!("lognormal mu must be finite, got {mu}")));
        }
        if !(sigma2 > 0.0) || !sigma2.is_finite() {
            return Err(Error::domain(format!("lognormal sigma2 must be positive, got {sigma2}")));
        }
        Ok(Self { mu, sigma2 })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    pub fn sigma(&self) -> f64 {
        self.sigma2.sqrt()
    }

    pub fn mean(&self) -> f64 {
        (self.mu + 0.5 * self.sigma2).exp()
    }

    #[inline]
    pub(crate) fn standardize(&self, x: f64) -> f64 {
        (x.ln() - self.mu) / self.sigma()
    }

    /// Log density, valid for `x > 0`.
    #[inline]
    pub fn log_pdf(&self, x: f64) -> f64 {
        let lx = x.ln();
        let d = lx - self.mu;
        -HALF_LN_2PI - 0.5 * self.sigma2.ln() - lx - d * d / (2.0 * self.sigma2)
    }
}

impl IncomeDistribution for LognormalParams {
    fn pdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        let d = x.ln() - self.mu;
        (-d * d / (2.0 * self.sigma2)).exp() / ((2.0 * std::f64::consts::PI * self.sigma2).sqrt() * x)
    }

    fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        std_normal_cdf(self.standardize(x))
    }

    fn sf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 1.0;
        }
        std_normal_sf(self.standardize(x))
    }

    fn log_pdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return f64::NEG_INFINITY;
        }
        LognormalParams::log_pdf(self, x)
    }

    fn mean(&self) -> Option<f64> {
        Some(LognormalParams::mean(self))
    }
}

fn check_income(x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("income must be positive and finite, got {x}")))
    }
}

/// Lognormal density.
pub fn ln_pdf(x: f64, params: &LognormalParams) -> Result<f64> {
    check_income(x)?;
    Ok(params.pdf(x))
}

/// Lognormal log density.
pub fn ln_log_pdf(x: f64, params: &LognormalParams) -> Result<f64> {
    check_income(x)?;
    Ok(params.log_pdf(x))
}

/// Lognormal CDF `Φ((ln x − μ)/σ)`.
pub fn ln_cdf(x: f64, params: &LognormalParams) -> Result<f64> {
    check_income(x)?;
    Ok(params.cdf(x))
}
