use serde::{Deserialize, Serialize};

use super::lognormal::LognormalParams;
use super::normal::{std_normal_cdf, std_normal_sf, HALF_LN_2PI};
use super::IncomeDistribution;
use crate::error::{Error, Result};

/// Tolerance on `Σ π_r = 1`.
pub const WEIGHT_SUM_TOL: f64 = 1e-12;

/// Finite mixture of lognormals.
///
/// Components built through [`MixtureParams::new`] carry strictly increasing
/// log-means, the labelling used by the sampler. [`MixtureParams::unordered`]
/// skips that check for evaluation-only uses (data-generating processes,
/// tests with coincident components).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureParams {
    weights: Vec<f64>,
    mus: Vec<f64>,
    sigma2s: Vec<f64>,
}

impl MixtureParams {
    pub fn new(weights: Vec<f64>, mus: Vec<f64>, sigma2s: Vec<f64>) -> Result<Self> {
        let params = Self::unordered(weights, mus, sigma2s)?;
        params.check_ordering()?;
        Ok(params)
    }

    pub fn unordered(weights: Vec<f64>, mus: Vec<f64>, sigma2s: Vec<f64>) -> Result<Self> {
        let params = Self {
            weights,
            mus,
            sigma2s,
        };
        params.check_components()?;
        Ok(params)
    }

    pub fn single(component: LognormalParams) -> Self {
        Self {
            weights: vec![1.0],
            mus: vec![component.mu()],
            sigma2s: vec![component.sigma2()],
        }
    }

    pub(crate) fn from_parts_unchecked(weights: Vec<f64>, mus: Vec<f64>, sigma2s: Vec<f64>) -> Self {
        Self {
            weights,
            mus,
            sigma2s,
        }
    }

    fn check_components(&self) -> Result<()> {
        let r = self.weights.len();
        if r == 0 {
            return Err(Error::invariant("mixture needs at least one component"));
        }
        if self.mus.len() != r || self.sigma2s.len() != r {
            return Err(Error::invariant(format!(
                "mixture component vectors disagree in length: {} weights, {} mus, {} sigma2s",
                r,
                self.mus.len(),
                self.sigma2s.len()
            )));
        }
        if self.weights.iter().any(|&w| !(w > 0.0 && w <= 1.0)) {
            return Err(Error::invariant(format!("mixture weights must lie in (0, 1]: {:?}", self.weights)));
        }
        let total: f64 = self.weights.iter().sum();
        if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::invariant(format!("mixture weights sum to {total}, not 1")));
        }
        if self.mus.iter().any(|m| !m.is_finite()) {
            return Err(Error::invariant(format!("mixture log-means must be finite: {:?}", self.mus)));
        }
        if self.sigma2s.iter().any(|&s| !(s > 0.0 && s.is_finite())) {
            return Err(Error::invariant(format!("mixture log-variances must be positive: {:?}", self.sigma2s)));
        }
        Ok(())
    }

    fn check_ordering(&self) -> Result<()> {
        if self.mus.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::invariant(format!("mixture log-means not strictly increasing: {:?}", self.mus)));
        }
        Ok(())
    }

    /// Full invariant check, including the label ordering.
    pub fn validate(&self) -> Result<()> {
        self.check_components()?;
        self.check_ordering()
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn mus(&self) -> &[f64] {
        &self.mus
    }

    pub fn sigma2s(&self) -> &[f64] {
        &self.sigma2s
    }

    pub fn component(&self, r: usize) -> LognormalParams {
        LognormalParams::new(self.mus[r], self.sigma2s[r]).expect("validated component")
    }

    pub fn components(&self) -> impl Iterator<Item = (f64, LognormalParams)> + '_ {
        (0..self.len()).map(move |r| (self.weights[r], self.component(r)))
    }

    pub(crate) fn parts_mut(&mut self) -> (&mut Vec<f64>, &mut Vec<f64>, &mut Vec<f64>) {
        (&mut self.weights, &mut self.mus, &mut self.sigma2s)
    }

    /// Log of the mixture density at `x > 0`.
    pub fn log_pdf(&self, x: f64) -> f64 {
        let lx = x.ln();
        let terms = (0..self.len()).map(|r| {
            let d = lx - self.mus[r];
            self.weights[r].ln() - HALF_LN_2PI - 0.5 * self.sigma2s[r].ln() - d * d / (2.0 * self.sigma2s[r])
        });
        log_sum_exp(terms) - lx
    }

    /// Mean of the mixture, `Σ π_r exp(μ_r + σ_r²/2)`.
    pub fn mean(&self) -> f64 {
        (0..self.len())
            .map(|r| self.weights[r] * (self.mus[r] + 0.5 * self.sigma2s[r]).exp())
            .sum()
    }
}

pub(crate) fn log_sum_exp(terms: impl Iterator<Item = f64> + Clone) -> f64 {
    let max = terms.clone().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    max + terms.map(|t| (t - max).exp()).sum::<f64>().ln()
}

impl IncomeDistribution for MixtureParams {
    fn pdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        self.components().map(|(w, c)| w * c.pdf(x)).sum()
    }

    fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        let lx = x.ln();
        (0..self.len())
            .map(|r| self.weights[r] * std_normal_cdf((lx - self.mus[r]) / self.sigma2s[r].sqrt()))
            .sum()
    }

    fn sf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 1.0;
        }
        let lx = x.ln();
        (0..self.len())
            .map(|r| self.weights[r] * std_normal_sf((lx - self.mus[r]) / self.sigma2s[r].sqrt()))
            .sum()
    }

    fn log_pdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return f64::NEG_INFINITY;
        }
        MixtureParams::log_pdf(self, x)
    }

    fn interval_mass(&self, lo: f64, hi: f64) -> f64 {
        let (llo, lhi) = (lo.ln(), hi.ln());
        (0..self.len())
            .map(|r| {
                let s = self.sigma2s[r].sqrt();
                let a = (llo - self.mus[r]) / s;
                let b = (lhi - self.mus[r]) / s;
                let mass = if a > 0.0 {
                    std_normal_sf(a) - std_normal_sf(b)
                } else {
                    std_normal_cdf(b) - std_normal_cdf(a)
                };
                self.weights[r] * mass
            })
            .sum()
    }

    fn mean(&self) -> Option<f64> {
        Some(MixtureParams::mean(self))
    }
}

fn check_income(x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("income must be positive and finite, got {x}")))
    }
}

/// Mixture density `Σ π_r f(x | μ_r, σ_r²)`.
pub fn mln_pdf(x: f64, params: &MixtureParams) -> Result<f64> {
    check_income(x)?;
    Ok(params.pdf(x))
}

/// Mixture CDF `Σ π_r Φ((ln x − μ_r)/σ_r)`. `x = +∞` gives 1.
pub fn mln_cdf(x: f64, params: &MixtureParams) -> Result<f64> {
    if x == f64::INFINITY {
        return Ok(1.0);
    }
    check_income(x)?;
    Ok(params.cdf(x))
}
