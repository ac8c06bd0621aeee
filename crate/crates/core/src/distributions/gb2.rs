use serde::{Deserialize, Serialize};
use statrs::function::beta::{checked_beta_reg, ln_beta};

use super::IncomeDistribution;
use crate::error::{Error, Result};

/// Generalized beta of the second kind, McDonald's form:
/// `f(x) = a x^{ap−1} / (b^{ap} B(p,q) (1 + (x/b)^a)^{p+q})`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Gb2Params {
    pub a: f64,
    pub b: f64,
    pub p: f64,
    pub q: f64,
}

impl Gb2Params {
    pub fn new(a: f64, b: f64, p: f64, q: f64) -> Result<Self> {
        for (name, v) in [("a", a), ("b", b), ("p", p), ("q", q)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::domain(format!("GB2 parameter {name} must be positive, got {v}")));
            }
        }
        Ok(Self { a, b, p, q })
    }

    /// `a (ln x − ln b)`, the log-odds of the beta variable.
    #[inline]
    fn log_odds(&self, x: f64) -> f64 {
        self.a * (x.ln() - self.b.ln())
    }

    pub fn log_pdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return f64::NEG_INFINITY;
        }
        let s = self.log_odds(x);
        self.a.ln() + (self.a * self.p - 1.0) * x.ln() - self.a * self.p * self.b.ln() - ln_beta(self.p, self.q)
            - (self.p + self.q) * softplus(s)
    }

    /// True when the mean (and so the Gini coefficient) is finite.
    pub fn has_finite_mean(&self) -> bool {
        self.a * self.q > 1.0
    }

    /// Mean `b B(p + 1/a, q − 1/a) / B(p, q)` when `aq > 1`.
    pub fn mean(&self) -> Option<f64> {
        if !self.has_finite_mean() {
            return None;
        }
        let inv = 1.0 / self.a;
        Some(self.b * (ln_beta(self.p + inv, self.q - inv) - ln_beta(self.p, self.q)).exp())
    }
}

#[inline]
fn softplus(s: f64) -> f64 {
    if s > 0.0 {
        s + (-s).exp().ln_1p()
    } else {
        s.exp().ln_1p()
    }
}

/// `1 / (1 + e^{-s})` without overflow.
#[inline]
fn logistic(s: f64) -> f64 {
    if s >= 0.0 {
        1.0 / (1.0 + (-s).exp())
    } else {
        let e = s.exp();
        e / (1.0 + e)
    }
}

impl IncomeDistribution for Gb2Params {
    fn pdf(&self, x: f64) -> f64 {
        self.log_pdf(x).exp()
    }

    fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        let s = self.log_odds(x);
        if s > 0.0 {
            1.0 - self.sf(x)
        } else {
            checked_beta_reg(self.p, self.q, logistic(s)).unwrap_or(f64::NAN)
        }
    }

    fn sf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 1.0;
        }
        let s = self.log_odds(x);
        if s > 0.0 {
            checked_beta_reg(self.q, self.p, logistic(-s)).unwrap_or(f64::NAN)
        } else {
            1.0 - self.cdf(x)
        }
    }

    fn log_pdf(&self, x: f64) -> f64 {
        Gb2Params::log_pdf(self, x)
    }

    fn mean(&self) -> Option<f64> {
        Gb2Params::mean(self)
    }
}

fn check_income(x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("income must be positive and finite, got {x}")))
    }
}

pub fn gb2_pdf(x: f64, params: &Gb2Params) -> Result<f64> {
    check_income(x)?;
    Ok(params.pdf(x))
}

pub fn gb2_cdf(x: f64, params: &Gb2Params) -> Result<f64> {
    check_income(x)?;
    Ok(params.cdf(x))
}
