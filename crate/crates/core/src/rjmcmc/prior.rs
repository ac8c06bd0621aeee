use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Hyper-parameters of the hierarchical prior.
///
/// Gamma distributions are shape–rate throughout:
///
/// * `R ~ Poisson(lambda0)` truncated to `1..=r_max`
/// * `π | R ~ Dirichlet(alpha0, …, alpha0)`
/// * `μ_r ~ N(μ, τ²)`, `μ ~ N(mu0, tau0_2)`, `τ⁻² ~ G(n0, s0)`
/// * `σ_r⁻² ~ G(nu0, β)`, `β ~ G(g0, h0)`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PriorConfig {
    pub lambda0: f64,
    pub r_max: usize,
    pub alpha0: f64,
    pub mu0: f64,
    pub tau0_2: f64,
    pub n0: f64,
    pub s0: f64,
    pub nu0: f64,
    pub g0: f64,
    pub h0: f64,
}

impl Default for PriorConfig {
    fn default() -> Self {
        Self {
            lambda0: 10.0,
            r_max: 50,
            alpha0: 1.0,
            mu0: 0.0,
            tau0_2: 100.0,
            n0: 2.0,
            s0: 0.01,
            nu0: 2.0,
            g0: 0.2,
            h0: 0.01,
        }
    }
}

impl PriorConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("lambda0", self.lambda0),
            ("alpha0", self.alpha0),
            ("tau0_2", self.tau0_2),
            ("n0", self.n0),
            ("s0", self.s0),
            ("nu0", self.nu0),
            ("g0", self.g0),
            ("h0", self.h0),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::config(format!("prior {name} must be positive and finite, got {v}")));
            }
        }
        if !self.mu0.is_finite() {
            return Err(Error::config(format!("prior mu0 must be finite, got {}", self.mu0)));
        }
        if self.r_max < 1 {
            return Err(Error::config("prior r_max must be at least 1"));
        }
        Ok(())
    }

    /// Probability of proposing a birth (or split) from `r` components.
    pub fn birth_prob(&self, r: usize) -> f64 {
        if r >= self.r_max {
            0.0
        } else if r <= 1 {
            1.0
        } else {
            0.5
        }
    }

    /// Probability of proposing a death (or combine) from `r` components.
    pub fn death_prob(&self, r: usize) -> f64 {
        if r <= 1 {
            0.0
        } else {
            1.0 - self.birth_prob(r)
        }
    }

    /// Truncated Poisson prior probabilities of `R = 1..=r_max`.
    pub fn r_prior(&self) -> Vec<f64> {
        let mut log_p = Vec::with_capacity(self.r_max);
        let mut acc = 0.0;
        for r in 1..=self.r_max {
            acc += self.lambda0.ln() - (r as f64).ln();
            log_p.push(acc);
        }
        let max = log_p.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let w: Vec<f64> = log_p.iter().map(|l| (l - max).exp()).collect();
        let total: f64 = w.iter().sum();
        w.into_iter().map(|v| v / total).collect()
    }
}
