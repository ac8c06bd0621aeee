use rand::Rng;

use super::prior::PriorConfig;
use crate::distributions::MixtureParams;
use crate::error::{Error, Result};
use crate::model::{GroupedData, LatentState};

/// Tolerance on `Σ π_r = 1` checked after every sweep.
pub const SWEEP_WEIGHT_TOL: f64 = 1e-10;

/// Everything the sampler updates: mixture parameters, latent incomes and
/// allocations, and the hyper-parameters `μ`, `τ²`, `β`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainState {
    pub(crate) params: MixtureParams,
    pub(crate) latent: LatentState,
    pub(crate) mu: f64,
    pub(crate) tau2: f64,
    pub(crate) beta: f64,
    /// Allocation counts `n_r`, kept in step with `latent.z`.
    pub(crate) counts: Vec<usize>,
}

impl ChainState {
    /// Assemble a state and check it against `data`.
    pub fn new(
        data: &GroupedData,
        params: MixtureParams,
        latent: LatentState,
        mu: f64,
        tau2: f64,
        beta: f64,
    ) -> Result<Self> {
        let counts = latent.counts(params.len());
        let state = Self {
            params,
            latent,
            mu,
            tau2,
            beta,
            counts,
        };
        state.check_invariants(Some(data))?;
        Ok(state)
    }

    /// Starting state: `r` components, incomes at group midpoints, labels
    /// uniform, hyper-parameters at their prior means.
    ///
    /// Component `j` starts at the `(j + 1/2)/r` quantile of the initial
    /// log-incomes with their pooled variance and equal weights.
    pub fn initial<R: Rng + ?Sized>(data: &GroupedData, prior: &PriorConfig, r: usize, rng: &mut R) -> Result<Self> {
        if r < 1 || r > prior.r_max {
            return Err(Error::config(format!("initial R = {r} outside 1..={}", prior.r_max)));
        }
        let latent = LatentState::initial(data, r, rng);
        let params = spread_components(latent.log_x(), r);
        let counts = latent.counts(r);
        Ok(Self {
            params,
            latent,
            mu: prior.mu0,
            tau2: prior.s0 / prior.n0,
            beta: prior.g0 / prior.h0,
            counts,
        })
    }

    /// Starting state with no observations, for prior-only runs.
    pub fn prior_only(prior: &PriorConfig, r: usize) -> Result<Self> {
        if r < 1 || r > prior.r_max {
            return Err(Error::config(format!("initial R = {r} outside 1..={}", prior.r_max)));
        }
        Ok(Self {
            params: spread_components(&[], r),
            latent: LatentState::empty(),
            mu: prior.mu0,
            tau2: prior.s0 / prior.n0,
            beta: prior.g0 / prior.h0,
            counts: vec![0; r],
        })
    }

    pub fn params(&self) -> &MixtureParams {
        &self.params
    }

    pub fn latent(&self) -> &LatentState {
        &self.latent
    }

    pub fn r(&self) -> usize {
        self.params.len()
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn tau2(&self) -> f64 {
        self.tau2
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    /// Per-sweep invariants: weights sum to one, log-means strictly
    /// increasing, positive variances and hyper-parameters, counts matching
    /// the allocations, and (given data) latent containment and pinning.
    pub fn check_invariants(&self, data: Option<&GroupedData>) -> Result<()> {
        let r = self.r();
        let total: f64 = self.params.weights().iter().sum();
        if (total - 1.0).abs() > SWEEP_WEIGHT_TOL {
            return Err(Error::invariant(format!("weights sum to {total}")));
        }
        if self.params.weights().iter().any(|&w| !(w > 0.0)) {
            return Err(Error::invariant(format!("non-positive weight in {:?}", self.params.weights())));
        }
        if self.params.mus().windows(2).any(|w| !(w[0] < w[1])) || self.params.mus().iter().any(|m| !m.is_finite()) {
            return Err(Error::invariant(format!("log-means not strictly increasing: {:?}", self.params.mus())));
        }
        if self.params.sigma2s().iter().any(|&s| !(s > 0.0 && s.is_finite())) {
            return Err(Error::invariant(format!("non-positive variance in {:?}", self.params.sigma2s())));
        }
        if !(self.tau2 > 0.0 && self.tau2.is_finite()) || !(self.beta > 0.0 && self.beta.is_finite()) || !self.mu.is_finite() {
            return Err(Error::invariant(format!(
                "hyper-parameters out of range: mu={}, tau2={}, beta={}",
                self.mu, self.tau2, self.beta
            )));
        }
        if self.latent.z().iter().any(|&z| z >= r) {
            return Err(Error::invariant("allocation label beyond R"));
        }
        if self.counts != self.latent.counts(r) {
            return Err(Error::invariant(format!("counts {:?} disagree with allocations", self.counts)));
        }
        if let Some(data) = data {
            self.latent.validate(data, r)?;
        }
        Ok(())
    }
}

fn spread_components(log_x: &[f64], r: usize) -> MixtureParams {
    let weights = vec![1.0 / r as f64; r];
    if log_x.len() < 2 {
        let mus = (0..r).map(|j| j as f64).collect();
        return MixtureParams::from_parts_unchecked(weights, mus, vec![1.0; r]);
    }
    let mut sorted = log_x.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mean = sorted.iter().sum::<f64>() / n;
    let var = (sorted.iter().map(|y| (y - mean) * (y - mean)).sum::<f64>() / (n - 1.0)).max(1e-6);
    let mut mus: Vec<f64> = (0..r)
        .map(|j| sorted[(((j as f64 + 0.5) / r as f64) * n) as usize])
        .collect();
    // Tied quantiles would break the strict ordering.
    for j in 1..r {
        if mus[j] <= mus[j - 1] {
            mus[j] = mus[j - 1] + 1e-3 * var.sqrt();
        }
    }
    MixtureParams::from_parts_unchecked(weights, mus, vec![var; r])
}
