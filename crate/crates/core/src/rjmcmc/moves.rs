//! Trans-dimensional moves: birth/death of empty components and
//! split/combine of adjacent components.

use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};
use statrs::function::beta::ln_beta;
use statrs::function::gamma::ln_gamma;

use super::prior::PriorConfig;
use super::state::ChainState;
use crate::distributions::{sample_beta, sample_gamma, sample_normal, MixtureParams};
use crate::error::Result;

/// Which move was attempted in a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MoveKind {
    Birth,
    Death,
    Split,
    Combine,
    /// Nothing proposable: death with no empty component, or `R_max = 1`.
    Skip,
}

impl MoveKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            MoveKind::Birth => "birth",
            MoveKind::Death => "death",
            MoveKind::Split => "split",
            MoveKind::Combine => "combine",
            MoveKind::Skip => "skip",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "birth" => MoveKind::Birth,
            "death" => MoveKind::Death,
            "split" => MoveKind::Split,
            "combine" => MoveKind::Combine,
            "skip" => MoveKind::Skip,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MoveOutcome {
    pub kind: MoveKind,
    pub accepted: bool,
}

impl MoveOutcome {
    fn new(kind: MoveKind, accepted: bool) -> Self {
        Self { kind, accepted }
    }
}

/// One mixture component `(π, μ, σ²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Component {
    pub weight: f64,
    pub mu: f64,
    pub sigma2: f64,
}

// ---------------------------------------------------------------- birth/death

/// Log acceptance ratio of a birth from `r` components (with `r0` empty)
/// creating a component of weight `w`, for a dataset of `n` points.
pub fn birth_log_acceptance(prior: &PriorConfig, r: usize, r0: usize, n: usize, w: f64) -> f64 {
    let rf = r as f64;
    let a0 = prior.alpha0;
    let log_g = rf.ln() + (rf - 1.0) * (1.0 - w).ln();
    (prior.lambda0 / (rf + 1.0)).ln() - ln_beta(rf * a0, a0) + (a0 - 1.0) * w.ln()
        + (n as f64 + rf * a0 - rf) * (1.0 - w).ln()
        + (rf + 1.0).ln()
        + prior.death_prob(r + 1).ln()
        - ((r0 + 1) as f64).ln()
        - prior.birth_prob(r).ln()
        - log_g
        + (rf - 1.0) * (1.0 - w).ln()
}

/// Birth of a new empty component or death of an existing empty one.
pub fn birth_death_move<R: Rng + ?Sized>(state: &mut ChainState, prior: &PriorConfig, rng: &mut R) -> Result<MoveOutcome> {
    let r = state.r();
    let b = prior.birth_prob(r);
    if b == 0.0 && prior.death_prob(r) == 0.0 {
        return Ok(MoveOutcome::new(MoveKind::Skip, false));
    }
    let n = state.latent.len();
    if rng.random::<f64>() < b {
        let w = sample_beta(rng, 1.0, r as f64)?;
        let mu = sample_normal(rng, state.mu, state.tau2)?;
        let sigma2 = 1.0 / sample_gamma(rng, prior.nu0, state.beta)?;
        let r0 = state.counts.iter().filter(|&&c| c == 0).count();
        let log_a = birth_log_acceptance(prior, r, r0, n, w);
        if !accept(rng, log_a) || state.params.mus().contains(&mu) {
            return Ok(MoveOutcome::new(MoveKind::Birth, false));
        }
        let pos = state.params.mus().partition_point(|&m| m < mu);
        let (weights, mus, sigma2s) = state.params.parts_mut();
        weights.iter_mut().for_each(|v| *v *= 1.0 - w);
        weights.insert(pos, w);
        mus.insert(pos, mu);
        sigma2s.insert(pos, sigma2);
        renormalize(weights);
        state.counts.insert(pos, 0);
        for z in state.latent.z_mut().iter_mut() {
            if *z >= pos {
                *z += 1;
            }
        }
        Ok(MoveOutcome::new(MoveKind::Birth, true))
    } else {
        let empty: Vec<usize> = (0..r).filter(|&j| state.counts[j] == 0).collect();
        if empty.is_empty() {
            return Ok(MoveOutcome::new(MoveKind::Skip, false));
        }
        let j = empty[rng.random_range(0..empty.len())];
        let w = state.params.weights()[j];
        let log_a = birth_log_acceptance(prior, r - 1, empty.len() - 1, n, w);
        if !accept(rng, -log_a) {
            return Ok(MoveOutcome::new(MoveKind::Death, false));
        }
        let (weights, mus, sigma2s) = state.params.parts_mut();
        weights.remove(j);
        mus.remove(j);
        sigma2s.remove(j);
        weights.iter_mut().for_each(|v| *v /= 1.0 - w);
        renormalize(weights);
        state.counts.remove(j);
        for z in state.latent.z_mut().iter_mut() {
            if *z > j {
                *z -= 1;
            }
        }
        Ok(MoveOutcome::new(MoveKind::Death, true))
    }
}

// -------------------------------------------------------------- split/combine

/// Moment-matched merge of two components.
pub fn combine_components(c1: Component, c2: Component) -> Component {
    let weight = c1.weight + c2.weight;
    let mu = (c1.weight * c1.mu + c2.weight * c2.mu) / weight;
    // Second moment about the merged mean; avoids E[y²] − μ² cancellation.
    let (d1, d2) = (c1.mu - mu, c2.mu - mu);
    Component {
        weight,
        mu,
        sigma2: (c1.weight * (c1.sigma2 + d1 * d1) + c2.weight * (c2.sigma2 + d2 * d2)) / weight,
    }
}

/// Split of `c` driven by `u = (u1, u2, u3) ∈ (0,1)³`.
pub fn split_component(c: Component, u: [f64; 3]) -> (Component, Component) {
    let [u1, u2, u3] = u;
    let w1 = c.weight * u1;
    let w2 = c.weight * (1.0 - u1);
    let sd = c.sigma2.sqrt();
    let mu1 = c.mu - u2 * sd * (w2 / w1).sqrt();
    let mu2 = c.mu + u2 * sd * (w1 / w2).sqrt();
    let shrink = (1.0 - u2 * u2) * c.sigma2 * c.weight;
    (
        Component {
            weight: w1,
            mu: mu1,
            sigma2: u3 * shrink / w1,
        },
        Component {
            weight: w2,
            mu: mu2,
            sigma2: (1.0 - u3) * shrink / w2,
        },
    )
}

/// The `u` that maps `merged` onto `(c1, c2)` under [`split_component`].
pub fn recover_split_variables(merged: Component, c1: Component, c2: Component) -> [f64; 3] {
    let u1 = c1.weight / merged.weight;
    let u2 = (c2.mu - c1.mu) / (merged.sigma2.sqrt() * ((c1.weight / c2.weight).sqrt() + (c2.weight / c1.weight).sqrt()));
    // (1 − u2²) σ² π = π1 σ1² + π2 σ2².
    let u3 = c1.sigma2 * c1.weight / (c1.sigma2 * c1.weight + c2.sigma2 * c2.weight);
    [u1, u2, u3]
}

/// Log of `|∂(π1, μ1, σ1², π2, μ2, σ2²) / ∂(π, μ, σ², u1, u2, u3)|`,
/// equal to `π |μ1 − μ2| σ1² σ2² / (u2 (1 − u2²) u3 (1 − u3) σ²)`.
pub fn split_log_jacobian(merged: Component, c1: Component, c2: Component, u: [f64; 3]) -> f64 {
    let [_, u2, u3] = u;
    merged.weight.ln() + (c2.mu - c1.mu).abs().ln() + c1.sigma2.ln() + c2.sigma2.ln()
        - u2.ln()
        - (1.0 - u2 * u2).ln()
        - u3.ln()
        - (1.0 - u3).ln()
        - merged.sigma2.ln()
}

/// Inputs of the split acceptance ratio that depend on the data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitData {
    /// `Σ ln N(y | θ_new) − Σ ln N(y | θ_merged)` over the affected points.
    pub log_lik_ratio: f64,
    pub l1: usize,
    pub l2: usize,
    /// Log probability of the realised reallocation.
    pub log_p_alloc: f64,
}

/// Log acceptance ratio for splitting `merged` into `(c1, c2)` when the
/// state has `r` components before the split.
#[allow(clippy::too_many_arguments)]
pub fn split_log_acceptance(
    prior: &PriorConfig,
    r: usize,
    mu: f64,
    tau2: f64,
    beta: f64,
    merged: Component,
    c1: Component,
    c2: Component,
    u: [f64; 3],
    data: SplitData,
) -> f64 {
    let rf = r as f64;
    let a0 = prior.alpha0;
    let (l1, l2) = (data.l1 as f64, data.l2 as f64);
    let log_prior_r = (prior.lambda0 / (rf + 1.0)).ln() + (rf + 1.0).ln();
    let log_weights = (a0 - 1.0 + l1) * c1.weight.ln() + (a0 - 1.0 + l2) * c2.weight.ln()
        - (a0 - 1.0 + l1 + l2) * merged.weight.ln()
        - ln_beta(a0, rf * a0);
    let log_means = -0.5 * (2.0 * PI * tau2).ln()
        - ((c1.mu - mu).powi(2) + (c2.mu - mu).powi(2) - (merged.mu - mu).powi(2)) / (2.0 * tau2);
    let nu0 = prior.nu0;
    let log_vars = nu0 * beta.ln() - ln_gamma(nu0) - (nu0 + 1.0) * (c1.sigma2 * c2.sigma2 / merged.sigma2).ln()
        - beta * (1.0 / c1.sigma2 + 1.0 / c2.sigma2 - 1.0 / merged.sigma2);
    // u3 ~ Beta(1, 1) contributes a unit density.
    let log_proposal =
        prior.death_prob(r + 1).ln() - prior.birth_prob(r).ln() - data.log_p_alloc - log_beta22(u[0]) - log_beta22(u[1]);
    data.log_lik_ratio
        + log_prior_r
        + log_weights
        + log_means
        + log_vars
        + log_proposal
        + split_log_jacobian(merged, c1, c2, u)
}

/// Log density of Beta(2, 2).
fn log_beta22(u: f64) -> f64 {
    6f64.ln() + u.ln() + (1.0 - u).ln()
}

#[inline]
fn log_normal_kernel(y: f64, c: &Component) -> f64 {
    let d = y - c.mu;
    -0.5 * c.sigma2.ln() - d * d / (2.0 * c.sigma2)
}

/// Allocation probability of `y` to the first of two components, in logs:
/// `(ln P(first), ln P(second))`.
fn split_allocation_logs(y: f64, c1: &Component, c2: &Component) -> (f64, f64) {
    let a = c1.weight.ln() + log_normal_kernel(y, c1);
    let b = c2.weight.ln() + log_normal_kernel(y, c2);
    let m = a.max(b);
    let log_total = m + ((a - m).exp() + (b - m).exp()).ln();
    (a - log_total, b - log_total)
}

fn component(params: &MixtureParams, j: usize) -> Component {
    Component {
        weight: params.weights()[j],
        mu: params.mus()[j],
        sigma2: params.sigma2s()[j],
    }
}

/// Split one component into two adjacent ones, or combine an adjacent pair.
pub fn split_combine_move<R: Rng + ?Sized>(state: &mut ChainState, prior: &PriorConfig, rng: &mut R) -> Result<MoveOutcome> {
    let r = state.r();
    let b = prior.birth_prob(r);
    if b == 0.0 && prior.death_prob(r) == 0.0 {
        return Ok(MoveOutcome::new(MoveKind::Skip, false));
    }
    if rng.random::<f64>() < b {
        split(state, prior, rng)
    } else {
        combine(state, prior, rng)
    }
}

fn split<R: Rng + ?Sized>(state: &mut ChainState, prior: &PriorConfig, rng: &mut R) -> Result<MoveOutcome> {
    let r = state.r();
    let j = rng.random_range(0..r);
    let merged = component(&state.params, j);
    let u = [sample_beta(rng, 2.0, 2.0)?, sample_beta(rng, 2.0, 2.0)?, sample_beta(rng, 1.0, 1.0)?];
    let (c1, c2) = split_component(merged, u);
    let lo_ok = j == 0 || c1.mu > state.params.mus()[j - 1];
    let hi_ok = j + 1 == r || c2.mu < state.params.mus()[j + 1];
    let finite = c1.sigma2 > 0.0 && c2.sigma2 > 0.0 && c1.weight > 0.0 && c2.weight > 0.0 && c1.mu < c2.mu;
    if !(lo_ok && hi_ok && finite) {
        return Ok(MoveOutcome::new(MoveKind::Split, false));
    }

    let mut moved: Vec<(usize, bool)> = Vec::with_capacity(state.counts[j]);
    let mut data = SplitData {
        log_lik_ratio: 0.0,
        l1: 0,
        l2: 0,
        log_p_alloc: 0.0,
    };
    for (i, (&y, &z)) in state.latent.log_x().iter().zip(state.latent.z()).enumerate() {
        if z != j {
            continue;
        }
        let (p1, p2) = split_allocation_logs(y, &c1, &c2);
        let first = rng.random::<f64>() < p1.exp();
        let chosen = if first { &c1 } else { &c2 };
        data.log_p_alloc += if first { p1 } else { p2 };
        data.log_lik_ratio += log_normal_kernel(y, chosen) - log_normal_kernel(y, &merged);
        if first {
            data.l1 += 1;
        } else {
            data.l2 += 1;
        }
        moved.push((i, first));
    }
    let log_a = split_log_acceptance(prior, r, state.mu, state.tau2, state.beta, merged, c1, c2, u, data);
    if !accept(rng, log_a) {
        return Ok(MoveOutcome::new(MoveKind::Split, false));
    }

    let (weights, mus, sigma2s) = state.params.parts_mut();
    weights[j] = c1.weight;
    mus[j] = c1.mu;
    sigma2s[j] = c1.sigma2;
    weights.insert(j + 1, c2.weight);
    mus.insert(j + 1, c2.mu);
    sigma2s.insert(j + 1, c2.sigma2);
    renormalize(weights);
    for z in state.latent.z_mut().iter_mut() {
        if *z > j {
            *z += 1;
        }
    }
    for (i, first) in moved {
        state.latent.z_mut()[i] = if first { j } else { j + 1 };
    }
    state.counts[j] = data.l1;
    state.counts.insert(j + 1, data.l2);
    Ok(MoveOutcome::new(MoveKind::Split, true))
}

fn combine<R: Rng + ?Sized>(state: &mut ChainState, prior: &PriorConfig, rng: &mut R) -> Result<MoveOutcome> {
    let r = state.r();
    let j = rng.random_range(0..r - 1);
    let c1 = component(&state.params, j);
    let c2 = component(&state.params, j + 1);
    let merged = combine_components(c1, c2);
    let u = recover_split_variables(merged, c1, c2);
    if !(merged.sigma2 > 0.0) || u.iter().any(|&v| !(v > 0.0 && v < 1.0)) {
        return Ok(MoveOutcome::new(MoveKind::Combine, false));
    }

    let mut data = SplitData {
        log_lik_ratio: 0.0,
        l1: state.counts[j],
        l2: state.counts[j + 1],
        log_p_alloc: 0.0,
    };
    for (&y, &z) in state.latent.log_x().iter().zip(state.latent.z()) {
        if z != j && z != j + 1 {
            continue;
        }
        let (p1, p2) = split_allocation_logs(y, &c1, &c2);
        let chosen = if z == j { &c1 } else { &c2 };
        data.log_p_alloc += if z == j { p1 } else { p2 };
        data.log_lik_ratio += log_normal_kernel(y, chosen) - log_normal_kernel(y, &merged);
    }
    let log_a = split_log_acceptance(prior, r - 1, state.mu, state.tau2, state.beta, merged, c1, c2, u, data);
    if !accept(rng, -log_a) {
        return Ok(MoveOutcome::new(MoveKind::Combine, false));
    }

    let (weights, mus, sigma2s) = state.params.parts_mut();
    weights[j] = merged.weight;
    mus[j] = merged.mu;
    sigma2s[j] = merged.sigma2;
    weights.remove(j + 1);
    mus.remove(j + 1);
    sigma2s.remove(j + 1);
    renormalize(weights);
    for z in state.latent.z_mut().iter_mut() {
        if *z > j {
            *z -= 1;
        }
    }
    state.counts[j] += state.counts[j + 1];
    state.counts.remove(j + 1);
    Ok(MoveOutcome::new(MoveKind::Combine, true))
}

/// Metropolis–Hastings accept step on the log scale.
fn accept<R: Rng + ?Sized>(rng: &mut R, log_a: f64) -> bool {
    if log_a.is_nan() {
        return false;
    }
    log_a >= 0.0 || rng.random::<f64>().ln() < log_a
}

/// Restore `Σ π = 1` after a rescaling step accumulates rounding.
fn renormalize(weights: &mut [f64]) {
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= total);
}
