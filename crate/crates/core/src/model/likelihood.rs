//! Selected-order-statistics likelihood for grouped data, and the augmented
//! complete-data likelihood used inside the sampler.

use statrs::function::gamma::ln_gamma;

use super::grouped::GroupedData;
use super::latent::LatentState;
use crate::distributions::{Gb2Params, IncomeDistribution, MixtureParams};
use crate::error::Result;

#[inline]
fn ln_factorial(n: usize) -> f64 {
    ln_gamma(n as f64 + 1.0)
}

/// Log of the grouped-data likelihood for any income distribution:
///
/// `n! Π_{k<K} ΔF_k^{n_k−1}/(n_k−1)! f(t_k) · (1 − F(t_{K−1}))^{n_K}/n_K!`
///
/// Returns `−∞` when an increment needed with positive multiplicity has no
/// mass at floating precision.
pub fn log_likelihood<D: IncomeDistribution + ?Sized>(data: &GroupedData, dist: &D) -> f64 {
    let counts = data.counts();
    let t = data.boundaries();
    let top = data.groups() - 1;

    let mut total = ln_factorial(data.n_total());
    for k in 0..top {
        let lo = if k == 0 { 0.0 } else { t[k - 1] };
        let reps = counts[k] - 1;
        if reps > 0 {
            let mass = if k == 0 { dist.cdf(t[0]) } else { dist.interval_mass(lo, t[k]) };
            if !(mass > 0.0) {
                return f64::NEG_INFINITY;
            }
            total += reps as f64 * mass.ln() - ln_factorial(reps);
        }
        total += dist.log_pdf(t[k]);
    }
    let tail = dist.sf(t[top - 1]);
    if !(tail > 0.0) {
        return f64::NEG_INFINITY;
    }
    total += counts[top] as f64 * tail.ln() - ln_factorial(counts[top]);
    if total.is_nan() {
        f64::NEG_INFINITY
    } else {
        total
    }
}

/// Grouped-data log-likelihood of a lognormal mixture.
pub fn log_likelihood_grouped(data: &GroupedData, params: &MixtureParams) -> f64 {
    log_likelihood(data, params)
}

/// Grouped-data log-likelihood of a GB2 distribution.
pub fn log_likelihood_gb2(data: &GroupedData, params: &Gb2Params) -> f64 {
    log_likelihood(data, params)
}

/// Log of the augmented likelihood of `(x, d, z)` given the mixture:
///
/// `Σ_r [ n_r ln π_r − (n_r/2) ln σ_r² − Σ_{i: z_i = r} (ln x_i − μ_r)² / (2σ_r²) ]`
///
/// The omitted additive constant is `−Σ_i ln x_i − (n/2) ln 2π`, which does
/// not depend on the mixture parameters or the allocations.
pub fn log_augmented_likelihood(data: &GroupedData, latent: &LatentState, params: &MixtureParams) -> Result<f64> {
    latent.validate(data, params.len())?;
    Ok(augmented_unchecked(latent.log_x(), latent.z(), params))
}

pub(crate) fn augmented_unchecked(log_x: &[f64], z: &[usize], params: &MixtureParams) -> f64 {
    let r = params.len();
    let mut counts = vec![0usize; r];
    let mut sq = vec![0.0; r];
    for (&lx, &zi) in log_x.iter().zip(z) {
        let d = lx - params.mus()[zi];
        counts[zi] += 1;
        sq[zi] += d * d;
    }
    (0..r)
        .map(|j| {
            let n = counts[j] as f64;
            if counts[j] == 0 {
                0.0
            } else {
                n * params.weights()[j].ln() - 0.5 * n * params.sigma2s()[j].ln() - sq[j] / (2.0 * params.sigma2s()[j])
            }
        })
        .sum()
}
