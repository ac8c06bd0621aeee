//! Quantities computed from chains: Gini coefficients, predictive densities,
//! marginal likelihoods, posterior summaries and the posterior of `R`.

mod gini;
mod marginal;
mod report;
mod summary;

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distributions::IncomeDistribution;
use crate::draws::{DrawParams, DrawRecord, Draws};
use crate::error::{Error, Result};

pub use gini::{gini_lognormal, gini_numeric, gini_of_draw, gini_posterior};
pub use marginal::{harmonic_mean_log_ml, log_marginal_likelihood_hm, LogMarginal, MIN_HM_DRAWS, MIN_HM_ESS};
pub use report::{build_report, Grid, GiniBlock, ParameterSummary, Report, ReportOptions, ReportOutputs};
pub use summary::{half_sample_mode, posterior_summaries, quantile_type7, PosteriorSummary};

/// Fewest draws a conditional (`R = r`) analysis accepts.
pub const MIN_CONDITIONAL_DRAWS: usize = 100;

/// Draws with `R = condition_r`, or all draws when unconditioned.
pub fn select_draws(draws: &Draws, condition_r: Option<usize>) -> Result<Vec<&DrawRecord>> {
    if draws.is_empty() {
        return Err(Error::domain("no draws"));
    }
    match condition_r {
        None => Ok(draws.records.iter().collect()),
        Some(r) => {
            let kept: Vec<&DrawRecord> = draws.records.iter().filter(|d| d.params.r() == r).collect();
            if kept.len() < MIN_CONDITIONAL_DRAWS {
                return Err(Error::Conditioning {
                    requested: r,
                    found: kept.len(),
                    needed: MIN_CONDITIONAL_DRAWS,
                });
            }
            Ok(kept)
        }
    }
}

fn density(params: &DrawParams, x: f64) -> f64 {
    match params {
        DrawParams::Mixture(m) => m.pdf(x),
        DrawParams::Gb2(g) => g.pdf(x),
    }
}

/// Posterior predictive density on `grid`: the pointwise average of the
/// per-draw densities.
pub fn predictive_density(draws: &Draws, grid: &[f64], condition_r: Option<usize>) -> Result<Vec<f64>> {
    if grid.is_empty() {
        return Err(Error::domain("empty predictive grid"));
    }
    if grid.iter().any(|&x| !(x > 0.0 && x.is_finite())) || grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::domain("predictive grid must be positive and strictly increasing"));
    }
    let selected = select_draws(draws, condition_r)?;
    let m = selected.len() as f64;
    Ok(grid
        .par_iter()
        .map(|&x| selected.iter().map(|d| density(&d.params, x)).sum::<f64>() / m)
        .collect())
}

/// Posterior frequencies of `R`, kept as exact counts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RPosterior {
    pub counts: BTreeMap<usize, u64>,
    pub total: u64,
}

impl RPosterior {
    pub fn probability(&self, r: usize) -> f64 {
        self.counts.get(&r).copied().unwrap_or(0) as f64 / self.total as f64
    }

    /// Most frequent `R` (smallest on ties).
    pub fn mode(&self) -> usize {
        let mut best = (0, 0);
        for (&r, &c) in &self.counts {
            if c > best.1 {
                best = (r, c);
            }
        }
        best.0
    }

    pub fn probabilities(&self) -> BTreeMap<usize, f64> {
        self.counts.keys().map(|&r| (r, self.probability(r))).collect()
    }
}

pub fn posterior_of_r(draws: &Draws) -> Result<RPosterior> {
    if draws.is_empty() {
        return Err(Error::domain("no draws"));
    }
    let mut counts = BTreeMap::new();
    for d in &draws.records {
        *counts.entry(d.params.r()).or_insert(0u64) += 1;
    }
    Ok(RPosterior {
        counts,
        total: draws.len() as u64,
    })
}
