use std::collections::BTreeMap;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{
    gini_posterior, log_marginal_likelihood_hm, posterior_of_r, posterior_summaries, predictive_density, select_draws,
    LogMarginal, PosteriorSummary, RPosterior,
};
use crate::draws::{DrawParams, Draws, ModelKind};
use crate::error::{Error, Result};
use crate::model::{gastwirth_bounds, GiniBounds, GroupedData};

/// Evenly spaced grid `lo:hi:steps`, both ends included.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub lo: f64,
    pub hi: f64,
    pub steps: usize,
}

impl Grid {
    pub fn points(&self) -> Vec<f64> {
        if self.steps == 1 {
            return vec![self.lo];
        }
        let h = (self.hi - self.lo) / (self.steps - 1) as f64;
        (0..self.steps).map(|i| self.lo + h * i as f64).collect()
    }
}

impl FromStr for Grid {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let bad = || Error::Parse(format!("grid {s:?} is not lo:hi:steps"));
        if parts.len() != 3 {
            return Err(bad());
        }
        let lo: f64 = parts[0].trim().parse().map_err(|_| bad())?;
        let hi: f64 = parts[1].trim().parse().map_err(|_| bad())?;
        let steps: usize = parts[2].trim().parse().map_err(|_| bad())?;
        if !(lo > 0.0 && hi > lo && hi.is_finite()) || steps < 2 {
            return Err(Error::Parse(format!("grid {s:?} needs 0 < lo < hi and at least 2 steps")));
        }
        Ok(Grid { lo, hi, steps })
    }
}

#[derive(Debug, Clone, Default)]
pub struct ReportOptions {
    pub condition_r: Option<usize>,
    pub grid: Option<Grid>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterSummary {
    pub name: String,
    #[serde(flatten)]
    pub summary: PosteriorSummary,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GiniBlock {
    pub mean: f64,
    pub sd: f64,
    pub mode: f64,
    pub ci95: [f64; 2],
}

/// The summary JSON document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub model: ModelKind,
    #[serde(rename = "condition_R")]
    pub condition_r: Option<usize>,
    pub draws: usize,
    pub parameters: Vec<ParameterSummary>,
    pub gini: GiniBlock,
    pub log_ml: Option<LogMarginal>,
    pub r_posterior: BTreeMap<usize, f64>,
    pub gastwirth: Option<GiniBounds>,
    pub warnings: Vec<String>,
}

/// Report plus the per-draw and per-grid tables behind it.
#[derive(Debug, Clone)]
pub struct ReportOutputs {
    pub report: Report,
    pub gini_draws: Vec<f64>,
    pub predictive: Option<Vec<(f64, f64)>>,
    pub r_posterior: RPosterior,
}

fn parameter_columns(draws: &Draws, condition_r: Option<usize>) -> Result<Vec<(String, Vec<f64>)>> {
    let selected = select_draws(draws, condition_r)?;
    let mut cols: Vec<(String, Vec<f64>)> = Vec::new();
    let mut push = |name: String, vals: Vec<f64>| cols.push((name, vals));
    match (draws.model(), condition_r) {
        (ModelKind::Gb2, _) => {
            for (i, name) in crate::gb2::PARAM_NAMES.iter().enumerate() {
                let vals = selected
                    .iter()
                    .map(|d| match &d.params {
                        DrawParams::Gb2(g) => [g.a, g.b, g.p, g.q][i],
                        DrawParams::Mixture(_) => f64::NAN,
                    })
                    .collect();
                push(name.to_string(), vals);
            }
        }
        (ModelKind::Mln, Some(r)) => {
            let mixtures: Vec<_> = selected
                .iter()
                .filter_map(|d| match &d.params {
                    DrawParams::Mixture(m) => Some(m),
                    DrawParams::Gb2(_) => None,
                })
                .collect();
            for j in 0..r {
                push(format!("pi_{}", j + 1), mixtures.iter().map(|m| m.weights()[j]).collect());
            }
            for j in 0..r {
                push(format!("mu_{}", j + 1), mixtures.iter().map(|m| m.mus()[j]).collect());
            }
            for j in 0..r {
                push(format!("sigma2_{}", j + 1), mixtures.iter().map(|m| m.sigma2s()[j]).collect());
            }
        }
        (ModelKind::Mln, None) => {
            push("R".into(), selected.iter().map(|d| d.params.r() as f64).collect());
        }
    }
    if draws.model() == ModelKind::Mln {
        let hypers: Vec<_> = selected.iter().filter_map(|d| d.hypers).collect();
        if hypers.len() == selected.len() {
            push("mu".into(), hypers.iter().map(|h| h.mu).collect());
            push("tau2".into(), hypers.iter().map(|h| h.tau2).collect());
            push("beta".into(), hypers.iter().map(|h| h.beta).collect());
        }
    }
    Ok(cols)
}

/// Materialise every inference output for a (pooled) chain.
pub fn build_report(draws: &Draws, data: &GroupedData, options: &ReportOptions) -> Result<ReportOutputs> {
    let hash = data.content_hash();
    if draws.meta.data_hash != hash {
        return Err(Error::domain(format!(
            "draws were fitted to data with hash {}, but the supplied data hash is {hash}",
            draws.meta.data_hash
        )));
    }
    let cond = options.condition_r;
    let parameters = parameter_columns(draws, cond)?
        .into_iter()
        .map(|(name, vals)| posterior_summaries(&vals, 0.95).map(|summary| ParameterSummary { name, summary }))
        .collect::<Result<Vec<_>>>()?;

    let gini_draws = gini_posterior(draws, cond)?;
    let g = posterior_summaries(&gini_draws, 0.95)?;
    let log_ml = if draws.meta.prior_only {
        None
    } else {
        Some(log_marginal_likelihood_hm(draws, cond)?)
    };
    let r_posterior = posterior_of_r(draws)?;
    let gastwirth = match data.group_means() {
        Some(_) => Some(gastwirth_bounds(data)?),
        None => None,
    };
    let predictive = match options.grid {
        Some(grid) => {
            let xs = grid.points();
            let ys = predictive_density(draws, &xs, cond)?;
            Some(xs.into_iter().zip(ys).collect())
        }
        None => None,
    };
    let mut warnings = draws.meta.warnings.clone();
    if let Some(w) = log_ml.as_ref().and_then(|l| l.warning.clone()) {
        warnings.push(w);
    }
    Ok(ReportOutputs {
        report: Report {
            model: draws.model(),
            condition_r: cond,
            draws: gini_draws.len(),
            parameters,
            gini: GiniBlock {
                mean: g.mean,
                sd: g.sd,
                mode: g.mode,
                ci95: [g.lower, g.upper],
            },
            log_ml,
            r_posterior: r_posterior.probabilities(),
            gastwirth,
            warnings,
        },
        gini_draws,
        predictive,
        r_posterior,
    })
}
