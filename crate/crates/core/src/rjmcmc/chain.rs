use std::collections::BTreeMap;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::gibbs::{update_allocations, update_components, update_hypers, update_latent_incomes, update_weights};
use super::moves::{birth_death_move, split_combine_move, MoveKind, MoveOutcome};
use super::prior::PriorConfig;
use super::state::ChainState;
use crate::distributions::{chain_rng, ChainRng};
use crate::draws::{DrawParams, DrawRecord, Draws, Hypers, ModelKind, RunMetadata, Tally};
use crate::error::{Error, Result};
use crate::model::{log_likelihood_grouped, GroupedData};

/// Run-length and mode settings for [`run_chain`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub iterations: u64,
    pub burn_in: u64,
    pub thin: u64,
    pub seed: u64,
    pub initial_r: usize,
    /// Keep `R` at `initial_r`: no birth/death or split/combine.
    pub fixed_r: bool,
    /// Drop the likelihood: no latent incomes, every component empty.
    pub prior_only: bool,
    /// Check every per-sweep invariant (slow; for testing).
    pub check_invariants: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            iterations: 100_000,
            burn_in: 20_000,
            thin: 10,
            seed: 1,
            initial_r: 1,
            fixed_r: false,
            prior_only: false,
            check_invariants: false,
        }
    }
}

impl RunConfig {
    pub fn validate(&self, prior: &PriorConfig) -> Result<()> {
        if self.iterations == 0 {
            return Err(Error::config("iterations must be positive"));
        }
        if self.burn_in >= self.iterations {
            return Err(Error::config(format!(
                "burn-in {} must be below the iteration count {}",
                self.burn_in, self.iterations
            )));
        }
        if self.thin == 0 {
            return Err(Error::config("thin must be positive"));
        }
        if self.initial_r < 1 || self.initial_r > prior.r_max {
            return Err(Error::config(format!("initial R = {} outside 1..={}", self.initial_r, prior.r_max)));
        }
        Ok(())
    }

    /// Whether iteration `t` (1-based) is kept.
    pub fn keeps(&self, t: u64) -> bool {
        t > self.burn_in && (t - self.burn_in) % self.thin == 0
    }
}

/// One full sweep: birth/death, split/combine, weights, components,
/// allocations, latent incomes, hyper-parameters.
pub fn sweep(
    state: &mut ChainState,
    data: Option<&GroupedData>,
    prior: &PriorConfig,
    fixed_r: bool,
    rng: &mut ChainRng,
) -> Result<[MoveOutcome; 2]> {
    let skip = MoveOutcome {
        kind: MoveKind::Skip,
        accepted: false,
    };
    let moves = if fixed_r {
        [skip, skip]
    } else {
        [birth_death_move(state, prior, rng)?, split_combine_move(state, prior, rng)?]
    };
    update_weights(state, prior, rng)?;
    update_components(state, prior, rng)?;
    if let Some(data) = data {
        update_allocations(state, rng);
        update_latent_incomes(state, data, rng)?;
    }
    update_hypers(state, prior, rng)?;
    Ok(moves)
}

/// Run the reversible-jump sampler and keep thinned post-burn-in draws.
pub fn run_chain(data: &GroupedData, prior: &PriorConfig, config: &RunConfig) -> Result<Draws> {
    prior.validate()?;
    config.validate(prior)?;
    let started = Instant::now();
    let mut rng = chain_rng(config.seed, 0);
    let mut state = if config.prior_only {
        ChainState::prior_only(prior, config.initial_r)?
    } else {
        ChainState::initial(data, prior, config.initial_r, &mut rng)?
    };
    let sweep_data = (!config.prior_only).then_some(data);

    let kept = ((config.iterations - config.burn_in) / config.thin) as usize;
    let mut records = Vec::with_capacity(kept);
    let mut acceptance: BTreeMap<String, Tally> = BTreeMap::new();
    for t in 1..=config.iterations {
        let moves = sweep(&mut state, sweep_data, prior, config.fixed_r, &mut rng)
            .map_err(|e| e.context(format!("sweep {t} (seed {})", config.seed)))?;
        if config.check_invariants {
            state
                .check_invariants(sweep_data)
                .map_err(|e| e.context(format!("after sweep {t}")))?;
        }
        if t > config.burn_in {
            for mv in moves {
                if mv.kind != MoveKind::Skip {
                    acceptance.entry(mv.kind.as_str().to_string()).or_default().record(mv.accepted);
                }
            }
        }
        if config.keeps(t) {
            let log_lik = if config.prior_only {
                0.0
            } else {
                log_likelihood_grouped(data, &state.params)
            };
            records.push(DrawRecord {
                iteration: t,
                log_lik,
                params: DrawParams::Mixture(state.params.clone()),
                hypers: Some(Hypers {
                    mu: state.mu,
                    tau2: state.tau2,
                    beta: state.beta,
                }),
                moves: Some(moves),
            });
        }
    }

    Ok(Draws {
        meta: RunMetadata {
            model: ModelKind::Mln,
            seed: config.seed,
            iterations: config.iterations,
            burn_in: config.burn_in,
            thin: config.thin,
            prior: Some(prior.clone()),
            gb2_config: None,
            gb2_step_sizes: None,
            initial_r: config.initial_r,
            fixed_r: config.fixed_r,
            prior_only: config.prior_only,
            acceptance,
            data_hash: data.content_hash(),
            warnings: Vec::new(),
            wall_time_secs: started.elapsed().as_secs_f64(),
        },
        records,
    })
}
