//! Bayesian estimation of lognormal income mixtures from grouped data.
//!
//! The number of mixture components is unknown and sampled together with
//! the component parameters by reversible-jump MCMC. Grouped data (quantile
//! boundaries with fixed per-group frequencies) enter through the selected
//! order statistics likelihood, and latent incomes make every update
//! conjugate. Posterior output feeds Gini coefficients, predictive densities
//! and harmonic-mean marginal likelihoods, with a GB2 baseline for model
//! comparison.
//!
//! Module map:
//!
//! * [`distributions`] densities, CDFs and samplers
//! * [`model`] grouped data, likelihoods, simulation, Gastwirth bounds
//! * [`rjmcmc`] the trans-dimensional sampler for the mixture
//! * [`gb2`] random-walk Metropolis for the GB2 baseline
//! * [`inference`] Gini, predictive densities, marginal likelihood, summaries
//! * [`draws`] posterior draws and their CSV/JSON persistence

pub mod distributions;
pub mod draws;
pub mod error;
pub mod gb2;
pub mod inference;
pub mod model;
pub mod persist;
pub mod quadrature;
pub mod rjmcmc;

pub use error::{Error, Result};
