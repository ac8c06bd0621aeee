//! Grouped data, the likelihoods built on it, simulation of grouped datasets
//! and Gastwirth's nonparametric Gini bounds.

pub mod gastwirth;
pub mod grouped;
pub mod latent;
pub mod likelihood;
pub mod simulate;

pub use crate::distributions::MixtureParams;
pub use gastwirth::{gastwirth_bounds, sample_gini, GiniBounds};
pub use grouped::GroupedData;
pub use latent::LatentState;
pub use likelihood::{log_augmented_likelihood, log_likelihood, log_likelihood_gb2, log_likelihood_grouped};
pub use simulate::{simulate_grouped, Dgp, SimulatedData};
