//! Densities, distribution functions and samplers for the distributions the
//! sampler touches: lognormal, lognormal mixtures, GB2, and the usual
//! conjugate building blocks.

pub mod gb2;
pub mod lognormal;
pub mod mixture;
pub mod normal;
pub mod random;
pub mod truncated;

pub use gb2::{gb2_cdf, gb2_pdf, Gb2Params};
pub use lognormal::{ln_cdf, ln_log_pdf, ln_pdf, LognormalParams};
pub use mixture::{mln_cdf, mln_pdf, MixtureParams};
pub use normal::{std_normal_cdf, std_normal_quantile, std_normal_sf};
pub use random::{
    chain_rng, derive_seed, sample_beta, sample_dirichlet, sample_gamma, sample_log_categorical, sample_normal,
    sample_open01, sample_std_normal, ChainRng,
};
pub use truncated::{sample_truncated_lognormal, sample_truncated_normal};

/// A continuous income distribution on `(0, ∞)`.
pub trait IncomeDistribution: Sync {
    fn pdf(&self, x: f64) -> f64;
    fn cdf(&self, x: f64) -> f64;

    /// `1 − F(x)`; implementors override when they can do better in the tail.
    fn sf(&self, x: f64) -> f64 {
        1.0 - self.cdf(x)
    }

    fn log_pdf(&self, x: f64) -> f64 {
        self.pdf(x).ln()
    }

    /// `F(hi) − F(lo)`, differenced on whichever side of the median keeps precision.
    fn interval_mass(&self, lo: f64, hi: f64) -> f64 {
        if self.cdf(lo) > 0.5 {
            self.sf(lo) - self.sf(hi)
        } else {
            self.cdf(hi) - self.cdf(lo)
        }
    }

    /// Analytic mean when known and finite.
    fn mean(&self) -> Option<f64> {
        None
    }
}
