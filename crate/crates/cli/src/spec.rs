//! TOML schemas for the simulation spec.
//!
//! ```toml
//! n = 10000
//! groups = 10
//!
//! [dgp]
//! family = "mixture"          # or "gb2" with keys a, b, p, q
//! weights = [0.2, 0.5, 0.3]
//! mus = [2.0, 3.0, 4.0]
//! sigma2s = [0.3, 0.1, 0.2]
//! ```

use std::path::Path;

use anyhow::{Context, Result};
use lnmix::distributions::{Gb2Params, MixtureParams};
use lnmix::model::Dgp;
use serde::Deserialize;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationSpec {
    pub n: usize,
    pub groups: usize,
    pub dgp: DgpSpec,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase", deny_unknown_fields)]
pub enum DgpSpec {
    Mixture {
        weights: Vec<f64>,
        mus: Vec<f64>,
        sigma2s: Vec<f64>,
    },
    Gb2 {
        a: f64,
        b: f64,
        p: f64,
        q: f64,
    },
}

impl DgpSpec {
    pub fn to_dgp(&self) -> lnmix::Result<Dgp> {
        Ok(match self {
            DgpSpec::Mixture { weights, mus, sigma2s } => {
                Dgp::mixture(&MixtureParams::new(weights.clone(), mus.clone(), sigma2s.clone())?)
            }
            DgpSpec::Gb2 { a, b, p, q } => Dgp::gb2(&Gb2Params::new(*a, *b, *p, *q)?),
        })
    }
}

/// Parse a TOML file into `T`; parse errors carry the line and column.
pub fn read_toml<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}
