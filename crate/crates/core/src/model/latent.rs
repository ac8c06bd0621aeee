use rand::Rng;

use super::grouped::GroupedData;
use crate::error::{Error, Result};

/// Latent incomes with their component and group labels, all 0-based.
///
/// The last slot of every bounded group holds its upper boundary exactly and
/// is never resampled. `log_x[i]` is always `x[i].ln()`.
#[derive(Debug, Clone, PartialEq)]
pub struct LatentState {
    x: Vec<f64>,
    log_x: Vec<f64>,
    z: Vec<usize>,
    d: Vec<usize>,
}

impl LatentState {
    /// Build and validate a latent state against `data` and `r` components.
    pub fn new(data: &GroupedData, x: Vec<f64>, z: Vec<usize>, r: usize) -> Result<Self> {
        let log_x = x.iter().map(|v| v.ln()).collect();
        let state = Self {
            x,
            log_x,
            z,
            d: group_labels(data),
        };
        state.validate(data, r)?;
        Ok(state)
    }

    /// Starting point for a chain: incomes at group geometric midpoints, the
    /// open ends at `t_1 / 1.5` and `t_{K−1} · 1.5`, labels uniform on `0..r`.
    pub fn initial<R: Rng + ?Sized>(data: &GroupedData, r: usize, rng: &mut R) -> Self {
        let k_top = data.groups() - 1;
        let mut x = Vec::with_capacity(data.n_total());
        for k in 0..data.groups() {
            let (lo, hi) = data.interval(k);
            let fill = if k == 0 {
                hi / 1.5
            } else if k == k_top {
                lo * 1.5
            } else {
                (lo * hi).sqrt()
            };
            let c = data.counts()[k];
            x.extend(std::iter::repeat(fill).take(c));
            if k < k_top {
                *x.last_mut().expect("count >= 1") = hi;
            }
        }
        let log_x = x.iter().map(|v| v.ln()).collect();
        let z = (0..x.len()).map(|_| rng.random_range(0..r)).collect();
        Self {
            x,
            log_x,
            z,
            d: group_labels(data),
        }
    }

    /// Latent state of an empty dataset, used by prior-only runs.
    pub(crate) fn empty() -> Self {
        Self {
            x: Vec::new(),
            log_x: Vec::new(),
            z: Vec::new(),
            d: Vec::new(),
        }
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn log_x(&self) -> &[f64] {
        &self.log_x
    }

    pub fn z(&self) -> &[usize] {
        &self.z
    }

    pub fn d(&self) -> &[usize] {
        &self.d
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub(crate) fn z_mut(&mut self) -> &mut Vec<usize> {
        &mut self.z
    }

    #[inline]
    pub(crate) fn set_income(&mut self, i: usize, x: f64) {
        self.x[i] = x;
        self.log_x[i] = x.ln();
    }

    /// Per-component allocation counts.
    pub fn counts(&self, r: usize) -> Vec<usize> {
        let mut counts = vec![0; r];
        for &zi in &self.z {
            counts[zi] += 1;
        }
        counts
    }

    /// Check lengths, labels, pinned boundaries and interval containment.
    pub fn validate(&self, data: &GroupedData, r: usize) -> Result<()> {
        let n = data.n_total();
        if self.x.len() != n || self.log_x.len() != n || self.z.len() != n || self.d.len() != n {
            return Err(Error::invariant(format!(
                "latent vectors have lengths x={}, ln x={}, z={}, d={}; data has n={n}",
                self.x.len(),
                self.log_x.len(),
                self.z.len(),
                self.d.len()
            )));
        }
        if let Some(i) = self.z.iter().position(|&zi| zi >= r) {
            return Err(Error::invariant(format!("allocation z[{i}] = {} but R = {r}", self.z[i])));
        }
        for k in 0..data.groups() {
            let (lo, hi) = data.interval(k);
            for i in data.block(k) {
                if self.d[i] != k {
                    return Err(Error::invariant(format!("group label d[{i}] = {} but slot lies in group {k}", self.d[i])));
                }
                let xi = self.x[i];
                if !(xi > lo && xi <= hi) || !xi.is_finite() {
                    return Err(Error::invariant(format!("latent x[{i}] = {xi} outside group interval ({lo}, {hi}]")));
                }
                if self.log_x[i].to_bits() != xi.ln().to_bits() {
                    return Err(Error::invariant(format!("cached ln x[{i}] out of sync")));
                }
            }
        }
        for (k, i) in data.boundary_indices().into_iter().enumerate() {
            if self.x[i].to_bits() != data.boundaries()[k].to_bits() {
                return Err(Error::invariant(format!(
                    "boundary slot x[{i}] = {} differs from t = {}",
                    self.x[i],
                    data.boundaries()[k]
                )));
            }
        }
        Ok(())
    }
}

fn group_labels(data: &GroupedData) -> Vec<usize> {
    data.counts()
        .iter()
        .enumerate()
        .flat_map(|(k, &c)| std::iter::repeat(k).take(c))
        .collect()
}
