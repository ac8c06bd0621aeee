use std::io::{Read, Write};
use std::ops::Range;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Grouped income data: `K − 1` boundaries, `K` counts, optional group means.
///
/// Group `k` (0-based) covers `(t_{k−1}, t_k]` with `t_{−1} = 0` and the top
/// group open above.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupedData {
    boundaries: Vec<f64>,
    counts: Vec<usize>,
    group_means: Option<Vec<f64>>,
    n_total: usize,
}

impl GroupedData {
    pub fn new(boundaries: Vec<f64>, counts: Vec<usize>, group_means: Option<Vec<f64>>) -> Result<Self> {
        let k = counts.len();
        if k < 2 {
            return Err(Error::domain(format!("grouped data needs at least 2 groups, got {k}")));
        }
        if boundaries.len() != k - 1 {
            return Err(Error::domain(format!(
                "{k} groups need {} boundaries, got {}",
                k - 1,
                boundaries.len()
            )));
        }
        if boundaries.iter().any(|&t| !(t > 0.0 && t.is_finite())) {
            return Err(Error::domain(format!("boundaries must be positive and finite: {boundaries:?}")));
        }
        if boundaries.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::domain(format!("boundaries must be strictly increasing: {boundaries:?}")));
        }
        if let Some(pos) = counts.iter().position(|&c| c == 0) {
            return Err(Error::domain(format!("group {} has zero count", pos + 1)));
        }
        let data = Self {
            n_total: counts.iter().sum(),
            boundaries,
            counts,
            group_means: None,
        };
        match group_means {
            Some(means) => data.with_means(means),
            None => Ok(data),
        }
    }

    fn with_means(mut self, means: Vec<f64>) -> Result<Self> {
        if means.len() != self.groups() {
            return Err(Error::domain(format!(
                "{} groups need {} means, got {}",
                self.groups(),
                self.groups(),
                means.len()
            )));
        }
        for (k, &m) in means.iter().enumerate() {
            let (lo, hi) = self.interval(k);
            if !(m > lo && m <= hi) || !m.is_finite() {
                return Err(Error::invariant(format!(
                    "mean {m} of group {} lies outside ({lo}, {hi}]",
                    k + 1
                )));
            }
        }
        self.group_means = Some(means);
        Ok(self)
    }

    /// Number of groups `K`.
    pub fn groups(&self) -> usize {
        self.counts.len()
    }

    pub fn boundaries(&self) -> &[f64] {
        &self.boundaries
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn group_means(&self) -> Option<&[f64]> {
        self.group_means.as_deref()
    }

    pub fn n_total(&self) -> usize {
        self.n_total
    }

    /// `(t_{k−1}, t_k]` for 0-based group `k`; `(0, t_1]` and `(t_{K−1}, ∞)` at the ends.
    pub fn interval(&self, k: usize) -> (f64, f64) {
        let lo = if k == 0 { 0.0 } else { self.boundaries[k - 1] };
        let hi = self.boundaries.get(k).copied().unwrap_or(f64::INFINITY);
        (lo, hi)
    }

    /// Index range of group `k` in the latent vector.
    pub fn block(&self, k: usize) -> Range<usize> {
        let start: usize = self.counts[..k].iter().sum();
        start..start + self.counts[k]
    }

    /// Latent indices pinned to a boundary: the last slot of every group but
    /// the top one (`x[n_k* − 1] = t_k`, 0-based).
    pub fn boundary_indices(&self) -> Vec<usize> {
        let mut acc = 0;
        self.counts[..self.groups() - 1]
            .iter()
            .map(|&c| {
                acc += c;
                acc - 1
            })
            .collect()
    }

    /// Write the `k,t_upper,count,mean` CSV. Floats use the shortest decimal
    /// representation that parses back to the same bits.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        out.write_all(self.to_csv_string().as_bytes())?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut s = String::from("k,t_upper,count,mean\n");
        for k in 0..self.groups() {
            let t = self.boundaries.get(k).map(|t| t.to_string()).unwrap_or_default();
            let m = self
                .group_means
                .as_ref()
                .map(|m| m[k].to_string())
                .unwrap_or_default();
            s.push_str(&format!("{},{},{},{}\n", k + 1, t, self.counts[k], m));
        }
        s
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
        let headers = reader.headers()?.clone();
        let expected = ["k", "t_upper", "count", "mean"];
        if headers.len() < 3 || headers.iter().zip(expected).any(|(h, e)| h != e) {
            return Err(Error::Parse(format!(
                "expected header `k,t_upper,count,mean`, got `{}`",
                headers.iter().collect::<Vec<_>>().join(",")
            )));
        }

        let mut boundaries = Vec::new();
        let mut counts = Vec::new();
        let mut means = Vec::new();
        let mut rows = 0;
        for (row, record) in reader.records().enumerate() {
            let record = record?;
            let line = row + 2;
            let field = |i: usize| record.get(i).unwrap_or("");
            let k: usize = field(0)
                .parse()
                .map_err(|_| Error::Parse(format!("line {line}: bad group index `{}`", field(0))))?;
            if k != row + 1 {
                return Err(Error::Parse(format!("line {line}: expected group {}, got {k}", row + 1)));
            }
            let t = field(1);
            if !t.is_empty() {
                if boundaries.len() != row {
                    return Err(Error::Parse(format!("line {line}: boundary after the open top group")));
                }
                boundaries.push(
                    t.parse::<f64>()
                        .map_err(|_| Error::Parse(format!("line {line}: bad boundary `{t}`")))?,
                );
            }
            counts.push(
                field(2)
                    .parse::<usize>()
                    .map_err(|_| Error::Parse(format!("line {line}: bad count `{}`", field(2))))?,
            );
            let m = field(3);
            if !m.is_empty() {
                means.push(m.parse::<f64>().map_err(|_| Error::Parse(format!("line {line}: bad mean `{m}`")))?);
            }
            rows += 1;
        }
        if boundaries.len() + 1 != rows {
            return Err(Error::Parse(format!(
                "{rows} groups need {} boundaries with only the last `t_upper` empty, got {}",
                rows.saturating_sub(1),
                boundaries.len()
            )));
        }
        let means = match means.len() {
            0 => None,
            n if n == rows => Some(means),
            n => return Err(Error::Parse(format!("means given for {n} of {rows} groups"))),
        };
        Self::new(boundaries, counts, means)
    }

    /// SHA-256 of the canonical CSV encoding, hex encoded.
    pub fn content_hash(&self) -> String {
        let digest = Sha256::digest(self.to_csv_string().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}
