//! Posterior draws shared by the mixture and GB2 samplers, with their CSV
//! stream and JSON sidecar.
//!
//! Mixture rows are `iteration,log_lik,mu,tau2,beta,bd_move,bd_accepted,
//! sc_move,sc_accepted,R` followed by `R` weights, `R` log-means and `R`
//! log-variances, so rows vary in width. GB2 rows are
//! `iteration,log_lik,a,b,p,q`. The sidecar sits next to the CSV with a
//! `.json` extension.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::distributions::{Gb2Params, MixtureParams};
use crate::error::{Error, Result};
use crate::gb2::Gb2ChainConfig;
use crate::persist::{write_atomic, write_json_atomic};
use crate::rjmcmc::{MoveKind, MoveOutcome, PriorConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Mln,
    Gb2,
}

impl ModelKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ModelKind::Mln => "mln",
            ModelKind::Gb2 => "gb2",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DrawParams {
    Mixture(MixtureParams),
    Gb2(Gb2Params),
}

impl DrawParams {
    /// Number of mixture components; a GB2 draw counts as one.
    pub fn r(&self) -> usize {
        match self {
            DrawParams::Mixture(m) => m.len(),
            DrawParams::Gb2(_) => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hypers {
    pub mu: f64,
    pub tau2: f64,
    pub beta: f64,
}

/// One kept iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct DrawRecord {
    pub iteration: u64,
    /// Grouped-data log-likelihood at the draw (0 in prior-only runs).
    pub log_lik: f64,
    pub params: DrawParams,
    pub hypers: Option<Hypers>,
    /// Birth/death then split/combine outcome of the sweep.
    pub moves: Option<[MoveOutcome; 2]>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tally {
    pub proposed: u64,
    pub accepted: u64,
}

impl Tally {
    pub fn record(&mut self, accepted: bool) {
        self.proposed += 1;
        self.accepted += accepted as u64;
    }

    pub fn rate(&self) -> f64 {
        if self.proposed == 0 {
            0.0
        } else {
            self.accepted as f64 / self.proposed as f64
        }
    }
}

/// Everything needed to interpret and reproduce a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub model: ModelKind,
    pub seed: u64,
    pub iterations: u64,
    pub burn_in: u64,
    pub thin: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prior: Option<PriorConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gb2_config: Option<Gb2ChainConfig>,
    /// Step sizes after burn-in adaptation (GB2 only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gb2_step_sizes: Option<[f64; 4]>,
    #[serde(default)]
    pub initial_r: usize,
    #[serde(default)]
    pub fixed_r: bool,
    #[serde(default)]
    pub prior_only: bool,
    /// Post-burn-in acceptance counts keyed by move or parameter name.
    pub acceptance: BTreeMap<String, Tally>,
    /// SHA-256 of the canonical grouped-data CSV.
    pub data_hash: String,
    pub warnings: Vec<String>,
    pub wall_time_secs: f64,
}

/// A chain's kept draws and its metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct Draws {
    pub meta: RunMetadata,
    pub records: Vec<DrawRecord>,
}

const MLN_HEADER: [&str; 10] = [
    "iteration",
    "log_lik",
    "mu",
    "tau2",
    "beta",
    "bd_move",
    "bd_accepted",
    "sc_move",
    "sc_accepted",
    "R",
];
const GB2_HEADER: [&str; 6] = ["iteration", "log_lik", "a", "b", "p", "q"];

/// Sidecar path for a draws CSV.
pub fn sidecar_path(csv: &Path) -> PathBuf {
    csv.with_extension("json")
}

impl Draws {
    pub fn model(&self) -> ModelKind {
        self.meta.model
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn r_values(&self) -> Vec<usize> {
        self.records.iter().map(|d| d.params.r()).collect()
    }

    /// Pool several chains of the same model fitted to the same data.
    pub fn pool(chains: Vec<Draws>) -> Result<Draws> {
        let mut iter = chains.into_iter();
        let mut first = iter.next().ok_or_else(|| Error::domain("no draws to pool"))?;
        for other in iter {
            if other.meta.model != first.meta.model {
                return Err(Error::domain("cannot pool draws of different models"));
            }
            if other.meta.data_hash != first.meta.data_hash {
                return Err(Error::domain("cannot pool draws fitted to different data"));
            }
            for (key, t) in other.meta.acceptance {
                let e = first.meta.acceptance.entry(key).or_default();
                e.proposed += t.proposed;
                e.accepted += t.accepted;
            }
            first.meta.warnings.extend(other.meta.warnings);
            first.records.extend(other.records);
        }
        Ok(first)
    }

    /// Write the CSV stream and its JSON sidecar.
    pub fn write(&self, csv_path: &Path) -> Result<()> {
        write_atomic(csv_path, |out| self.write_csv(out))?;
        write_json_atomic(&sidecar_path(csv_path), &self.meta)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new().flexible(true).from_writer(out);
        match self.meta.model {
            ModelKind::Mln => w.write_record(MLN_HEADER)?,
            ModelKind::Gb2 => w.write_record(GB2_HEADER)?,
        }
        for d in &self.records {
            let mut row = vec![d.iteration.to_string(), d.log_lik.to_string()];
            match &d.params {
                DrawParams::Mixture(m) => {
                    let h = d.hypers.ok_or_else(|| Error::invariant("mixture draw without hyper-parameters"))?;
                    row.extend([h.mu, h.tau2, h.beta].iter().map(f64::to_string));
                    let moves = d.moves.unwrap_or([MoveOutcome {
                        kind: MoveKind::Skip,
                        accepted: false,
                    }; 2]);
                    for mv in moves {
                        row.push(mv.kind.as_str().to_string());
                        row.push((mv.accepted as u8).to_string());
                    }
                    row.push(m.len().to_string());
                    for v in m.weights().iter().chain(m.mus()).chain(m.sigma2s()) {
                        row.push(v.to_string());
                    }
                }
                DrawParams::Gb2(g) => row.extend([g.a, g.b, g.p, g.q].iter().map(f64::to_string)),
            }
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Read a CSV stream and its sidecar.
    pub fn read(csv_path: &Path) -> Result<Draws> {
        let side = sidecar_path(csv_path);
        let meta: RunMetadata = serde_json::from_reader(BufReader::new(
            File::open(&side).map_err(|e| Error::from(e).context(format!("opening {}", side.display())))?,
        ))?;
        let file = File::open(csv_path).map_err(|e| Error::from(e).context(format!("opening {}", csv_path.display())))?;
        let records = read_records(BufReader::new(file), meta.model)?;
        Ok(Draws { meta, records })
    }
}

fn field<T: std::str::FromStr>(row: &csv::StringRecord, i: usize, line: u64) -> Result<T> {
    let raw = row
        .get(i)
        .ok_or_else(|| Error::Parse(format!("line {line}: missing column {}", i + 1)))?;
    raw.trim()
        .parse()
        .map_err(|_| Error::Parse(format!("line {line}: cannot parse {raw:?} in column {}", i + 1)))
}

fn read_records<R: std::io::Read>(input: R, model: ModelKind) -> Result<Vec<DrawRecord>> {
    let mut reader = csv::ReaderBuilder::new().flexible(true).from_reader(input);
    let mut records = Vec::new();
    for (idx, row) in reader.records().enumerate() {
        let line = idx as u64 + 2;
        let row = row?;
        let iteration = field(&row, 0, line)?;
        let log_lik = field(&row, 1, line)?;
        let rec = match model {
            ModelKind::Gb2 => {
                let p = Gb2Params::new(field(&row, 2, line)?, field(&row, 3, line)?, field(&row, 4, line)?, field(&row, 5, line)?)
                    .map_err(|e| Error::Parse(format!("line {line}: {e}")))?;
                DrawRecord {
                    iteration,
                    log_lik,
                    params: DrawParams::Gb2(p),
                    hypers: None,
                    moves: None,
                }
            }
            ModelKind::Mln => {
                let hypers = Hypers {
                    mu: field(&row, 2, line)?,
                    tau2: field(&row, 3, line)?,
                    beta: field(&row, 4, line)?,
                };
                let mut moves = [MoveOutcome {
                    kind: MoveKind::Skip,
                    accepted: false,
                }; 2];
                for (m, col) in moves.iter_mut().zip([5, 7]) {
                    let name: String = field(&row, col, line)?;
                    m.kind = MoveKind::parse(&name).ok_or_else(|| Error::Parse(format!("line {line}: unknown move {name:?}")))?;
                    m.accepted = field::<u8>(&row, col + 1, line)? == 1;
                }
                let r: usize = field(&row, 9, line)?;
                if row.len() != 10 + 3 * r {
                    return Err(Error::Parse(format!("line {line}: R = {r} needs {} columns, found {}", 10 + 3 * r, row.len())));
                }
                let vals = (10..10 + 3 * r).map(|i| field(&row, i, line)).collect::<Result<Vec<f64>>>()?;
                let params = MixtureParams::new(vals[..r].to_vec(), vals[r..2 * r].to_vec(), vals[2 * r..].to_vec())
                    .map_err(|e| Error::Parse(format!("line {line}: {e}")))?;
                DrawRecord {
                    iteration,
                    log_lik,
                    params: DrawParams::Mixture(params),
                    hypers: Some(hypers),
                    moves: Some(moves),
                }
            }
        };
        records.push(rec);
    }
    Ok(records)
}
