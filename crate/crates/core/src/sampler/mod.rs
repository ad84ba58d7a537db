//! Samplers for constrained MRFs.
//!
//! * [`nelson_sample`] partial rejection sampling: each round redraws every
//!   variable of every violated constraint. Exact on extremal constraint sets.
//! * [`moser_tardos_sample`] the algorithmic-LLL baseline: each round redraws
//!   only the lowest-index violated constraint.
//! * [`gibbs_sample`] single-site Gibbs over the constrained support.
//!
//! Randomness follows the [`crate::rng`] contract, keyed by
//! `(seed, row, round, variable)`.

mod gibbs;
mod partial_rejection;

use std::collections::BTreeMap;
use std::fmt::Write;
use std::str::FromStr;

use ndarray::{Array2, ArrayView1};
use serde::{Deserialize, Serialize};

pub use gibbs::gibbs_sample;
pub use partial_rejection::{moser_tardos_sample, nelson_sample, PartialRejectionSampler, ResampleRule};

use crate::assignment::{parse_bitstring, to_bitstring};
use crate::cnf::ConstraintSet;
use crate::error::{Error, Result};
use crate::mrf::ModelParams;
use crate::rng::derive_seed;
use crate::scalar::Scalar;

pub const DEFAULT_T_TRYOUT: usize = 1000;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SamplerConfig {
    /// Maximum number of rounds (constraint checks) per row.
    pub t_tryout: usize,
    pub batch_size: usize,
    pub seed: u64,
    /// Keep the per-row sequence of violated sets.
    pub record: bool,
    pub gibbs_burn_in: usize,
    pub gibbs_thinning: usize,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self {
            t_tryout: DEFAULT_T_TRYOUT,
            batch_size: 1,
            seed: 0,
            record: false,
            gibbs_burn_in: 1000,
            gibbs_thinning: 10,
        }
    }
}

impl SamplerConfig {
    pub fn new(batch_size: usize, seed: u64) -> Self {
        Self {
            batch_size,
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.t_tryout == 0 {
            return Err(Error::InvalidConfig("t_tryout must be at least 1".into()));
        }
        if self.batch_size == 0 {
            return Err(Error::InvalidConfig("batch_size must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplerKind {
    Nelson,
    MoserTardos,
    Gibbs,
}

impl FromStr for SamplerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "nelson" => Ok(Self::Nelson),
            "moser" | "moser_tardos" | "moser-tardos" => Ok(Self::MoserTardos),
            "gibbs" => Ok(Self::Gibbs),
            other => Err(Error::InvalidConfig(format!("unknown sampler {other:?}"))),
        }
    }
}

impl SamplerKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Nelson => "nelson",
            Self::MoserTardos => "moser",
            Self::Gibbs => "gibbs",
        }
    }

    pub fn sample<F: Scalar>(
        self,
        cs: &ConstraintSet,
        m: &ModelParams<F>,
        cfg: &SamplerConfig,
    ) -> Result<(AssignmentBatch, SamplerStats)> {
        match self {
            Self::Nelson => nelson_sample(cs, m, cfg),
            Self::MoserTardos => moser_tardos_sample(cs, m, cfg),
            Self::Gibbs => gibbs_sample(cs, m, cfg, None),
        }
    }
}

/// `b × n` candidate assignments with a validity flag per row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AssignmentBatch {
    pub rows: Array2<u8>,
    /// `valid[l]` implies row `l` satisfies every constraint.
    pub valid: Vec<bool>,
}

impl AssignmentBatch {
    pub fn len(&self) -> usize {
        self.valid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.valid.is_empty()
    }

    pub fn n_vars(&self) -> usize {
        self.rows.ncols()
    }

    pub fn row(&self, l: usize) -> ArrayView1<'_, u8> {
        self.rows.row(l)
    }

    pub fn row_vec(&self, l: usize) -> Vec<u8> {
        self.rows.row(l).to_vec()
    }

    /// Rows flagged valid, in order.
    pub fn valid_rows(&self) -> Vec<Vec<u8>> {
        (0..self.len())
            .filter(|&l| self.valid[l])
            .map(|l| self.row_vec(l))
            .collect()
    }

    pub fn exhausted(&self) -> usize {
        self.valid.iter().filter(|v| !**v).count()
    }

    /// One bitstring per line, exhausted rows suffixed with ` INVALID`.
    pub fn to_dump(&self) -> String {
        let mut out = String::with_capacity(self.len() * (self.n_vars() + 1));
        for l in 0..self.len() {
            out.push_str(&to_bitstring(&self.row_vec(l)));
            if !self.valid[l] {
                out.push_str(" INVALID");
            }
            out.push('\n');
        }
        out
    }

    pub fn from_dump(text: &str) -> Result<Self> {
        let mut flat = Vec::new();
        let mut valid = Vec::new();
        let mut width = None;
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
            let (bits, ok) = match line.split_once(char::is_whitespace) {
                Some((bits, "INVALID")) => (bits, false),
                Some((_, tail)) => {
                    return Err(Error::Format(format!("unexpected marker {:?}", tail.trim())))
                }
                None => (line, true),
            };
            let row = parse_bitstring(bits)?;
            match width {
                None => width = Some(row.len()),
                Some(w) if w != row.len() => {
                    return Err(Error::LengthMismatch {
                        expected: w,
                        got: row.len(),
                    })
                }
                _ => {}
            }
            flat.extend(row);
            valid.push(ok);
        }
        let rows = Array2::from_shape_vec((valid.len(), width.unwrap_or(0)), flat)
            .expect("rows have equal width");
        Ok(Self { rows, valid })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SamplerStats {
    /// Rounds used by each row; a row that terminates at its first check used one.
    pub rounds_per_row: Vec<usize>,
    /// How many times each constraint had its variables redrawn.
    pub per_constraint_resamples: Vec<u64>,
    /// Total single-variable redraws.
    pub resampled_variables: u64,
    /// Per row, the violated set observed at every round (the last one empty
    /// for rows that terminated).
    pub records: Option<Vec<Vec<Vec<usize>>>>,
    pub exhausted: usize,
}

#[derive(Serialize, Deserialize)]
struct StatsFile {
    rounds: Vec<usize>,
    per_constraint: Vec<u64>,
    exhausted: usize,
}

impl SamplerStats {
    pub fn to_json(&self) -> String {
        serde_json::to_string(&StatsFile {
            rounds: self.rounds_per_row.clone(),
            per_constraint: self.per_constraint_resamples.clone(),
            exhausted: self.exhausted,
        })
        .expect("stats serialize")
    }

    pub fn mean_rounds(&self) -> f64 {
        if self.rounds_per_row.is_empty() {
            return 0.0;
        }
        self.rounds_per_row.iter().sum::<usize>() as f64 / self.rounds_per_row.len() as f64
    }

    pub fn round_histogram(&self) -> BTreeMap<usize, usize> {
        let mut h = BTreeMap::new();
        for &r in &self.rounds_per_row {
            *h.entry(r).or_default() += 1;
        }
        h
    }

    pub fn histogram_csv(&self) -> String {
        let mut out = String::from("round,count\n");
        for (r, c) in self.round_histogram() {
            let _ = writeln!(out, "{r},{c}");
        }
        out
    }
}

/// Retry limit, in batches, when collecting a fixed number of valid rows.
pub const DEFAULT_RETRY_BATCHES: usize = 10;

/// Draws batches of `count` rows until `count` valid rows are collected,
/// discarding exhausted rows. Batch `k` uses a seed derived from `(cfg.seed, k)`;
/// batch 0 uses `cfg.seed` itself.
pub fn draw_valid_rows<F: Scalar>(
    kind: SamplerKind,
    cs: &ConstraintSet,
    m: &ModelParams<F>,
    cfg: &SamplerConfig,
    count: usize,
    max_batches: usize,
) -> Result<Vec<Vec<u8>>> {
    let mut out = Vec::with_capacity(count);
    if count == 0 {
        return Ok(out);
    }
    for attempt in 0..max_batches {
        let seed = if attempt == 0 {
            cfg.seed
        } else {
            derive_seed(cfg.seed, 0x7265_7472, attempt as u64)
        };
        let batch_cfg = SamplerConfig {
            batch_size: count,
            seed,
            record: false,
            ..cfg.clone()
        };
        let (batch, _) = match kind.sample(cs, m, &batch_cfg) {
            Err(Error::NoValidInit) => continue,
            other => other?,
        };
        for row in batch.valid_rows() {
            if out.len() == count {
                break;
            }
            out.push(row);
        }
        if out.len() == count {
            return Ok(out);
        }
    }
    Err(Error::SamplerExhausted {
        got: out.len(),
        wanted: count,
        batches: max_batches,
    })
}
