//! Evaluation metrics for samplers and learned models.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use serde::Serialize;

use crate::cnf::ConstraintSet;
use crate::error::{Error, Result};
use crate::mrf::{potential, ModelParams};
use crate::oracle::exact_grad_log_partition;
use crate::sampler::{draw_valid_rows, AssignmentBatch, SamplerConfig, SamplerKind, SamplerStats, DEFAULT_RETRY_BATCHES};
use crate::scalar::Scalar;

const MAP_DEPTH: usize = 10;

/// Fraction of rows satisfying every constraint; exhausted rows count as drawn.
pub fn validity<F: Scalar>(batch: &AssignmentBatch, cs: &ConstraintSet) -> Result<F> {
    if batch.is_empty() {
        return Err(Error::EmptyBatch);
    }
    if batch.n_vars() != cs.n_vars() {
        return Err(Error::LengthMismatch {
            expected: cs.n_vars(),
            got: batch.n_vars(),
        });
    }
    let ok = (0..batch.len())
        .filter(|&l| cs.is_satisfied(&batch.row_vec(l)))
        .count();
    Ok(F::from_count(ok) / F::from_count(batch.len()))
}

/// MAP@10 as a percentage.
///
/// The union of `preferred` and `unseen` is ranked by potential, highest
/// first, with ties broken by descending bitstring. The score is
/// `Σ_{k=1..10} (#preferred in top k)/k`, divided by 10 and scaled to 100.
/// An assignment listed in both sets counts as preferred.
pub fn map_at_10<F: Scalar>(
    theta: &ModelParams<F>,
    preferred: &[Vec<u8>],
    unseen: &[Vec<u8>],
) -> Result<F> {
    if preferred.is_empty() || unseen.is_empty() {
        return Err(Error::EmptyBatch);
    }
    let mut candidates: BTreeMap<Vec<u8>, bool> = BTreeMap::new();
    for x in unseen {
        candidates.insert(x.clone(), false);
    }
    for x in preferred {
        candidates.insert(x.clone(), true);
    }
    if candidates.len() < MAP_DEPTH {
        return Err(Error::TooFewCandidates {
            needed: MAP_DEPTH,
            got: candidates.len(),
        });
    }
    let mut ranked = candidates
        .into_iter()
        .map(|(x, pref)| Ok((potential(theta, &x)?, x, pref)))
        .collect::<Result<Vec<_>>>()?;
    ranked.sort_by(|a, b| {
        b.0.partial_cmp(&a.0)
            .unwrap_or(Ordering::Equal)
            .then_with(|| b.1.cmp(&a.1))
    });
    let mut hits = 0usize;
    let mut score = F::zero();
    for (k, (_, _, pref)) in ranked.iter().take(MAP_DEPTH).enumerate() {
        hits += usize::from(*pref);
        score += F::from_count(hits) / F::from_count(k + 1);
    }
    Ok(score / F::from_count(MAP_DEPTH) * F::of(100.0))
}

/// L1 distance between the exact `E[x]` and the mean of `m` valid sampler rows.
pub fn grad_error<F: Scalar>(
    cs: &ConstraintSet,
    theta: &ModelParams<F>,
    kind: SamplerKind,
    m: usize,
    seed: u64,
) -> Result<F> {
    grad_error_with(cs, theta, kind, m, &SamplerConfig::new(m.max(1), seed))
}

pub fn grad_error_with<F: Scalar>(
    cs: &ConstraintSet,
    theta: &ModelParams<F>,
    kind: SamplerKind,
    m: usize,
    cfg: &SamplerConfig,
) -> Result<F> {
    if m == 0 {
        return Err(Error::EmptyBatch);
    }
    let exact = exact_grad_log_partition(cs, theta)?;
    let rows = draw_valid_rows(kind, cs, theta, cfg, m, DEFAULT_RETRY_BATCHES)?;
    Ok(l1_to_sample_mean(&exact, &rows))
}

/// `Σ_i |target_i − mean_rows(x_i)|`.
pub fn l1_to_sample_mean<F: Scalar>(target: &[F], rows: &[Vec<u8>]) -> F {
    let denom = F::from_count(rows.len());
    target
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            let ones = rows.iter().filter(|r| r[i] != 0).count();
            (t - F::from_count(ones) / denom).abs()
        })
        .sum()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResampleSummary {
    pub histogram: BTreeMap<usize, usize>,
    pub mean_rounds: f64,
    pub max_rounds: usize,
    pub per_constraint: Vec<u64>,
    pub resampled_variables: u64,
    pub exhausted: usize,
}

pub fn resample_stats(stats: &SamplerStats) -> ResampleSummary {
    ResampleSummary {
        histogram: stats.round_histogram(),
        mean_rounds: stats.mean_rounds(),
        max_rounds: stats.rounds_per_row.iter().copied().max().unwrap_or(0),
        per_constraint: stats.per_constraint_resamples.clone(),
        resampled_variables: stats.resampled_variables,
        exhausted: stats.exhausted,
    }
}

/// Whichever metrics were computed for a run.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MetricReport<F> {
    pub validity: Option<F>,
    pub map_at_10: Option<F>,
    pub grad_error_l1: Option<F>,
    pub nll: Option<F>,
    pub resample_histogram: Option<BTreeMap<usize, usize>>,
}

#[derive(Serialize)]
struct ReportFile {
    #[serde(skip_serializing_if = "Option::is_none")]
    validity: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    map_at_10: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    grad_error_l1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    nll: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    resample_histogram: Option<BTreeMap<usize, usize>>,
}

impl<F: Scalar> MetricReport<F> {
    pub fn to_json(&self) -> String {
        let f = |v: Option<F>| v.map(Scalar::as_f64);
        serde_json::to_string_pretty(&ReportFile {
            validity: f(self.validity),
            map_at_10: f(self.map_at_10),
            grad_error_l1: f(self.grad_error_l1),
            nll: f(self.nll),
            resample_histogram: self.resample_histogram.clone(),
        })
        .expect("report serializes")
    }
}
