use std::ops::Range;

use ndarray::{Array2, Axis};
use rayon::prelude::*;

use super::{AssignmentBatch, SamplerConfig, SamplerStats};
use crate::cnf::ConstraintSet;
use crate::error::Result;
use crate::mrf::{marginals, ModelParams};
use crate::rng::{CounterRng, Domain};
use crate::scalar::Scalar;
use crate::tensor::ClauseTensors;

/// Rows handled together by one worker; each chunk runs the batched pipeline.
const CHUNK_ROWS: usize = 256;

/// Which violated constraints get their variables redrawn in a round.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResampleRule {
    /// Every violated constraint (partial rejection sampling).
    AllViolated,
    /// Only the violated constraint with the lowest index (Moser–Tardos).
    LowestViolated,
}

/// Batched resampling sampler over a fixed constraint set.
///
/// Clauses are checked through the `Z`/`S`/`A` tensor pipeline, exactly-one
/// groups by a direct member count; both contribute to one resample mask.
pub struct PartialRejectionSampler<'a> {
    cs: &'a ConstraintSet,
    tensors: ClauseTensors,
    rule: ResampleRule,
}

struct ChunkOutput {
    rows: Array2<u8>,
    valid: Vec<bool>,
    rounds: Vec<usize>,
    tallies: Vec<u64>,
    resampled: u64,
    records: Option<Vec<Vec<Vec<usize>>>>,
}

impl<'a> PartialRejectionSampler<'a> {
    pub fn new(cs: &'a ConstraintSet, rule: ResampleRule) -> Self {
        Self {
            cs,
            tensors: ClauseTensors::new(cs),
            rule,
        }
    }

    /// Rows `0..cfg.batch_size`.
    pub fn sample<F: Scalar>(
        &self,
        m: &ModelParams<F>,
        cfg: &SamplerConfig,
    ) -> Result<(AssignmentBatch, SamplerStats)> {
        self.sample_rows(m, cfg, 0..cfg.batch_size as u64)
    }

    /// An arbitrary range of row indices; row `l` of a full batch equals row
    /// `l` drawn alone, since randomness is keyed by the absolute row index.
    pub fn sample_rows<F: Scalar>(
        &self,
        m: &ModelParams<F>,
        cfg: &SamplerConfig,
        rows: Range<u64>,
    ) -> Result<(AssignmentBatch, SamplerStats)> {
        cfg.validate()?;
        m.check_len(self.cs.n_vars())?;
        let p_zero: Vec<f64> = marginals(m)?.p_zero.into_iter().map(|p| p.as_f64()).collect();
        let rng = CounterRng::new(cfg.seed, Domain::PartialRejection);

        let starts: Vec<u64> = rows.clone().step_by(CHUNK_ROWS).collect();
        let chunks: Vec<ChunkOutput> = starts
            .par_iter()
            .map(|&first| {
                let count = (rows.end - first).min(CHUNK_ROWS as u64) as usize;
                self.run_chunk(&p_zero, cfg, &rng, first, count)
            })
            .collect();

        let n = self.cs.n_vars();
        let total = (rows.end - rows.start) as usize;
        let mut flat = Vec::with_capacity(total * n);
        let mut stats = SamplerStats {
            per_constraint_resamples: vec![0; self.cs.n_constraints()],
            records: cfg.record.then(Vec::new),
            ..SamplerStats::default()
        };
        let mut valid = Vec::with_capacity(total);
        for c in chunks {
            flat.extend(c.rows.iter().copied());
            valid.extend(c.valid);
            stats.rounds_per_row.extend(c.rounds);
            for (t, x) in stats.per_constraint_resamples.iter_mut().zip(c.tallies) {
                *t += x;
            }
            stats.resampled_variables += c.resampled;
            if let (Some(all), Some(rec)) = (stats.records.as_mut(), c.records) {
                all.extend(rec);
            }
        }
        stats.exhausted = valid.iter().filter(|v| !**v).count();
        let rows = Array2::from_shape_vec((total, n), flat).expect("chunk shapes agree");
        Ok((AssignmentBatch { rows, valid }, stats))
    }

    fn run_chunk(
        &self,
        p_zero: &[f64],
        cfg: &SamplerConfig,
        rng: &CounterRng,
        first_row: u64,
        count: usize,
    ) -> ChunkOutput {
        let cs = self.cs;
        let n = cs.n_vars();
        let n_clauses = self.tensors.n_clauses();
        let groups = cs.exactly_one_groups();

        let mut x = Array2::<u8>::zeros((count, n));
        for r in 0..count {
            for (i, u) in rng.round(first_row + r as u64, 0, n).enumerate() {
                x[[r, i]] = u8::from(u > p_zero[i]);
            }
        }

        let mut out = ChunkOutput {
            rows: Array2::zeros((0, 0)),
            valid: vec![false; count],
            rounds: vec![0; count],
            tallies: vec![0; cs.n_constraints()],
            resampled: 0,
            records: cfg.record.then(|| vec![Vec::new(); count]),
        };

        let mut active: Vec<usize> = (0..count).collect();
        let mut round = 1usize;
        while !active.is_empty() {
            let sub = x.select(Axis(0), &active);
            let state = self
                .tensors
                .satisfaction_pass(sub.view())
                .expect("batch width matches tensors");

            let mut chosen_clauses = Array2::<u8>::zeros((active.len(), n_clauses));
            let mut chosen_groups: Vec<Vec<usize>> = vec![Vec::new(); active.len()];
            let mut still_active = Vec::with_capacity(active.len());
            for (a, &r) in active.iter().enumerate() {
                let xr = sub.row(a);
                let mut violated: Vec<usize> =
                    (0..n_clauses).filter(|&j| state.s[[a, j]] == 1).collect();
                for (g, members) in groups.iter().enumerate() {
                    let on = members.iter().filter(|&&v| xr[v] != 0).count();
                    if on != 1 {
                        violated.push(n_clauses + g);
                    }
                }
                if let Some(rec) = out.records.as_mut() {
                    rec[r].push(violated.clone());
                }
                if violated.is_empty() {
                    out.rounds[r] = round;
                    out.valid[r] = true;
                    continue;
                }
                if round >= cfg.t_tryout {
                    out.rounds[r] = round;
                    continue;
                }
                let chosen = match self.rule {
                    ResampleRule::AllViolated => &violated[..],
                    ResampleRule::LowestViolated => &violated[..1],
                };
                for &j in chosen {
                    out.tallies[j] += 1;
                    if j < n_clauses {
                        chosen_clauses[[a, j]] = 1;
                    } else {
                        chosen_groups[a].push(j - n_clauses);
                    }
                }
                still_active.push((a, r));
            }

            let mask = self
                .tensors
                .resample_mask(chosen_clauses.view())
                .expect("mask shape matches tensors");
            for &(a, r) in &still_active {
                let mut resample = mask.row(a).to_vec();
                for &g in &chosen_groups[a] {
                    for &v in &groups[g] {
                        resample[v] = 1;
                    }
                }
                for (i, u) in rng.round(first_row + r as u64, round as u64, n).enumerate() {
                    if resample[i] == 1 {
                        x[[r, i]] = u8::from(u > p_zero[i]);
                        out.resampled += 1;
                    }
                }
            }
            active = still_active.into_iter().map(|(_, r)| r).collect();
            round += 1;
        }
        out.rows = x;
        out
    }
}

/// Partial rejection sampling: every round redraws the variables of all
/// violated constraints from their marginals until nothing is violated or
/// `t_tryout` rounds have been used.
pub fn nelson_sample<F: Scalar>(
    cs: &ConstraintSet,
    m: &ModelParams<F>,
    cfg: &SamplerConfig,
) -> Result<(AssignmentBatch, SamplerStats)> {
    PartialRejectionSampler::new(cs, ResampleRule::AllViolated).sample(m, cfg)
}

/// Like [`nelson_sample`] but each round redraws only the lowest-index
/// violated constraint.
pub fn moser_tardos_sample<F: Scalar>(
    cs: &ConstraintSet,
    m: &ModelParams<F>,
    cfg: &SamplerConfig,
) -> Result<(AssignmentBatch, SamplerStats)> {
    PartialRejectionSampler::new(cs, ResampleRule::LowestViolated).sample(m, cfg)
}
