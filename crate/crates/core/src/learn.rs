//! Contrastive-divergence training of single-variable-form constrained MRFs.
//!
//! With `φ_θ(x) = Σ θ_i x_i` the gradient of the negative log-likelihood is
//! `E_model[x] − E_data[x]`; each iteration estimates both expectations from
//! `m` rows and takes a plain SGD step.

use std::fmt::Write;
use std::time::Instant;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::assignment::{parse_rows, to_bitstring};
use crate::cnf::ConstraintSet;
use crate::error::{Error, Result};
use crate::mrf::ModelParams;
use crate::oracle::{exact_distribution, DEFAULT_ENUMERATION_CAP};
use crate::rng::{derive_seed, sequential, Domain};
use crate::sampler::{draw_valid_rows, SamplerConfig, SamplerKind, DEFAULT_RETRY_BATCHES, DEFAULT_T_TRYOUT};
use crate::scalar::Scalar;

/// Training rows, all satisfying the constraint set they were loaded against.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dataset {
    n_vars: usize,
    rows: Vec<Vec<u8>>,
}

impl Dataset {
    pub fn new(rows: Vec<Vec<u8>>, cs: &ConstraintSet) -> Result<Self> {
        for (k, r) in rows.iter().enumerate() {
            if r.len() != cs.n_vars() {
                return Err(Error::LengthMismatch {
                    expected: cs.n_vars(),
                    got: r.len(),
                });
            }
            if !cs.is_satisfied(r) {
                return Err(Error::InvalidRow(k));
            }
        }
        Ok(Self {
            n_vars: cs.n_vars(),
            rows,
        })
    }

    /// One `0`/`1` bitstring per line.
    pub fn from_text(text: &str, cs: &ConstraintSet) -> Result<Self> {
        Self::new(parse_rows(text)?, cs)
    }

    pub fn to_text(&self) -> String {
        self.rows.iter().map(|r| to_bitstring(r) + "\n").collect()
    }

    pub fn rows(&self) -> &[Vec<u8>] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    fn check_against(&self, cs: &ConstraintSet) -> Result<()> {
        if self.n_vars != cs.n_vars() {
            return Err(Error::LengthMismatch {
                expected: cs.n_vars(),
                got: self.n_vars,
            });
        }
        match self.rows.iter().position(|r| !cs.is_satisfied(r)) {
            Some(k) => Err(Error::InvalidRow(k)),
            None => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    /// Samples per step, for both the data and the model side.
    pub m: usize,
    pub eta: f64,
    pub t_max: usize,
    pub sampler: SamplerKind,
    pub seed: u64,
    pub t_tryout: usize,
    /// Record exact NLL every this many iterations (when `n` is within the oracle cap).
    pub trace_every: usize,
    pub gibbs_burn_in: usize,
    pub gibbs_thinning: usize,
    pub retry_batches: usize,
    /// Fill the `wall_ms` trace column. Off by default so traces are reproducible.
    pub record_wall_clock: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            m: 200,
            eta: 0.1,
            t_max: 1000,
            sampler: SamplerKind::Nelson,
            seed: 0,
            t_tryout: DEFAULT_T_TRYOUT,
            trace_every: 1,
            gibbs_burn_in: 100,
            gibbs_thinning: 5,
            retry_batches: DEFAULT_RETRY_BATCHES,
            record_wall_clock: false,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.m == 0 {
            return Err(Error::InvalidConfig("m must be at least 1".into()));
        }
        if !(self.eta > 0.0 && self.eta.is_finite()) {
            return Err(Error::InvalidConfig("eta must be positive".into()));
        }
        if self.trace_every == 0 || self.t_tryout == 0 || self.retry_batches == 0 {
            return Err(Error::InvalidConfig(
                "trace_every, t_tryout and retry_batches must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow<F> {
    pub iter: usize,
    pub nll: Option<F>,
    pub grad_l1: F,
    pub wall_ms: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome<F> {
    pub model: ModelParams<F>,
    pub trace: Vec<TraceRow<F>>,
}

impl<F: Scalar> TrainOutcome<F> {
    /// `iter,nll,grad_l1,wall_ms`; absent values are empty fields.
    pub fn trace_csv(&self) -> String {
        let mut out = String::from("iter,nll,grad_l1,wall_ms\n");
        for r in &self.trace {
            let nll = r.nll.map(|v| v.as_f64().to_string()).unwrap_or_default();
            let wall = r.wall_ms.map(|v| format!("{v:.3}")).unwrap_or_default();
            let _ = writeln!(out, "{},{},{},{}", r.iter, nll, r.grad_l1.as_f64(), wall);
        }
        out
    }
}

fn column_mean<F: Scalar>(rows: &[Vec<u8>], n: usize) -> Result<Vec<F>> {
    if rows.is_empty() {
        return Err(Error::EmptyBatch);
    }
    let mut acc = vec![0usize; n];
    for r in rows {
        if r.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                got: r.len(),
            });
        }
        for (a, &x) in acc.iter_mut().zip(r) {
            *a += usize::from(x != 0);
        }
    }
    let denom = F::from_count(rows.len());
    Ok(acc.into_iter().map(|c| F::from_count(c) / denom).collect())
}

/// Stochastic gradient of the negative log-likelihood,
/// `g_i = mean_model(x_i) − mean_data(x_i)`; the update is `θ ← θ − η·g`.
pub fn cd_step<F: Scalar>(
    theta: &ModelParams<F>,
    data_batch: &[Vec<u8>],
    model_batch: &[Vec<u8>],
) -> Result<Vec<F>> {
    let n = theta.n();
    let data = column_mean::<F>(data_batch, n)?;
    let model = column_mean::<F>(model_batch, n)?;
    Ok(model.into_iter().zip(data).map(|(m, d)| m - d).collect())
}

/// `−(1/N) Σ_k φ_θ(x^k) + log Z_C(θ)` with the exact partition function.
pub fn neg_log_likelihood<F: Scalar>(
    theta: &ModelParams<F>,
    ds: &Dataset,
    cs: &ConstraintSet,
) -> Result<F> {
    ds.check_against(cs)?;
    let log_z = exact_distribution(cs, theta)?.log_partition;
    let mean = column_mean::<F>(ds.rows(), cs.n_vars())?;
    Ok(nll_from_mean(theta, &mean, log_z))
}

fn nll_from_mean<F: Scalar>(theta: &ModelParams<F>, data_mean: &[F], log_z: F) -> F {
    let fit: F = theta.theta.iter().zip(data_mean).map(|(&t, &d)| t * d).sum();
    log_z - fit
}

/// Contrastive-divergence training. Each iteration draws `m` data rows
/// uniformly with replacement and `m` valid model rows from the configured
/// sampler, then applies `θ ← θ − η·g`.
pub fn train<F: Scalar>(
    ds: &Dataset,
    cs: &ConstraintSet,
    cfg: &TrainConfig,
    theta0: &ModelParams<F>,
) -> Result<TrainOutcome<F>> {
    cfg.validate()?;
    ds.check_against(cs)?;
    theta0.check_len(cs.n_vars())?;
    let mut model = theta0.clone();
    let mut trace = Vec::new();
    if cfg.t_max == 0 {
        return Ok(TrainOutcome { model, trace });
    }
    if ds.is_empty() {
        return Err(Error::EmptyBatch);
    }

    let n = cs.n_vars();
    let traced = n <= DEFAULT_ENUMERATION_CAP;
    let data_mean = column_mean::<F>(ds.rows(), n)?;
    let eta = F::of(cfg.eta);
    let mut data_rng = sequential(cfg.seed, Domain::TrainData);
    let start = Instant::now();

    for iter in 1..=cfg.t_max {
        let data_batch: Vec<Vec<u8>> = (0..cfg.m)
            .map(|_| ds.rows()[data_rng.random_range(0..ds.len())].clone())
            .collect();
        let sampler_cfg = SamplerConfig {
            t_tryout: cfg.t_tryout,
            batch_size: cfg.m,
            seed: derive_seed(cfg.seed, 1, iter as u64),
            record: false,
            gibbs_burn_in: cfg.gibbs_burn_in,
            gibbs_thinning: cfg.gibbs_thinning,
        };
        let model_batch = draw_valid_rows(cfg.sampler, cs, &model, &sampler_cfg, cfg.m, cfg.retry_batches)?;
        let g = cd_step(&model, &data_batch, &model_batch)?;
        for (t, gi) in model.theta.iter_mut().zip(&g) {
            *t -= eta * *gi;
        }
        let nll = if traced && (iter % cfg.trace_every == 0 || iter == cfg.t_max) {
            let log_z = exact_distribution(cs, &model)?.log_partition;
            Some(nll_from_mean(&model, &data_mean, log_z))
        } else {
            None
        };
        trace.push(TraceRow {
            iter,
            nll,
            grad_l1: g.iter().map(|v| v.abs()).sum(),
            wall_ms: cfg
                .record_wall_clock
                .then(|| start.elapsed().as_secs_f64() * 1e3),
        });
    }
    Ok(TrainOutcome { model, trace })
}
