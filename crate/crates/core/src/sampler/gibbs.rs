use ndarray::Array2;

use super::{nelson_sample, AssignmentBatch, SamplerConfig, SamplerStats};
use crate::cnf::ConstraintSet;
use crate::error::{Error, Result};
use crate::mrf::{marginals, ModelParams};
use crate::rng::{CounterRng, Domain};
use crate::scalar::Scalar;

/// Single-site Gibbs sampling on the constrained support.
///
/// Each sweep visits variables in index order and sets `x_i = v` with
/// probability `∝ exp(θ_i v)·C(x[i ← v])`; when neither value is valid the
/// current value is kept. The chain starts at `init`, or at one partial
/// rejection draw when `init` is `None`. `batch_size` samples are emitted, the
/// first after `gibbs_burn_in` sweeps and then every `gibbs_thinning` sweeps;
/// `rounds_per_row` holds the sweep index of each emitted sample.
pub fn gibbs_sample<F: Scalar>(
    cs: &ConstraintSet,
    m: &ModelParams<F>,
    cfg: &SamplerConfig,
    init: Option<&[u8]>,
) -> Result<(AssignmentBatch, SamplerStats)> {
    cfg.validate()?;
    if cfg.gibbs_thinning == 0 {
        return Err(Error::InvalidConfig("gibbs_thinning must be at least 1".into()));
    }
    let n = cs.n_vars();
    m.check_len(n)?;
    let p_zero: Vec<f64> = marginals(m)?.p_zero.into_iter().map(|p| p.as_f64()).collect();

    let mut x = match init {
        Some(v) => {
            if v.len() != n {
                return Err(Error::LengthMismatch {
                    expected: n,
                    got: v.len(),
                });
            }
            if !cs.is_satisfied(v) {
                return Err(Error::InvalidConfig("Gibbs initial state violates the constraints".into()));
            }
            v.to_vec()
        }
        None => {
            let start_cfg = SamplerConfig {
                batch_size: 1,
                record: false,
                ..cfg.clone()
            };
            let (batch, _) = nelson_sample(cs, m, &start_cfg)?;
            if !batch.valid[0] {
                return Err(Error::NoValidInit);
            }
            batch.row_vec(0)
        }
    };

    let mut touching: Vec<Vec<usize>> = vec![Vec::new(); n];
    for j in 0..cs.n_constraints() {
        for v in cs.constraint_vars(j) {
            touching[v].push(j);
        }
    }
    let locally_valid = |x: &[u8], i: usize| touching[i].iter().all(|&j| !cs.is_violated(j, x));

    let rng = CounterRng::new(cfg.seed, Domain::Gibbs);
    let mut rows = Array2::<u8>::zeros((cfg.batch_size, n));
    let mut emitted_at = Vec::with_capacity(cfg.batch_size);
    let mut sweep = 0usize;
    while emitted_at.len() < cfg.batch_size {
        sweep += 1;
        for (i, u) in rng.round(0, sweep as u64, n).enumerate() {
            let old = x[i];
            x[i] = 0;
            let ok0 = locally_valid(&x, i);
            x[i] = 1;
            let ok1 = locally_valid(&x, i);
            x[i] = match (ok0, ok1) {
                (true, true) => u8::from(u > p_zero[i]),
                (true, false) => 0,
                (false, true) => 1,
                (false, false) => old,
            };
        }
        if sweep >= cfg.gibbs_burn_in && (sweep - cfg.gibbs_burn_in).is_multiple_of(cfg.gibbs_thinning) {
            let k = emitted_at.len();
            rows.row_mut(k).assign(&ndarray::ArrayView1::from(&x[..]));
            emitted_at.push(sweep);
        }
    }

    let stats = SamplerStats {
        rounds_per_row: emitted_at,
        per_constraint_resamples: vec![0; cs.n_constraints()],
        ..SamplerStats::default()
    };
    let valid = vec![true; cfg.batch_size];
    Ok((AssignmentBatch { rows, valid }, stats))
}
