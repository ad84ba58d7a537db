//! Reference corpora for the statistical checks: hand-built extremal
//! formulas, the sink-free selection used by the acceptance suite, and an
//! ideal i.i.d. sampler that draws straight from the exact distribution.

use std::collections::BTreeSet;

use nelson_core::assignment::unpack;
use nelson_core::cnf::emit_dimacs;
use nelson_core::oracle::{exact_distribution, ExactDistribution};
use nelson_core::problems::gen_sinkfree;
use nelson_core::{ConstraintSet, ModelParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_theta(n: usize, seed: u64) -> ModelParams<f64> {
    let mut r = rng(seed);
    ModelParams::new((0..n).map(|_| r.random_range(-1.0..1.0)).collect())
}

pub fn cnf(n: usize, clauses: &[&[i64]]) -> ConstraintSet {
    ConstraintSet::from_dimacs_clauses(n, clauses).unwrap()
}

pub fn two_clause() -> ConstraintSet {
    cnf(3, &[&[1, 2], &[-1, 3]])
}

pub struct Named {
    pub name: String,
    pub cs: ConstraintSet,
}

/// Above this support size 10⁵ draws cannot resolve a TV of 0.02: the
/// expected empirical TV of a uniform law on `s` points is about
/// `sqrt(s / (2π N))`, which reaches 0.02 near `s = 250`.
pub const MAX_TV_SUPPORT: usize = 200;

pub fn hand_built() -> Vec<Named> {
    let mut v = vec![
        ("two_clause", two_clause()),
        ("chain6", cnf(6, &[&[1, 2], &[-2, 3], &[-3, 4], &[-4, 5], &[-5, 6]])),
        ("disjoint7", cnf(7, &[&[1, 2], &[3, -4], &[-5, 6, 7]])),
        ("wide5", cnf(5, &[&[1, 2, 3, 4, 5]])),
        ("cycle5", cnf(5, &[&[-1, 2], &[-2, 3], &[-3, 4], &[-4, 5], &[-5, 1]])),
        ("units4", cnf(4, &[&[1], &[-2], &[3, 4]])),
        ("double_conflict4", cnf(4, &[&[1, 2, 3], &[-1, -2, 4]])),
        ("mixed8", cnf(8, &[&[1, -2], &[2, 3, -4], &[-1, 5], &[-3, 6], &[7, 8]])),
    ];
    let mut grouped = cnf(6, &[&[5, 6]]);
    grouped.add_exactly_one_groups(vec![vec![0, 1, 2, 3]]).unwrap();
    v.push(("group4_plus_clause", grouped));
    v.into_iter()
        .map(|(name, cs)| Named { name: name.into(), cs })
        .collect()
}

/// Every satisfiable sink-free generation over 3..=6 vertices and seeds 0..8
/// with `n ≤ 12`, deduplicated, plus the hand-built formulas; supports above
/// [`MAX_TV_SUPPORT`] are dropped.
pub fn extremal_corpus() -> Vec<Named> {
    let mut seen = BTreeSet::new();
    let mut out = hand_built();
    for v in 3..=6 {
        for seed in 0..8 {
            let Ok(inst) = gen_sinkfree(v, 0.55, seed) else { continue };
            let cs = inst.constraints;
            if cs.n_vars() > 12 || !seen.insert(emit_dimacs(&cs)) {
                continue;
            }
            let Ok(d) = exact_distribution(&cs, &ModelParams::<f64>::zeros(cs.n_vars())) else {
                continue;
            };
            if d.len() <= MAX_TV_SUPPORT {
                out.push(Named { name: format!("sinkfree(v={v},seed={seed})"), cs });
            }
        }
    }
    out
}

/// i.i.d. draws from the exact law by inverse CDF.
pub fn ideal_rows(d: &ExactDistribution<f64>, m: usize, seed: u64) -> Vec<Vec<u8>> {
    let mut cdf = Vec::with_capacity(d.len());
    let mut acc = 0.0;
    for &p in &d.probabilities {
        acc += p;
        cdf.push(acc);
    }
    let mut r = rng(seed);
    (0..m)
        .map(|_| {
            let u: f64 = r.random::<f64>() * acc;
            let k = cdf.partition_point(|&c| c < u).min(d.len() - 1);
            unpack(d.support[k], d.n_vars)
        })
        .collect()
}

/// First satisfiable sink-free generation with exactly ten edge variables.
pub fn n10_extremal() -> Option<(String, ConstraintSet)> {
    for v in 5..=7 {
        for seed in 0..50 {
            let Ok(inst) = gen_sinkfree(v, 0.55, seed) else { continue };
            let cs = inst.constraints;
            if cs.n_vars() == 10 && exact_distribution(&cs, &ModelParams::<f64>::zeros(10)).is_ok() {
                return Some((format!("sinkfree(v={v},seed={seed})"), cs));
            }
        }
    }
    None
}
