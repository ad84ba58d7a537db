#![allow(dead_code)]

use nelson_core::cnf::check_extremal;
use nelson_core::{Clause, ConstraintSet, Literal, ModelParams};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn two_clause() -> ConstraintSet {
    ConstraintSet::from_dimacs_clauses(3, &[&[1, 2], &[-1, 3]]).unwrap()
}

/// Greedily adds random clauses of width 1..=3, keeping each one only if the
/// set stays extremal and satisfiable.
pub fn random_extremal(n: usize, target_clauses: usize, seed: u64) -> ConstraintSet {
    let mut r = rng(seed);
    let mut clauses: Vec<Clause> = Vec::new();
    for _ in 0..target_clauses * 20 {
        if clauses.len() == target_clauses {
            break;
        }
        let width = r.random_range(1..=3.min(n));
        let lits = sample(&mut r, n, width)
            .into_iter()
            .map(|v| if r.random_bool(0.5) { Literal::pos(v) } else { Literal::neg(v) })
            .collect();
        let mut trial = clauses.clone();
        trial.push(Clause::new(lits).unwrap());
        let cs = ConstraintSet::new(n, trial.clone(), vec![]).unwrap();
        if check_extremal(&cs).unwrap().extremal && satisfiable(&cs) {
            clauses = trial;
        }
    }
    ConstraintSet::new(n, clauses, vec![]).unwrap()
}

pub fn satisfiable(cs: &ConstraintSet) -> bool {
    let n = cs.n_vars();
    (0..1u64 << n).any(|code| cs.is_satisfied(&nelson_core::assignment::unpack(code, n)))
}

/// Any small formula, extremal or not.
pub fn random_cnf(n: usize, l: usize, seed: u64) -> ConstraintSet {
    let mut r = rng(seed);
    let clauses = (0..l)
        .map(|_| {
            let width = r.random_range(1..=3.min(n));
            let lits = sample(&mut r, n, width)
                .into_iter()
                .map(|v| if r.random_bool(0.5) { Literal::pos(v) } else { Literal::neg(v) })
                .collect();
            Clause::new(lits).unwrap()
        })
        .collect();
    ConstraintSet::new(n, clauses, vec![]).unwrap()
}

pub fn random_theta(n: usize, seed: u64) -> ModelParams<f64> {
    let mut r = rng(seed);
    ModelParams::new((0..n).map(|_| r.random_range(-1.0..1.0)).collect())
}
