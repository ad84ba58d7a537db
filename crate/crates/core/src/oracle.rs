//! Ground truth by exhaustive enumeration of `{0,1}^n`.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::assignment::{pack, to_bitstring, unpack, var_bit, MAX_PACKED_VARS};
use crate::cnf::{check_extremal, ConstraintSet};
use crate::error::{Error, Result};
use crate::mrf::{marginals, ModelParams};
use crate::scalar::Scalar;

/// Default limit on `n` for enumeration (about 3·10⁷ assignments).
pub const DEFAULT_ENUMERATION_CAP: usize = 25;

const CHUNK_BITS: usize = 16;

/// Probability table keyed by packed assignment code (see [`crate::assignment`]).
pub type DistTable<F> = BTreeMap<u64, F>;

/// Constraints compiled to bit masks over packed codes.
struct PackedConstraints {
    /// `(positive literals, negated literals)` per clause.
    clauses: Vec<(u64, u64)>,
    groups: Vec<u64>,
}

impl PackedConstraints {
    fn new(cs: &ConstraintSet) -> Self {
        let n = cs.n_vars();
        let clauses = cs
            .clauses()
            .iter()
            .map(|c| {
                c.literals().iter().fold((0u64, 0u64), |(p, q), l| {
                    if l.negated {
                        (p, q | var_bit(l.var, n))
                    } else {
                        (p | var_bit(l.var, n), q)
                    }
                })
            })
            .collect();
        let groups = cs
            .exactly_one_groups()
            .iter()
            .map(|g| g.iter().fold(0u64, |m, &v| m | var_bit(v, n)))
            .collect();
        Self { clauses, groups }
    }

    #[inline]
    fn clause_violated(&self, j: usize, code: u64) -> bool {
        let (p, q) = self.clauses[j];
        code & p == 0 && !code & q == 0
    }

    #[inline]
    fn violated(&self, j: usize, code: u64) -> bool {
        if j < self.clauses.len() {
            self.clause_violated(j, code)
        } else {
            (code & self.groups[j - self.clauses.len()]).count_ones() != 1
        }
    }

    #[inline]
    fn satisfied(&self, code: u64) -> bool {
        (0..self.clauses.len()).all(|j| !self.clause_violated(j, code))
            && self.groups.iter().all(|&g| (code & g).count_ones() == 1)
    }

    fn len(&self) -> usize {
        self.clauses.len() + self.groups.len()
    }
}

fn check_cap(n: usize, cap: usize) -> Result<()> {
    let cap = cap.min(MAX_PACKED_VARS);
    if n > cap {
        return Err(Error::CapExceeded { needed: n, cap });
    }
    Ok(())
}

/// Runs `f` over every code in `0..2^n`, in parallel chunks, concatenating the
/// per-chunk outputs in code order.
fn enumerate<T: Send>(n: usize, f: impl Fn(u64, &mut Vec<T>) + Sync) -> Vec<T> {
    let total = 1u64 << n;
    let chunk = 1u64 << CHUNK_BITS.min(n);
    let parts: Vec<Vec<T>> = (0..total / chunk)
        .into_par_iter()
        .map(|c| {
            let mut out = Vec::new();
            for code in c * chunk..(c + 1) * chunk {
                f(code, &mut out);
            }
            out
        })
        .collect();
    parts.into_iter().flatten().collect()
}

#[inline]
fn packed_potential<F: Scalar>(theta_by_bit: &[F], mut code: u64) -> F {
    let mut acc = F::zero();
    while code != 0 {
        let b = code.trailing_zeros() as usize;
        acc += theta_by_bit[b];
        code &= code - 1;
    }
    acc
}

fn theta_by_bit<F: Scalar>(m: &ModelParams<F>) -> Vec<F> {
    let n = m.n();
    (0..n).map(|b| m.theta[n - 1 - b]).collect()
}

/// `P_θ(x | C)` over the full support.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactDistribution<F> {
    pub n_vars: usize,
    /// Satisfying assignments as packed codes, ascending (lexicographic).
    pub support: Vec<u64>,
    pub probabilities: Vec<F>,
    /// `log Z_C(θ)`.
    pub log_partition: F,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableEntry {
    pub assignment: String,
    pub prob: f64,
}

impl<F: Scalar> ExactDistribution<F> {
    pub fn table(&self) -> DistTable<F> {
        self.support
            .iter()
            .copied()
            .zip(self.probabilities.iter().copied())
            .collect()
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    /// `E[x_i]` for every variable.
    pub fn mean(&self) -> Vec<F> {
        let n = self.n_vars;
        let mut out = vec![F::zero(); n];
        for (&code, &p) in self.support.iter().zip(&self.probabilities) {
            for (i, o) in out.iter_mut().enumerate() {
                if code & var_bit(i, n) != 0 {
                    *o += p;
                }
            }
        }
        out
    }

    pub fn entries(&self) -> Vec<TableEntry> {
        table_entries(&self.table(), self.n_vars)
    }
}

pub fn table_entries<F: Scalar>(table: &DistTable<F>, n: usize) -> Vec<TableEntry> {
    table
        .iter()
        .map(|(&code, &p)| TableEntry {
            assignment: to_bitstring(&unpack(code, n)),
            prob: p.as_f64(),
        })
        .collect()
}

pub fn exact_distribution<F: Scalar>(
    cs: &ConstraintSet,
    m: &ModelParams<F>,
) -> Result<ExactDistribution<F>> {
    exact_distribution_with_cap(cs, m, DEFAULT_ENUMERATION_CAP)
}

pub fn exact_distribution_with_cap<F: Scalar>(
    cs: &ConstraintSet,
    m: &ModelParams<F>,
    cap: usize,
) -> Result<ExactDistribution<F>> {
    let n = cs.n_vars();
    m.check_len(n)?;
    m.check_finite()?;
    check_cap(n, cap)?;
    let packed = PackedConstraints::new(cs);
    let tb = theta_by_bit(m);
    let valid: Vec<(u64, F)> = enumerate(n, |code, out| {
        if packed.satisfied(code) {
            out.push((code, packed_potential(&tb, code)));
        }
    });
    if valid.is_empty() {
        return Err(Error::Unsatisfiable);
    }
    let max = valid
        .iter()
        .map(|&(_, p)| p)
        .fold(F::neg_infinity(), F::max);
    let sum: F = valid.iter().map(|&(_, p)| (p - max).exp()).sum();
    let log_partition = max + sum.ln();
    let (support, probabilities) = valid
        .into_iter()
        .map(|(code, p)| (code, (p - log_partition).exp()))
        .unzip();
    Ok(ExactDistribution {
        n_vars: n,
        support,
        probabilities,
        log_partition,
    })
}

/// `∇_θ log Z_C(θ) = E_{P_θ(·|C)}[x]`.
pub fn exact_grad_log_partition<F: Scalar>(cs: &ConstraintSet, m: &ModelParams<F>) -> Result<Vec<F>> {
    Ok(exact_distribution(cs, m)?.mean())
}

/// Expected resample counts of the partial-rejection sampler under the product
/// of marginals: `E[T_j] = q_{c_j} / q_∅`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResampleExpectation<F> {
    /// Probability that no constraint is violated.
    pub q_empty: F,
    /// Probability that exactly constraint `j` (and nothing else) is violated.
    pub q_single: Vec<F>,
    pub per_constraint_expected: Vec<F>,
    pub total_expected: F,
    /// Whether the formula is extremal; `None` when the check hit its cap.
    pub extremal: Option<bool>,
}

fn product_probability<F: Scalar>(p_one_by_bit: &[F], p_zero_by_bit: &[F], code: u64) -> F {
    p_one_by_bit
        .iter()
        .zip(p_zero_by_bit)
        .enumerate()
        .map(|(b, (&one, &zero))| if code >> b & 1 == 1 { one } else { zero })
        .fold(F::one(), |acc, p| acc * p)
}

fn product_marginals_by_bit<F: Scalar>(m: &ModelParams<F>) -> Result<(Vec<F>, Vec<F>)> {
    let p = marginals(m)?;
    let n = m.n();
    let zero: Vec<F> = (0..n).map(|b| p.p_zero[n - 1 - b]).collect();
    let one = zero.iter().map(|&z| F::one() - z).collect();
    Ok((one, zero))
}

pub fn expected_resamples<F: Scalar>(
    cs: &ConstraintSet,
    m: &ModelParams<F>,
) -> Result<ResampleExpectation<F>> {
    let n = cs.n_vars();
    m.check_len(n)?;
    check_cap(n, DEFAULT_ENUMERATION_CAP)?;
    let packed = PackedConstraints::new(cs);
    let (one, zero) = product_marginals_by_bit(m)?;
    let n_cons = packed.len();
    // (violated constraint or n_cons for none, probability), only for patterns of size ≤ 1
    let mass: Vec<(usize, F)> = enumerate(n, |code, out| {
        let mut first = None;
        for j in 0..n_cons {
            if packed.violated(j, code) {
                if first.is_some() {
                    return;
                }
                first = Some(j);
            }
        }
        out.push((first.unwrap_or(n_cons), product_probability(&one, &zero, code)));
    });
    let mut q_single = vec![F::zero(); n_cons];
    let mut q_empty = F::zero();
    for (j, p) in mass {
        if j == n_cons {
            q_empty += p;
        } else {
            q_single[j] += p;
        }
    }
    if q_empty <= F::zero() {
        return Err(Error::Unsatisfiable);
    }
    let per_constraint_expected: Vec<F> = q_single.iter().map(|&q| q / q_empty).collect();
    let total_expected = per_constraint_expected.iter().copied().sum();
    Ok(ResampleExpectation {
        q_empty,
        q_single,
        per_constraint_expected,
        total_expected,
        extremal: check_extremal(cs).ok().map(|r| r.extremal),
    })
}

/// Product-measure probability of every violation pattern `S` ("exactly the
/// constraints in `S` are violated"), including the empty pattern.
pub fn violation_pattern_probabilities<F: Scalar>(
    cs: &ConstraintSet,
    m: &ModelParams<F>,
) -> Result<BTreeMap<Vec<usize>, F>> {
    let n = cs.n_vars();
    m.check_len(n)?;
    check_cap(n, DEFAULT_ENUMERATION_CAP)?;
    let packed = PackedConstraints::new(cs);
    let (one, zero) = product_marginals_by_bit(m)?;
    let mut out = BTreeMap::new();
    for code in 0..(1u64 << n) {
        let pattern: Vec<usize> = (0..packed.len()).filter(|&j| packed.violated(j, code)).collect();
        *out.entry(pattern).or_insert_with(F::zero) += product_probability(&one, &zero, code);
    }
    Ok(out)
}

/// `½ Σ_x |p(x) − q(x)|`, reading missing entries as zero.
pub fn tv_distance<F: Scalar>(p: &DistTable<F>, q: &DistTable<F>) -> Result<F> {
    if let Some(&bad) = p.values().chain(q.values()).find(|&&v| v < F::zero()) {
        return Err(Error::NegativeMass(bad.as_f64()));
    }
    let mut acc = F::zero();
    for (k, &pv) in p {
        acc += (pv - q.get(k).copied().unwrap_or_else(F::zero)).abs();
    }
    for (k, &qv) in q {
        if !p.contains_key(k) {
            acc += qv;
        }
    }
    Ok(acc / F::of(2.0))
}

/// Normalized frequency table of the given rows.
pub fn empirical_table<'a, F: Scalar>(rows: impl IntoIterator<Item = &'a [u8]>) -> DistTable<F> {
    let mut counts: BTreeMap<u64, usize> = BTreeMap::new();
    let mut total = 0usize;
    for r in rows {
        *counts.entry(pack(r)).or_default() += 1;
        total += 1;
    }
    let denom = F::from_count(total.max(1));
    counts
        .into_iter()
        .map(|(k, c)| (k, F::from_count(c) / denom))
        .collect()
}
