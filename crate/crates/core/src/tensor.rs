//! Arithmetic clause checking over assignment batches.
//!
//! A clause set with `L` clauses of width at most `K` over `n` variables is
//! encoded as
//!
//! * `W ∈ {-1,0,1}^{L×K×n}`: `W[j,k,i] = 1` if the `k`-th literal of clause `j`
//!   is `X_i`, `-1` if it is `¬X_i`;
//! * `b ∈ {0,1}^{L×K}`: `b[j,k] = 1` if that literal is negated;
//! * `V ∈ {0,1}^{L×n}`: `V[j,i] = 1` if clause `j` mentions `X_i`.
//!
//! For a batch `x ∈ {0,1}^{B×n}`, `Z[l,j,k] = Σ_i W[j,k,i]·x[l,i] + b[j,k]` is
//! the truth value of each literal, `S[l,j] = 1 − max_k Z[l,j,k]` flags violated
//! clauses and `A[l,i] = 1(Σ_j S[l,j]·V[j,i] ≥ 1)` marks variables to resample.
//! Short clauses are padded with all-zero `W` rows and `b = 0`, so a padded
//! slot has `Z = 0` and never satisfies its clause.

use ndarray::{Array2, Array3, ArrayView2, Axis};

use crate::cnf::ConstraintSet;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct ClauseTensors {
    w: Array3<i8>,
    b: Array2<u8>,
    v: Array2<u8>,
    /// Nonzero entries of `W` as `(j, k, i, W[j,k,i])`.
    nonzero: Vec<(usize, usize, usize, i8)>,
}

/// `Z` and `S` for one batch.
#[derive(Debug, Clone, PartialEq)]
pub struct SatisfactionState {
    pub z: Array3<i8>,
    pub s: Array2<u8>,
}

impl ClauseTensors {
    /// Encodes the clauses of `cs`; exactly-one groups are not tensorized.
    pub fn new(cs: &ConstraintSet) -> Self {
        let n = cs.n_vars();
        let l = cs.clauses().len();
        let k = cs.clauses().iter().map(|c| c.len()).max().unwrap_or(0);
        let mut w = Array3::<i8>::zeros((l, k, n));
        let mut b = Array2::<u8>::zeros((l, k));
        let mut v = Array2::<u8>::zeros((l, n));
        for (j, clause) in cs.clauses().iter().enumerate() {
            for (slot, lit) in clause.literals().iter().enumerate() {
                w[[j, slot, lit.var]] = if lit.negated { -1 } else { 1 };
                b[[j, slot]] = u8::from(lit.negated);
            }
        }
        for ((j, _, i), &wv) in w.indexed_iter() {
            if wv != 0 {
                v[[j, i]] = 1;
            }
        }
        let nonzero = w
            .indexed_iter()
            .filter(|(_, &wv)| wv != 0)
            .map(|((j, slot, i), &wv)| (j, slot, i, wv))
            .collect();
        Self { w, b, v, nonzero }
    }

    pub fn w(&self) -> &Array3<i8> {
        &self.w
    }

    pub fn b(&self) -> &Array2<u8> {
        &self.b
    }

    pub fn v(&self) -> &Array2<u8> {
        &self.v
    }

    /// Number of clauses `L`.
    pub fn n_clauses(&self) -> usize {
        self.w.dim().0
    }

    /// Maximum clause width `K`.
    pub fn width(&self) -> usize {
        self.w.dim().1
    }

    pub fn n_vars(&self) -> usize {
        self.w.dim().2
    }

    /// Computes `Z` and `S` for every row of `x`.
    ///
    /// Only the nonzero entries of `W` contribute to `Σ_i W[j,k,i]·x[l,i]`, so the
    /// sum runs over them; each slot holds at most one.
    pub fn satisfaction_pass(&self, x: ArrayView2<u8>) -> Result<SatisfactionState> {
        let (rows, width) = x.dim();
        if width != self.n_vars() {
            return Err(Error::LengthMismatch {
                expected: self.n_vars(),
                got: width,
            });
        }
        let (l, k) = (self.n_clauses(), self.width());
        let mut z = Array3::<i8>::zeros((rows, l, k));
        for (mut zr, xr) in z.outer_iter_mut().zip(x.outer_iter()) {
            zr.assign(&self.b.mapv(|v| v as i8));
            for &(j, slot, i, wv) in &self.nonzero {
                zr[[j, slot]] += wv * xr[i] as i8;
            }
        }
        if cfg!(debug_assertions) {
            for zr in z.outer_iter() {
                for &(j, slot, _, _) in &self.nonzero {
                    debug_assert!(matches!(zr[[j, slot]], 0 | 1), "Z outside {{0,1}}");
                }
            }
        }
        let s = z.map_axis(Axis(2), |lits| {
            1 - lits.iter().copied().max().unwrap_or(0).clamp(0, 1) as u8
        });
        Ok(SatisfactionState { z, s })
    }

    /// `A[l,i] = 1(Σ_j S[l,j]·V[j,i] ≥ 1)`.
    pub fn resample_mask(&self, s: ArrayView2<u8>) -> Result<Array2<u8>> {
        let (rows, l) = s.dim();
        if l != self.n_clauses() {
            return Err(Error::LengthMismatch {
                expected: self.n_clauses(),
                got: l,
            });
        }
        let mut a = Array2::<u8>::zeros((rows, self.n_vars()));
        for (mut ar, sr) in a.outer_iter_mut().zip(s.outer_iter()) {
            for (j, _) in sr.iter().enumerate().filter(|(_, &sv)| sv != 0) {
                ar.zip_mut_with(&self.v.row(j), |a, &v| *a |= v);
            }
        }
        Ok(a)
    }
}

pub fn encode_tensors(cs: &ConstraintSet) -> ClauseTensors {
    ClauseTensors::new(cs)
}

pub fn satisfaction_pass(t: &ClauseTensors, x: ArrayView2<u8>) -> Result<SatisfactionState> {
    t.satisfaction_pass(x)
}

pub fn resample_mask(t: &ClauseTensors, s: ArrayView2<u8>) -> Result<Array2<u8>> {
    t.resample_mask(s)
}
