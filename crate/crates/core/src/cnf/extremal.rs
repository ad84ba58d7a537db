//! The extremal condition: no assignment violates two constraints that share
//! a variable.

use super::{build_dependency_graph, ConstraintSet};
use crate::error::{Error, Result};

/// Largest variable union enumerated for one pair of constraints.
pub const DEFAULT_EXTREMAL_CAP: usize = 24;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtremalWitness {
    pub first: usize,
    pub second: usize,
    /// `(variable, value)` over the union of the two constraints' variables.
    pub assignment: Vec<(usize, u8)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtremalReport {
    pub extremal: bool,
    pub witness: Option<ExtremalWitness>,
}

pub fn check_extremal(cs: &ConstraintSet) -> Result<ExtremalReport> {
    check_extremal_with_cap(cs, DEFAULT_EXTREMAL_CAP)
}

pub fn check_extremal_with_cap(cs: &ConstraintSet, cap: usize) -> Result<ExtremalReport> {
    let g = build_dependency_graph(cs);
    let n_clauses = cs.clauses().len();
    for (i, j) in g.edges() {
        let witness = if i < n_clauses && j < n_clauses {
            clause_pair_witness(cs, i, j)
        } else {
            jointly_violating_assignment(cs, i, j, cap)?
        };
        if let Some(assignment) = witness {
            return Ok(ExtremalReport {
                extremal: false,
                witness: Some(ExtremalWitness {
                    first: i,
                    second: j,
                    assignment,
                }),
            });
        }
    }
    Ok(ExtremalReport {
        extremal: true,
        witness: None,
    })
}

/// Two clauses can both be false iff every shared variable has the same
/// polarity in both; the falsifying assignment is then unique.
pub fn clauses_jointly_violable(cs: &ConstraintSet, i: usize, j: usize) -> bool {
    clause_pair_witness(cs, i, j).is_some()
}

fn clause_pair_witness(cs: &ConstraintSet, i: usize, j: usize) -> Option<Vec<(usize, u8)>> {
    let mut assignment: Vec<(usize, u8)> = cs.clauses()[i]
        .literals()
        .iter()
        .map(|l| (l.var, l.falsifying_value()))
        .collect();
    for l in cs.clauses()[j].literals() {
        match assignment.iter().find(|(v, _)| *v == l.var) {
            Some(&(_, val)) if val != l.falsifying_value() => return None,
            Some(_) => {}
            None => assignment.push((l.var, l.falsifying_value())),
        }
    }
    assignment.sort_unstable();
    Some(assignment)
}

/// Enumerates assignments over `var(c_i) ∪ var(c_j)` and returns the first
/// (in lexicographic order) that violates both constraints.
pub fn jointly_violating_assignment(
    cs: &ConstraintSet,
    i: usize,
    j: usize,
    cap: usize,
) -> Result<Option<Vec<(usize, u8)>>> {
    let mut vars = cs.constraint_vars(i);
    vars.extend(cs.constraint_vars(j));
    vars.sort_unstable();
    vars.dedup();
    if vars.len() > cap {
        return Err(Error::CapExceeded {
            needed: vars.len(),
            cap,
        });
    }
    let u = vars.len();
    let mut x = vec![0u8; cs.n_vars()];
    for code in 0u64..(1u64 << u) {
        for (pos, &v) in vars.iter().enumerate() {
            x[v] = ((code >> (u - 1 - pos)) & 1) as u8;
        }
        if cs.is_violated(i, &x) && cs.is_violated(j, &x) {
            return Ok(Some(vars.iter().map(|&v| (v, x[v])).collect()));
        }
    }
    Ok(None)
}
