//! Constraint sets over Boolean variables: CNF clauses plus exactly-one groups.
//!
//! Constraints are indexed clauses first (`0..clauses.len()`), then
//! exactly-one groups.

mod dimacs;
mod extremal;
mod graph;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

pub use dimacs::{emit_dimacs, parse_dimacs};
pub use extremal::{
    check_extremal, check_extremal_with_cap, clauses_jointly_violable, jointly_violating_assignment,
    ExtremalReport, ExtremalWitness, DEFAULT_EXTREMAL_CAP,
};
pub use graph::{build_dependency_graph, gamma, DependencyGraph};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Literal {
    pub var: usize,
    pub negated: bool,
}

impl Literal {
    pub fn pos(var: usize) -> Self {
        Self {
            var,
            negated: false,
        }
    }

    pub fn neg(var: usize) -> Self {
        Self { var, negated: true }
    }

    /// From a signed 1-based DIMACS literal.
    pub fn from_dimacs(lit: i64) -> Self {
        debug_assert!(lit != 0);
        let var = (lit.unsigned_abs() - 1) as usize;
        Self {
            var,
            negated: lit < 0,
        }
    }

    pub fn to_dimacs(self) -> i64 {
        let v = self.var as i64 + 1;
        if self.negated {
            -v
        } else {
            v
        }
    }

    #[inline]
    pub fn is_true(self, x: &[u8]) -> bool {
        (x[self.var] != 0) != self.negated
    }

    /// The value of the variable that makes this literal false.
    #[inline]
    pub fn falsifying_value(self) -> u8 {
        u8::from(self.negated)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Clause {
    literals: Vec<Literal>,
}

impl Clause {
    pub fn new(literals: Vec<Literal>) -> Result<Self> {
        if literals.is_empty() {
            return Err(Error::EmptyClause);
        }
        let mut seen = BTreeSet::new();
        for l in &literals {
            if !seen.insert(l.var) {
                return Err(Error::DuplicateVariable(l.var));
            }
        }
        Ok(Self { literals })
    }

    pub fn literals(&self) -> &[Literal] {
        &self.literals
    }

    pub fn len(&self) -> usize {
        self.literals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.literals.is_empty()
    }

    #[inline]
    pub fn is_satisfied(&self, x: &[u8]) -> bool {
        self.literals.iter().any(|l| l.is_true(x))
    }

    pub fn vars(&self) -> impl Iterator<Item = usize> + '_ {
        self.literals.iter().map(|l| l.var)
    }
}

/// The hard constraints of a model: `n_vars` Boolean variables, CNF clauses
/// and exactly-one cardinality groups.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstraintSet {
    n_vars: usize,
    clauses: Vec<Clause>,
    exactly_one: Vec<Vec<usize>>,
}

impl ConstraintSet {
    pub fn new(n_vars: usize, clauses: Vec<Clause>, exactly_one: Vec<Vec<usize>>) -> Result<Self> {
        for c in &clauses {
            for v in c.vars() {
                if v >= n_vars {
                    return Err(Error::VarOutOfRange { index: v, n_vars });
                }
            }
        }
        let mut cs = Self {
            n_vars,
            clauses,
            exactly_one: Vec::new(),
        };
        cs.add_exactly_one_groups(exactly_one)?;
        Ok(cs)
    }

    /// Builds clauses from signed 1-based literals, as in DIMACS.
    pub fn from_dimacs_clauses(n_vars: usize, clauses: &[&[i64]]) -> Result<Self> {
        let clauses = clauses
            .iter()
            .map(|c| Clause::new(c.iter().map(|&l| Literal::from_dimacs(l)).collect()))
            .collect::<Result<Vec<_>>>()?;
        Self::new(n_vars, clauses, Vec::new())
    }

    pub fn unconstrained(n_vars: usize) -> Self {
        Self {
            n_vars,
            clauses: Vec::new(),
            exactly_one: Vec::new(),
        }
    }

    pub fn add_exactly_one_groups(&mut self, groups: Vec<Vec<usize>>) -> Result<()> {
        for (offset, g) in groups.iter().enumerate() {
            if g.is_empty() {
                return Err(Error::EmptyGroup(self.exactly_one.len() + offset));
            }
            let mut seen = BTreeSet::new();
            for &v in g {
                if v >= self.n_vars {
                    return Err(Error::VarOutOfRange {
                        index: v,
                        n_vars: self.n_vars,
                    });
                }
                if !seen.insert(v) {
                    return Err(Error::DuplicateVariable(v));
                }
            }
        }
        self.exactly_one.extend(groups);
        Ok(())
    }

    /// Merges the exactly-one groups of a sidecar file.
    pub fn merge_sidecar(&mut self, sidecar: &Sidecar) -> Result<()> {
        self.add_exactly_one_groups(sidecar.exactly_one.clone())
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    pub fn exactly_one_groups(&self) -> &[Vec<usize>] {
        &self.exactly_one
    }

    pub fn n_constraints(&self) -> usize {
        self.clauses.len() + self.exactly_one.len()
    }

    pub fn has_groups(&self) -> bool {
        !self.exactly_one.is_empty()
    }

    /// Sorted, deduplicated variables of constraint `j`.
    pub fn constraint_vars(&self, j: usize) -> Vec<usize> {
        let mut vars: Vec<usize> = if j < self.clauses.len() {
            self.clauses[j].vars().collect()
        } else {
            self.exactly_one[j - self.clauses.len()].clone()
        };
        vars.sort_unstable();
        vars
    }

    /// Whether constraint `j` is violated by the full assignment `x`.
    #[inline]
    pub fn is_violated(&self, j: usize, x: &[u8]) -> bool {
        if j < self.clauses.len() {
            !self.clauses[j].is_satisfied(x)
        } else {
            let g = &self.exactly_one[j - self.clauses.len()];
            g.iter().map(|&v| usize::from(x[v] != 0)).sum::<usize>() != 1
        }
    }

    pub fn violated(&self, x: &[u8]) -> Result<Vec<usize>> {
        if x.len() != self.n_vars {
            return Err(Error::LengthMismatch {
                expected: self.n_vars,
                got: x.len(),
            });
        }
        Ok((0..self.n_constraints())
            .filter(|&j| self.is_violated(j, x))
            .collect())
    }

    /// `C(x)`: true iff `x` satisfies every constraint.
    pub fn is_satisfied(&self, x: &[u8]) -> bool {
        x.len() == self.n_vars && (0..self.n_constraints()).all(|j| !self.is_violated(j, x))
    }

    /// Same constraints with the clause list permuted.
    pub fn with_clause_order(&self, order: &[usize]) -> Self {
        Self {
            n_vars: self.n_vars,
            clauses: order.iter().map(|&j| self.clauses[j].clone()).collect(),
            exactly_one: self.exactly_one.clone(),
        }
    }
}

/// Indices of the constraints that `x` violates; empty iff `C(x) = 1`.
pub fn violated_constraints(cs: &ConstraintSet, x: &[u8]) -> Result<Vec<usize>> {
    cs.violated(x)
}

/// JSON sidecar carrying what DIMACS cannot: exactly-one groups and
/// free-form instance metadata.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    #[serde(default)]
    pub exactly_one: Vec<Vec<usize>>,
    #[serde(flatten)]
    pub metadata: serde_json::Map<String, serde_json::Value>,
}

impl Sidecar {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    pub(crate) fn two_clause() -> ConstraintSet {
        ConstraintSet::from_dimacs_clauses(3, &[&[1, 2], &[-1, 3]]).unwrap()
    }

    #[test]
    fn violated_on_two_clause() {
        let cs = two_clause();
        assert_eq!(violated_constraints(&cs, &[0, 0, 1]).unwrap(), vec![0]);
        assert!(violated_constraints(&cs, &[0, 1, 1]).unwrap().is_empty());
        assert!(matches!(
            violated_constraints(&cs, &[0, 1]),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn exactly_one_group_violation() {
        let cs = ConstraintSet::new(2, vec![], vec![vec![0, 1]]).unwrap();
        assert_eq!(violated_constraints(&cs, &[1, 1]).unwrap(), vec![0]);
        assert_eq!(violated_constraints(&cs, &[0, 0]).unwrap(), vec![0]);
        assert!(violated_constraints(&cs, &[0, 1]).unwrap().is_empty());
    }

    #[test]
    fn clause_rejects_duplicates_and_empty() {
        assert!(matches!(Clause::new(vec![]), Err(Error::EmptyClause)));
        assert!(matches!(
            Clause::new(vec![Literal::pos(1), Literal::neg(1)]),
            Err(Error::DuplicateVariable(1))
        ));
    }

    #[test]
    fn group_validation() {
        assert!(matches!(
            ConstraintSet::new(2, vec![], vec![vec![]]),
            Err(Error::EmptyGroup(0))
        ));
        assert!(matches!(
            ConstraintSet::new(2, vec![], vec![vec![0, 2]]),
            Err(Error::VarOutOfRange { index: 2, .. })
        ));
    }

    #[test]
    fn sidecar_keeps_metadata() {
        let s = Sidecar::from_json(r#"{"exactly_one": [[0, 1]], "family": "routes"}"#).unwrap();
        assert_eq!(s.exactly_one, vec![vec![0, 1]]);
        assert_eq!(s.metadata["family"], "routes");
        let mut cs = ConstraintSet::unconstrained(2);
        cs.merge_sidecar(&s).unwrap();
        assert_eq!(cs.n_constraints(), 1);
        assert_eq!(cs.constraint_vars(0), vec![0, 1]);
    }
}
