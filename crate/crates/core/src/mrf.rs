//! Constrained MRFs in single-variable form: `P(x) ∝ exp(Σ_i θ_i x_i)·C(x)`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::cnf::{Clause, ConstraintSet, Literal};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Per-variable natural-log weights `θ`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams<F> {
    pub theta: Vec<F>,
}

/// `P_i = P(X_i = 0) = 1 / (1 + exp(θ_i))`.
#[derive(Debug, Clone, PartialEq)]
pub struct MarginalVector<F> {
    pub p_zero: Vec<F>,
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    n: usize,
    theta: Vec<f64>,
}

impl<F: Scalar> ModelParams<F> {
    pub fn new(theta: Vec<F>) -> Self {
        Self { theta }
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            theta: vec![F::zero(); n],
        }
    }

    pub fn from_f64(theta: &[f64]) -> Self {
        Self {
            theta: theta.iter().map(|&t| F::of(t)).collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.theta.len()
    }

    pub fn check_finite(&self) -> Result<()> {
        match self.theta.iter().position(|t| !t.is_finite()) {
            Some(i) => Err(Error::NonFinite(i)),
            None => Ok(()),
        }
    }

    pub fn check_len(&self, n: usize) -> Result<()> {
        if self.n() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                got: self.n(),
            });
        }
        Ok(())
    }

    /// `{"n": .., "theta": [..]}`
    pub fn to_json(&self) -> String {
        let file = ModelFile {
            n: self.n(),
            theta: self.theta.iter().map(|t| t.as_f64()).collect(),
        };
        serde_json::to_string_pretty(&file).expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ModelFile = serde_json::from_str(text)?;
        if file.theta.len() != file.n {
            return Err(Error::LengthMismatch {
                expected: file.n,
                got: file.theta.len(),
            });
        }
        let m = Self::from_f64(&file.theta);
        m.check_finite()?;
        Ok(m)
    }
}

pub fn marginals<F: Scalar>(m: &ModelParams<F>) -> Result<MarginalVector<F>> {
    m.check_finite()?;
    Ok(MarginalVector {
        p_zero: m
            .theta
            .iter()
            .map(|&t| F::one() / (F::one() + t.exp()))
            .collect(),
    })
}

/// `φ_θ(x) = Σ_i θ_i x_i`.
pub fn potential<F: Scalar>(m: &ModelParams<F>, x: &[u8]) -> Result<F> {
    m.check_len(x.len())?;
    Ok(m
        .theta
        .iter()
        .zip(x)
        .filter(|(_, &xi)| xi != 0)
        .map(|(&t, _)| t)
        .sum())
}

/// A potential with linear and pairwise terms:
/// `Σ_i a_i x_i + Σ_{i<j} a_ij x_i x_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorSpec<F> {
    pub linear: BTreeMap<usize, F>,
    /// Keys are ordered pairs `(i, j)` with `i < j`.
    pub pairwise: BTreeMap<(usize, usize), F>,
}

impl<F> Default for FactorSpec<F> {
    fn default() -> Self {
        Self {
            linear: BTreeMap::new(),
            pairwise: BTreeMap::new(),
        }
    }
}

#[derive(Deserialize)]
struct FactorFile {
    #[serde(default)]
    linear: BTreeMap<String, f64>,
    #[serde(default)]
    pairwise: Vec<Vec<serde_json::Value>>,
}

fn parse_index(v: &serde_json::Value) -> Result<usize> {
    match v {
        serde_json::Value::String(s) => s
            .parse()
            .map_err(|_| Error::InvalidFactor(format!("bad variable index {s:?}"))),
        serde_json::Value::Number(n) => n
            .as_u64()
            .map(|u| u as usize)
            .ok_or_else(|| Error::InvalidFactor(format!("bad variable index {n}"))),
        other => Err(Error::InvalidFactor(format!("bad variable index {other}"))),
    }
}

impl<F: Scalar> FactorSpec<F> {
    pub fn add_pairwise(&mut self, a: usize, b: usize, coef: F) -> Result<()> {
        if a == b {
            return Err(Error::InvalidFactor(format!(
                "pairwise term repeats variable {a}"
            )));
        }
        *self
            .pairwise
            .entry((a.min(b), a.max(b)))
            .or_insert_with(F::zero) += coef;
        Ok(())
    }

    /// Evaluates the potential directly.
    pub fn evaluate(&self, x: &[u8]) -> F {
        let lin: F = self
            .linear
            .iter()
            .filter(|(&i, _)| x[i] != 0)
            .map(|(_, &c)| c)
            .sum();
        let pair: F = self
            .pairwise
            .iter()
            .filter(|(&(a, b), _)| x[a] != 0 && x[b] != 0)
            .map(|(_, &c)| c)
            .sum();
        lin + pair
    }

    /// `{"linear": {"i": coef}, "pairwise": [["i", "j", coef]]}`. Interaction
    /// entries naming more than two variables are rejected.
    pub fn from_json(text: &str) -> Result<Self> {
        let file: FactorFile = serde_json::from_str(text)?;
        let mut spec = Self::default();
        for (k, v) in file.linear {
            let i: usize = k
                .parse()
                .map_err(|_| Error::InvalidFactor(format!("bad variable index {k:?}")))?;
            *spec.linear.entry(i).or_insert_with(F::zero) += F::of(v);
        }
        for entry in file.pairwise {
            let (coef, vars) = entry
                .split_last()
                .ok_or_else(|| Error::InvalidFactor("empty interaction entry".into()))?;
            let coef = coef
                .as_f64()
                .ok_or_else(|| Error::InvalidFactor(format!("bad coefficient {coef}")))?;
            let vars = vars.iter().map(parse_index).collect::<Result<Vec<_>>>()?;
            match vars.as_slice() {
                [a, b] => spec.add_pairwise(*a, *b, F::of(coef))?,
                [a] => *spec.linear.entry(*a).or_insert_with(F::zero) += F::of(coef),
                _ if vars.len() > 2 => return Err(Error::HigherOrder(vars.len())),
                _ => return Err(Error::InvalidFactor("interaction without variables".into())),
            }
        }
        Ok(spec)
    }
}

/// The four indicator variables `x̂_uv ⇔ (x_a = u ∧ x_b = v)` introduced for one
/// pairwise term, indexed by `2u + v`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AuxGroup {
    pub pair: (usize, usize),
    pub indicators: [usize; 4],
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VariableMap {
    /// Variables `0..n_original` keep their meaning.
    pub n_original: usize,
    pub aux: Vec<AuxGroup>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SingleVariableForm<F> {
    pub model: ModelParams<F>,
    pub constraints: ConstraintSet,
    pub mapping: VariableMap,
}

fn literal_for(var: usize, value: usize) -> Literal {
    if value == 1 {
        Literal::pos(var)
    } else {
        Literal::neg(var)
    }
}

/// Compiles pairwise terms into auxiliary indicator variables so that the
/// potential becomes linear.
///
/// For a term `c·x_a·x_b` four indicators `x̂_00..x̂_11` are appended with the
/// clauses `x̂_uv → [x_a = u]`, `x̂_uv → [x_b = v]` and
/// `[x_a = u] ∧ [x_b = v] → x̂_uv`, which pin each indicator to its truth-table
/// entry. The coefficient `c` goes on `x̂_11` alone, so `c·x̂_11 = c·x_a·x_b` on
/// every consistent assignment.
pub fn pairwise_to_single<F: Scalar>(
    f: &FactorSpec<F>,
    base: &ConstraintSet,
) -> Result<SingleVariableForm<F>> {
    let n = base.n_vars();
    for &i in f.linear.keys() {
        if i >= n {
            return Err(Error::VarOutOfRange { index: i, n_vars: n });
        }
    }
    for &(a, b) in f.pairwise.keys() {
        for v in [a, b] {
            if v >= n {
                return Err(Error::VarOutOfRange { index: v, n_vars: n });
            }
        }
        if a == b {
            return Err(Error::InvalidFactor(format!(
                "pairwise term repeats variable {a}"
            )));
        }
    }

    let n_ext = n + 4 * f.pairwise.len();
    let mut theta = vec![F::zero(); n_ext];
    for (&i, &c) in &f.linear {
        theta[i] += c;
    }
    let mut clauses: Vec<Clause> = base.clauses().to_vec();
    let mut aux = Vec::with_capacity(f.pairwise.len());
    for (g, (&(a, b), &c)) in f.pairwise.iter().enumerate() {
        let first = n + 4 * g;
        let indicators = [first, first + 1, first + 2, first + 3];
        for u in 0..2 {
            for v in 0..2 {
                let hat = indicators[2 * u + v];
                let (la, lb) = (literal_for(a, u), literal_for(b, v));
                let not = |l: Literal| Literal {
                    var: l.var,
                    negated: !l.negated,
                };
                clauses.push(Clause::new(vec![Literal::neg(hat), la])?);
                clauses.push(Clause::new(vec![Literal::neg(hat), lb])?);
                clauses.push(Clause::new(vec![not(la), not(lb), Literal::pos(hat)])?);
            }
        }
        theta[indicators[3]] = c;
        aux.push(AuxGroup {
            pair: (a, b),
            indicators,
        });
    }

    let mut constraints = ConstraintSet::new(n_ext, clauses, Vec::new())?;
    constraints.add_exactly_one_groups(base.exactly_one_groups().to_vec())?;
    Ok(SingleVariableForm {
        model: ModelParams::new(theta),
        constraints,
        mapping: VariableMap { n_original: n, aux },
    })
}
