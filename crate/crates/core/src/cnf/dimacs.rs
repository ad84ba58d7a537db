//! DIMACS CNF reading and writing.
//!
//! Comment lines start with `c`. The header `p cnf <vars> <clauses>` must come
//! before any clause. Clauses are whitespace separated signed 1-based literals
//! terminated by `0` and may span lines. A line starting with `%` ends the
//! clause section (SATLIB style).

use std::fmt::Write;

use super::{Clause, ConstraintSet, Literal};
use crate::error::{Error, Result};

fn err(line: usize, msg: impl Into<String>) -> Error {
    Error::Dimacs {
        line,
        msg: msg.into(),
    }
}

fn parse_header(line_no: usize, line: &str) -> Result<(usize, usize)> {
    let parts: Vec<&str> = line.split_whitespace().collect();
    match parts.as_slice() {
        ["p", "cnf", n, l] => {
            let n = n
                .parse()
                .map_err(|_| err(line_no, format!("bad variable count {n:?}")))?;
            let l = l
                .parse()
                .map_err(|_| err(line_no, format!("bad clause count {l:?}")))?;
            Ok((n, l))
        }
        _ => Err(err(line_no, format!("malformed header {line:?}"))),
    }
}

pub fn parse_dimacs(text: &str) -> Result<ConstraintSet> {
    let mut header: Option<(usize, usize)> = None;
    let mut clauses = Vec::new();
    let mut pending: Vec<Literal> = Vec::new();
    let mut last_line = 0;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        last_line = line_no;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('c') {
            continue;
        }
        if line.starts_with('%') {
            break;
        }
        if line.starts_with('p') {
            if header.is_some() {
                return Err(err(line_no, "duplicate header"));
            }
            header = Some(parse_header(line_no, line)?);
            continue;
        }
        let (n_vars, _) = header.ok_or_else(|| err(line_no, "clause before header"))?;
        for tok in line.split_whitespace() {
            let lit: i64 = tok
                .parse()
                .map_err(|_| err(line_no, format!("bad literal {tok:?}")))?;
            if lit == 0 {
                if pending.is_empty() {
                    return Err(Error::EmptyClause);
                }
                clauses.push(Clause::new(std::mem::take(&mut pending))?);
                continue;
            }
            let l = Literal::from_dimacs(lit);
            if l.var >= n_vars {
                return Err(Error::VarOutOfRange {
                    index: l.var,
                    n_vars,
                });
            }
            pending.push(l);
        }
    }

    let (n_vars, declared) = header.ok_or_else(|| err(last_line, "missing header"))?;
    if !pending.is_empty() {
        return Err(err(last_line, "clause not terminated by 0"));
    }
    if clauses.len() != declared {
        return Err(Error::ClauseCount {
            declared,
            found: clauses.len(),
        });
    }
    ConstraintSet::new(n_vars, clauses, Vec::new())
}

/// Writes the clauses of `cs` as DIMACS. Exactly-one groups are not
/// representable and belong in the sidecar.
pub fn emit_dimacs(cs: &ConstraintSet) -> String {
    let mut out = format!("p cnf {} {}\n", cs.n_vars(), cs.clauses().len());
    for c in cs.clauses() {
        for l in c.literals() {
            let _ = write!(out, "{} ", l.to_dimacs());
        }
        out.push_str("0\n");
    }
    out
}
