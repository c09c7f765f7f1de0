//! Single-entry edits of a certificate, for negative controls.
//!
//! Syntax: `M[r][c]=v` sets both `M[r][c]` and `M[c][r]`; `w1[i][FLAG]=v` (or `w2`)
//! sets the coefficient of `FLAG` in the `i`-th vector, `v = 0` removing it.
//! Indices are 0-based.

use quasiperm_core::flag::{Certificate, RootedPermutation};
use quasiperm_core::perturbation::SymmetricForm;
use quasiperm_core::rational::parse_rational;
use quasiperm_core::Rational;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MutationError {
    #[error("mutation `{0}` does not match M[r][c]=v or w1[i][FLAG]=v")]
    Syntax(String),
    #[error("mutation `{0}` indexes outside the certificate")]
    OutOfRange(String),
    #[error("mutation `{spec}`: {message}")]
    Value { spec: String, message: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Mutation {
    Matrix {
        row: usize,
        col: usize,
        value: Rational,
    },
    Vector {
        side: usize,
        index: usize,
        flag: RootedPermutation,
        value: Rational,
    },
}

fn brackets(text: &str) -> Option<(Vec<&str>, &str)> {
    let mut parts = Vec::new();
    let mut rest = text;
    while let Some(stripped) = rest.strip_prefix('[') {
        let end = stripped.find(']')?;
        // Flags contain brackets themselves; the last group runs to the final `]`.
        let (inner, after) = if parts.len() == 1 {
            let last = stripped.rfind(']')?;
            (&stripped[..last], &stripped[last + 1..])
        } else {
            (&stripped[..end], &stripped[end + 1..])
        };
        parts.push(inner);
        rest = after;
    }
    Some((parts, rest))
}

impl std::str::FromStr for Mutation {
    type Err = MutationError;

    fn from_str(spec: &str) -> Result<Self, Self::Err> {
        let syntax = || MutationError::Syntax(spec.to_string());
        let (target, value) = spec.split_once('=').ok_or_else(syntax)?;
        let value = parse_rational(value).map_err(|e| MutationError::Value {
            spec: spec.to_string(),
            message: e.to_string(),
        })?;
        let target = target.trim();
        let index = |s: &str| s.trim().parse::<usize>().map_err(|_| syntax());
        if let Some(rest) = target.strip_prefix('M') {
            let (parts, tail) = brackets(rest).ok_or_else(syntax)?;
            if parts.len() != 2 || !tail.is_empty() {
                return Err(syntax());
            }
            return Ok(Mutation::Matrix {
                row: index(parts[0])?,
                col: index(parts[1])?,
                value,
            });
        }
        let side = match target.get(..2) {
            Some("w1") => 1,
            Some("w2") => 2,
            _ => return Err(syntax()),
        };
        let (parts, tail) = brackets(&target[2..]).ok_or_else(syntax)?;
        if parts.len() != 2 || !tail.is_empty() {
            return Err(syntax());
        }
        let flag = parts[1]
            .parse()
            .map_err(|e: quasiperm_core::flag::FlagError| MutationError::Value {
                spec: spec.to_string(),
                message: e.to_string(),
            })?;
        Ok(Mutation::Vector {
            side,
            index: index(parts[0])?,
            flag,
            value,
        })
    }
}

pub fn apply_mutation(cert: &Certificate, m: &Mutation, spec: &str) -> Result<Certificate, MutationError> {
    let mut out = cert.clone();
    let range = || MutationError::OutOfRange(spec.to_string());
    match m {
        Mutation::Matrix { row, col, value } => {
            let mut rows = cert.m.rows();
            if *row >= rows.len() || *col >= rows.len() {
                return Err(range());
            }
            rows[*row][*col] = value.clone();
            rows[*col][*row] = value.clone();
            out.m = SymmetricForm::new(rows).expect("edited symmetrically");
        }
        Mutation::Vector {
            side,
            index,
            flag,
            value,
        } => {
            let vectors = if *side == 1 { &mut out.w1 } else { &mut out.w2 };
            let v = vectors.get_mut(*index).ok_or_else(range)?;
            let old = v.get(flag).cloned().unwrap_or_default();
            v.add_term(flag.clone(), value - old)
                .map_err(|e| MutationError::Value {
                    spec: spec.to_string(),
                    message: e.to_string(),
                })?;
        }
    }
    Ok(out)
}

/// Parses and applies a textual mutation.
pub fn mutate(cert: &Certificate, spec: &str) -> Result<Certificate, MutationError> {
    apply_mutation(cert, &spec.parse()?, spec)
}
