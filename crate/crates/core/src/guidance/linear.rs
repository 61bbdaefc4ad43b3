//! Per-operation linear scorer and its parameter file.
//!
//! ```text
//! absynth-scorer 1
//! positions 4
//! features 20
//! op Add 0.5 -0.25 ...
//! ```
//!
//! Each `op` line carries `positions × features` numbers: one weight vector
//! per argument position, the last one shared by all later positions.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;

use super::features::VALUE_FEATURES;
use super::{ScoreContext, Scorer};
use crate::dsl::Operation;
use crate::lang::Term;
use crate::librarian::Abstraction;
use crate::synthesis::store::ValueEntry;

/// Argument positions with their own weight vector.
pub const POSITIONS: usize = 4;
/// Length of one operation's parameter vector.
pub const PARAMS_PER_OP: usize = POSITIONS * VALUE_FEATURES;
const MAGIC: &str = "absynth-scorer 1";

#[derive(Clone, Debug, Default, PartialEq)]
pub struct LinearScorer {
    params: BTreeMap<String, Vec<f64>>,
}

#[derive(Debug, Error)]
pub enum ScorerFileError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
}

/// How a new operation's parameters were initialized.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum WarmStart {
    Copied {
        from: String,
    },
    /// The outermost operation had no parameters, or the body has no
    /// outermost operation.
    Neutral {
        reason: String,
    },
    /// Parameterless abstractions become constants and need no parameters.
    Constant,
}

impl LinearScorer {
    pub fn new() -> Self {
        Self::default()
    }

    /// The all-zero vector, which scores every candidate equally.
    pub fn neutral() -> Vec<f64> {
        vec![0.0; PARAMS_PER_OP]
    }

    pub fn params(&self) -> &BTreeMap<String, Vec<f64>> {
        &self.params
    }

    pub fn set_params(&mut self, op: &str, params: Vec<f64>) {
        assert_eq!(params.len(), PARAMS_PER_OP, "parameter vector length");
        self.params.insert(op.to_string(), params);
    }

    pub(crate) fn op_params_mut(&mut self, op: &str) -> Option<&mut Vec<f64>> {
        self.params.get_mut(op)
    }

    /// Weight vector used for argument `position` of `op`.
    pub fn position_weights(&self, op: &str, position: usize) -> Option<&[f64]> {
        let p = position.min(POSITIONS - 1);
        self.params
            .get(op)
            .map(|v| &v[p * VALUE_FEATURES..(p + 1) * VALUE_FEATURES])
    }

    pub fn score_features(&self, op: &str, position: usize, features: &[f64]) -> f64 {
        match self.position_weights(op, position) {
            Some(w) if features.len() == VALUE_FEATURES => {
                w.iter().zip(features).map(|(a, b)| a * b).sum()
            }
            _ => 0.0,
        }
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{MAGIC}");
        let _ = writeln!(out, "positions {POSITIONS}");
        let _ = writeln!(out, "features {VALUE_FEATURES}");
        for (op, v) in &self.params {
            let nums: Vec<String> = v.iter().map(|x| format!("{x:?}")).collect();
            let _ = writeln!(out, "op {op} {}", nums.join(" "));
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self, ScorerFileError> {
        let bad = |line: usize, m: &str| ScorerFileError::Malformed {
            line,
            message: m.to_string(),
        };
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
        if lines.next().map(|(_, l)| l) != Some(MAGIC) {
            return Err(bad(1, "missing `absynth-scorer 1` header"));
        }
        let mut scorer = LinearScorer::new();
        for (no, line) in lines {
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split_whitespace();
            match parts.next() {
                Some("positions") => {
                    if parts.next() != Some(&POSITIONS.to_string()) {
                        return Err(bad(no, "unsupported position count"));
                    }
                }
                Some("features") => {
                    if parts.next() != Some(&VALUE_FEATURES.to_string()) {
                        return Err(bad(no, "unsupported feature count"));
                    }
                }
                Some("op") => {
                    let name = parts.next().ok_or_else(|| bad(no, "missing op name"))?;
                    let v: Result<Vec<f64>, _> = parts.map(str::parse::<f64>).collect();
                    let v = v.map_err(|_| bad(no, "bad number"))?;
                    if v.len() != PARAMS_PER_OP || v.iter().any(|x| !x.is_finite()) {
                        return Err(bad(no, "expected finite parameters of the right length"));
                    }
                    scorer.params.insert(name.to_string(), v);
                }
                _ => return Err(bad(no, "unknown directive")),
            }
        }
        Ok(scorer)
    }

    pub fn save(&self, path: &Path) -> Result<(), ScorerFileError> {
        std::fs::write(path, self.render())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, ScorerFileError> {
        Self::parse(&std::fs::read_to_string(path)?)
    }
}

impl Scorer for LinearScorer {
    fn score(
        &self,
        op: &Operation,
        _prefix: &[&ValueEntry],
        candidate: &ValueEntry,
        ctx: &ScoreContext<'_>,
    ) -> f64 {
        self.score_features(&op.name, ctx.position, &candidate.features)
    }

    fn prefix_sensitive(&self) -> bool {
        false
    }

    fn is_static(&self) -> bool {
        true
    }

    fn op_params(&self, op: &str) -> Option<&[f64]> {
        self.params.get(op).map(Vec::as_slice)
    }
}

/// Outermost operation applied by an abstraction body.
pub fn outermost_op(body: &Term) -> Option<&str> {
    match body {
        Term::Lam(_, inner) => outermost_op(inner),
        t => t.head_prim(),
    }
}

/// Adds parameters for the operation created from `a`, copied from the
/// outermost operation of its body when that operation has parameters.
pub fn warm_start_new_op(scorer: &LinearScorer, a: &Abstraction) -> (LinearScorer, WarmStart) {
    let mut out = scorer.clone();
    if a.arity == 0 {
        return (out, WarmStart::Constant);
    }
    match outermost_op(&a.body) {
        Some(op) => match scorer.params.get(op) {
            Some(v) => {
                out.params.insert(a.name.clone(), v.clone());
                (
                    out,
                    WarmStart::Copied {
                        from: op.to_string(),
                    },
                )
            }
            None => {
                out.params.insert(a.name.clone(), LinearScorer::neutral());
                (
                    out,
                    WarmStart::Neutral {
                        reason: format!("`{op}` has no parameters"),
                    },
                )
            }
        },
        None => {
            out.params.insert(a.name.clone(), LinearScorer::neutral());
            (
                out,
                WarmStart::Neutral {
                    reason: "body has no outermost operation".into(),
                },
            )
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_round_trip_is_exact() {
        let mut s = LinearScorer::new();
        let v: Vec<f64> = (0..PARAMS_PER_OP)
            .map(|i| (i as f64 * 0.37).sin() / 3.0)
            .collect();
        s.set_params("Add", v);
        s.set_params("fn_1", LinearScorer::neutral());
        assert_eq!(LinearScorer::parse(&s.render()).unwrap(), s);
    }

    #[test]
    fn rejects_bad_files() {
        assert!(LinearScorer::parse("nope").is_err());
        assert!(LinearScorer::parse("absynth-scorer 1\nop Add 1 2\n").is_err());
    }
}
