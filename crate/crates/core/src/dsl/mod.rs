//! The evolving language: primitive operations, constants and learned abstractions.

mod io;
pub mod prims;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::lang::{check_type, Scope, SymbolKind, Term, Ty, TypeEnv, TypeError};
use crate::librarian::Abstraction;
pub use io::{load_library, parse_library, render_library, save_library, LibraryFileError};
pub use prims::BuiltinFn;

#[derive(Clone)]
pub enum OpKind {
    Primitive(BuiltinFn),
    /// `body` is a `(lamN ...)` over the operation's parameters.
    Learned {
        body: Term,
        iteration: usize,
    },
}

#[derive(Clone)]
pub struct Operation {
    pub name: String,
    pub params: Vec<Ty>,
    pub ret: Ty,
    pub kind: OpKind,
}

impl Operation {
    pub fn primitive(name: &str) -> Option<Operation> {
        let b = prims::builtin(name)?;
        Some(Operation {
            name: name.to_string(),
            params: b.params,
            ret: b.ret,
            kind: OpKind::Primitive(b.run),
        })
    }

    pub fn arity(&self) -> usize {
        self.params.len()
    }

    pub fn signature(&self) -> Ty {
        Ty::arrow(self.params.clone(), self.ret.clone())
    }

    pub fn is_learned(&self) -> bool {
        matches!(self.kind, OpKind::Learned { .. })
    }

    pub fn body(&self) -> Option<&Term> {
        match &self.kind {
            OpKind::Learned { body, .. } => Some(body),
            OpKind::Primitive(_) => None,
        }
    }
}

impl fmt::Debug for Operation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} : {}", self.name, self.signature())?;
        if let Some(body) = self.body() {
            write!(f, " = {body}")?;
        }
        Ok(())
    }
}

impl PartialEq for Operation {
    fn eq(&self, other: &Self) -> bool {
        let same_kind = match (&self.kind, &other.kind) {
            (OpKind::Primitive(_), OpKind::Primitive(_)) => true,
            (
                OpKind::Learned {
                    body: a,
                    iteration: i,
                },
                OpKind::Learned {
                    body: b,
                    iteration: j,
                },
            ) => a == b && i == j,
            _ => false,
        };
        same_kind && self.name == other.name && self.params == other.params && self.ret == other.ret
    }
}

/// A constant in the search's initial pool. Literal constants have no name;
/// learned zero-parameter abstractions are named and referenced by that name.
#[derive(Clone, Debug, PartialEq)]
pub struct Constant {
    pub name: Option<String>,
    pub term: Term,
    pub ty: Ty,
    pub iteration: Option<usize>,
}

impl Constant {
    pub fn literal(term: Term) -> Constant {
        let ty = match &term {
            Term::Int(_) => Ty::Int,
            Term::Bool(_) => Ty::Bool,
            Term::List(_) => Ty::IntList,
            other => panic!("not a literal: {other}"),
        };
        Constant {
            name: None,
            term,
            ty,
            iteration: None,
        }
    }

    /// The term a program uses to mention this constant.
    pub fn reference(&self) -> Term {
        match &self.name {
            Some(n) => Term::Prim(n.clone()),
            None => self.term.clone(),
        }
    }
}

#[derive(Debug, Error)]
pub enum DslError {
    #[error("name `{0}` is already taken")]
    NameCollision(String),
    #[error("abstraction body fails to typecheck: {0}")]
    BodyType(#[from] TypeError),
    #[error("abstraction `{name}` has arity {arity} but signature {signature}")]
    BadSignature {
        name: String,
        arity: usize,
        signature: Ty,
    },
}

/// A violation reported by [`DSLibrary::validate`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    DuplicateName(String),
    DuplicateConstant(String),
    MalformedSignature(String),
    MissingSemantics(String),
    BodyType { name: String, error: String },
    ConstantType { constant: String, error: String },
}

#[derive(Clone, Debug)]
pub struct DSLibrary {
    ops: Vec<Arc<Operation>>,
    constants: Vec<Constant>,
    version: u64,
    /// Abstractions discovered so far; names learned items `fn_<k>`.
    learned: usize,
    index: HashMap<String, usize>,
}

impl PartialEq for DSLibrary {
    fn eq(&self, other: &Self) -> bool {
        self.version == other.version
            && self.learned == other.learned
            && self.constants == other.constants
            && self.ops.len() == other.ops.len()
            && self.ops.iter().zip(&other.ops).all(|(a, b)| a == b)
    }
}

impl DSLibrary {
    /// Builds a library from primitive names. Panics on unknown names.
    pub fn from_primitives(names: &[&str], constants: Vec<Term>) -> DSLibrary {
        let ops = names
            .iter()
            .map(|n| Operation::primitive(n).unwrap_or_else(|| panic!("unknown primitive {n}")))
            .collect();
        DSLibrary::from_parts(
            ops,
            constants.into_iter().map(Constant::literal).collect(),
            0,
            0,
        )
    }

    pub(crate) fn from_parts(
        ops: Vec<Operation>,
        constants: Vec<Constant>,
        version: u64,
        learned: usize,
    ) -> DSLibrary {
        let ops: Vec<Arc<Operation>> = ops.into_iter().map(Arc::new).collect();
        let index = ops
            .iter()
            .enumerate()
            .map(|(i, o)| (o.name.clone(), i))
            .collect();
        DSLibrary {
            ops,
            constants,
            version,
            learned,
            index,
        }
    }

    pub fn ops(&self) -> &[Arc<Operation>] {
        &self.ops
    }

    pub fn constants(&self) -> &[Constant] {
        &self.constants
    }

    pub fn version(&self) -> u64 {
        self.version
    }

    pub fn learned_count(&self) -> usize {
        self.learned
    }

    /// Name the next learned abstraction will receive.
    pub fn next_abstraction_name(&self) -> String {
        format!("fn_{}", self.learned + 1)
    }

    pub fn op(&self, name: &str) -> Option<&Operation> {
        self.index.get(name).map(|i| self.ops[*i].as_ref())
    }

    pub fn op_index(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn constant(&self, name: &str) -> Option<&Constant> {
        self.constants
            .iter()
            .find(|c| c.name.as_deref() == Some(name))
    }

    pub fn is_learned(&self, name: &str) -> bool {
        self.op(name).is_some_and(Operation::is_learned)
            || self.constant(name).is_some_and(|c| c.name.is_some())
    }

    /// Whether `t` mentions any learned operation or constant.
    pub fn uses_learned(&self, t: &Term) -> bool {
        let mut found = false;
        t.walk(&mut |n| {
            if let Term::Prim(p) = n {
                found |= self.is_learned(p);
            }
        });
        found
    }

    /// Parameter lists of every function-typed argument any operation takes.
    pub fn lambda_contexts(&self) -> Vec<Vec<Ty>> {
        let mut seen = BTreeSet::new();
        for op in &self.ops {
            for p in &op.params {
                if let Ty::Arrow(params, _) = p {
                    seen.insert(params.clone());
                }
            }
        }
        seen.into_iter().collect()
    }

    /// Returns a copy extended with `a`. Abstractions with parameters become
    /// operations; parameterless ones become named constants.
    pub fn extend_with_abstraction(
        &self,
        a: &Abstraction,
        iteration: usize,
    ) -> Result<DSLibrary, DslError> {
        if self.op(&a.name).is_some() || self.constant(&a.name).is_some() {
            return Err(DslError::NameCollision(a.name.clone()));
        }
        let empty = BTreeMap::new();
        check_type(&a.body, &a.signature, &empty, self)?;
        let mut ops: Vec<Operation> = self.ops.iter().map(|o| o.as_ref().clone()).collect();
        let mut constants = self.constants.clone();
        if a.arity == 0 {
            if a.signature.is_arrow() {
                return Err(DslError::BadSignature {
                    name: a.name.clone(),
                    arity: 0,
                    signature: a.signature.clone(),
                });
            }
            constants.push(Constant {
                name: Some(a.name.clone()),
                term: a.body.clone(),
                ty: a.signature.clone(),
                iteration: Some(iteration),
            });
        } else {
            let (params, ret) = match a.signature.as_arrow() {
                Some((p, r)) if p.len() == a.arity => (p.to_vec(), r.clone()),
                _ => {
                    return Err(DslError::BadSignature {
                        name: a.name.clone(),
                        arity: a.arity,
                        signature: a.signature.clone(),
                    })
                }
            };
            ops.push(Operation {
                name: a.name.clone(),
                params,
                ret,
                kind: OpKind::Learned {
                    body: a.body.clone(),
                    iteration,
                },
            });
        }
        Ok(DSLibrary::from_parts(
            ops,
            constants,
            self.version + 1,
            self.learned + 1,
        ))
    }

    /// Checks name uniqueness, signature shape, semantics and learned bodies.
    pub fn validate(&self) -> Result<(), Vec<Violation>> {
        let mut v = Vec::new();
        let mut names = BTreeSet::new();
        for op in &self.ops {
            if !names.insert(op.name.clone()) {
                v.push(Violation::DuplicateName(op.name.clone()));
            }
            if op.params.is_empty() || !op.signature().is_well_formed() {
                v.push(Violation::MalformedSignature(op.name.clone()));
            }
            match &op.kind {
                OpKind::Primitive(_) => {
                    if prims::builtin(&op.name).is_none() {
                        v.push(Violation::MissingSemantics(op.name.clone()));
                    }
                }
                OpKind::Learned { body, .. } => {
                    if let Err(e) = check_type(body, &op.signature(), &BTreeMap::new(), self) {
                        v.push(Violation::BodyType {
                            name: op.name.clone(),
                            error: e.to_string(),
                        });
                    }
                }
            }
        }
        let mut literals = BTreeSet::new();
        for c in &self.constants {
            let key = match &c.name {
                Some(n) => {
                    if !names.insert(n.clone()) {
                        v.push(Violation::DuplicateName(n.clone()));
                    }
                    check_constant(c, self, &mut v);
                    continue;
                }
                None => format!("{} : {}", c.term, c.ty),
            };
            if !literals.insert(key.clone()) {
                v.push(Violation::DuplicateConstant(key));
            }
            check_constant(c, self, &mut v);
        }
        if v.is_empty() {
            Ok(())
        } else {
            Err(v)
        }
    }
}

fn check_constant(c: &Constant, lib: &DSLibrary, v: &mut Vec<Violation>) {
    if let Err(e) = check_type(&c.term, &c.ty, &BTreeMap::new(), lib) {
        v.push(Violation::ConstantType {
            constant: c.reference().to_string(),
            error: e.to_string(),
        });
    }
}

impl TypeEnv for DSLibrary {
    fn prim_type(&self, name: &str) -> Option<Ty> {
        if let Some(op) = self.op(name) {
            return Some(op.signature());
        }
        self.constant(name).map(|c| c.ty.clone())
    }
}

impl Scope for DSLibrary {
    fn resolve(&self, name: &str) -> Option<SymbolKind> {
        (self.op(name).is_some() || self.constant(name).is_some()).then_some(SymbolKind::Prim)
    }
}

/// The bundled integer-list language.
pub fn default_list_dsl() -> DSLibrary {
    DSLibrary::from_primitives(
        prims::LIST_DSL_OPS,
        vec![
            Term::Int(0),
            Term::Int(1),
            Term::Int(2),
            Term::Int(-1),
            Term::Bool(true),
            Term::Bool(false),
            Term::List(vec![]),
        ],
    )
}

/// Five primitives and four constants: nine symbols in total.
pub fn loop_dsl() -> DSLibrary {
    DSLibrary::from_primitives(prims::LOOP_DSL_OPS, (0..4).map(Term::Int).collect())
}

/// Number of syntactic symbol sequences of the given length over `symbols`
/// symbols, before any typing or deduplication.
pub fn syntactic_combinations(symbols: u64, length: u32) -> u128 {
    (symbols as u128).pow(length)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::{evaluate, infer_type, parse, EvalLimits, Value};

    #[test]
    fn map_signature() {
        let lib = default_list_dsl();
        assert_eq!(
            lib.op("Map").unwrap().signature(),
            Ty::arrow(
                vec![Ty::arrow(vec![Ty::Int], Ty::Int), Ty::IntList],
                Ty::IntList
            )
        );
    }

    #[test]
    fn bundled_languages_validate() {
        assert_eq!(default_list_dsl().validate(), Ok(()));
        assert_eq!(loop_dsl().validate(), Ok(()));
    }

    #[test]
    fn duplicate_names_are_reported() {
        let lib = DSLibrary::from_primitives(&["Add", "Sum", "Add"], vec![Term::Int(0)]);
        let v = lib.validate().unwrap_err();
        assert_eq!(v, vec![Violation::DuplicateName("Add".into())]);
    }

    #[test]
    fn duplicate_literals_are_reported() {
        let lib = DSLibrary::from_primitives(&["Add"], vec![Term::Int(0), Term::Int(0)]);
        assert_eq!(
            lib.validate().unwrap_err(),
            vec![Violation::DuplicateConstant("0 : Int".into())]
        );
    }

    #[test]
    fn loop_language_has_nine_symbols() {
        let lib = loop_dsl();
        assert_eq!(lib.ops().len() + lib.constants().len(), 9);
        assert_eq!(syntactic_combinations(9, 8), 43_046_721);
    }

    #[test]
    fn doubles_evens_and_drops_odds() {
        let lib = loop_dsl();
        let names = vec!["l".to_string()];
        let scope = crate::lang::WithInputs {
            inner: &lib,
            inputs: &names,
        };
        let p = parse(
            "(Loop l 0 (Len l) (lam (IfKeep (IsEven $0) (Double $0))))",
            &scope,
        )
        .unwrap();
        let inputs = [("l".to_string(), Value::list(vec![1, 2, 3, 4]))]
            .into_iter()
            .collect();
        let out = evaluate(&p, &inputs, &lib, EvalLimits::default()).unwrap();
        assert_eq!(out, Value::list(vec![4, 8]));
        assert_eq!(p.size(), 8);
        let types = [("l".to_string(), Ty::IntList)].into_iter().collect();
        assert_eq!(infer_type(&p, &types, &lib).unwrap(), Ty::IntList);
    }
}
