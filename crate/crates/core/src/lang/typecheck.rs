//! Bidirectional typechecking for the simply-typed calculus.
//!
//! Lambdas in argument position take their parameter types from the expected
//! arrow type. A lambda in synthesis position (e.g. at the root) learns each
//! parameter's type from the first place the parameter is used at a known
//! type; a parameter that is never so constrained is an error.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use super::term::Term;
use super::ty::Ty;

/// Types of named primitives and constants.
pub trait TypeEnv {
    fn prim_type(&self, name: &str) -> Option<Ty>;
}

impl TypeEnv for BTreeMap<String, Ty> {
    fn prim_type(&self, name: &str) -> Option<Ty> {
        self.get(name).cloned()
    }
}

/// Child-index path from the root to a node.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct NodePath(pub Vec<usize>);

impl fmt::Display for NodePath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "root")?;
        for i in &self.0 {
            write!(f, ".{i}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TypeError {
    #[error("type mismatch at {path}: expected {expected}, found {actual}")]
    Mismatch {
        path: NodePath,
        expected: Ty,
        actual: Ty,
    },
    #[error("unknown operation `{0}`")]
    UnknownOp(String),
    #[error("unknown input variable `{0}`")]
    UnknownInput(String),
    #[error("unbound variable ${index} at {path}")]
    Unbound { path: NodePath, index: usize },
    #[error("at {path}: {found} applied to {given} arguments")]
    Arity {
        path: NodePath,
        found: Ty,
        given: usize,
    },
    #[error("at {path}: cannot apply a value of type {0}", .found)]
    NotAFunction { path: NodePath, found: Ty },
    #[error("at {path}: lambda of arity {arity} checked against {expected}")]
    LambdaShape {
        path: NodePath,
        arity: usize,
        expected: Ty,
    },
    #[error("at {path}: cannot infer the type of ${index}")]
    Unresolved { path: NodePath, index: usize },
}

struct Checker<'a, E: ?Sized> {
    inputs: &'a BTreeMap<String, Ty>,
    env: &'a E,
    /// Types of bound variables, innermost last. `None` until constrained.
    vars: Vec<Option<Ty>>,
    path: Vec<usize>,
    /// Pre-order node types, filled when requested.
    record: Option<Vec<Option<Ty>>>,
    counter: usize,
}

impl<E: TypeEnv + ?Sized> Checker<'_, E> {
    fn here(&self) -> NodePath {
        NodePath(self.path.clone())
    }

    fn enter(&mut self) -> usize {
        let id = self.counter;
        self.counter += 1;
        if let Some(r) = self.record.as_mut() {
            r.push(None);
        }
        id
    }

    fn finish(&mut self, id: usize, ty: &Ty) {
        if let Some(r) = self.record.as_mut() {
            r[id] = Some(ty.clone());
        }
    }

    fn child<T>(&mut self, i: usize, f: impl FnOnce(&mut Self) -> T) -> T {
        self.path.push(i);
        let out = f(self);
        self.path.pop();
        out
    }

    fn var_slot(&self, index: usize) -> Option<usize> {
        self.vars.len().checked_sub(index + 1)
    }

    fn synth(&mut self, t: &Term) -> Result<Ty, TypeError> {
        let id = self.enter();
        let ty = match t {
            Term::Var(i) => {
                let slot = self.var_slot(*i).ok_or_else(|| TypeError::Unbound {
                    path: self.here(),
                    index: *i,
                })?;
                self.vars[slot]
                    .clone()
                    .ok_or_else(|| TypeError::Unresolved {
                        path: self.here(),
                        index: *i,
                    })?
            }
            Term::Input(name) => self
                .inputs
                .get(name)
                .cloned()
                .ok_or_else(|| TypeError::UnknownInput(name.clone()))?,
            Term::Int(_) => Ty::Int,
            Term::Bool(_) => Ty::Bool,
            Term::List(_) => Ty::IntList,
            Term::Prim(name) => self
                .env
                .prim_type(name)
                .ok_or_else(|| TypeError::UnknownOp(name.clone()))?,
            Term::App(head, args) => {
                let head_ty = self.child(0, |c| c.synth(head))?;
                let Some((params, ret)) = head_ty.as_arrow() else {
                    return Err(TypeError::NotAFunction {
                        path: self.here(),
                        found: head_ty,
                    });
                };
                if params.len() != args.len() {
                    return Err(TypeError::Arity {
                        path: self.here(),
                        found: head_ty.clone(),
                        given: args.len(),
                    });
                }
                let ret = ret.clone();
                for (i, (a, p)) in args.iter().zip(params.iter()).enumerate() {
                    self.child(i + 1, |c| c.check(a, p))?;
                }
                ret
            }
            Term::Lam(k, body) => {
                let base = self.vars.len();
                self.vars.extend(std::iter::repeat_n(None, *k));
                let ret = self.child(0, |c| c.synth(body));
                let params: Vec<Option<Ty>> = self.vars.drain(base..).collect();
                let ret = ret?;
                let mut resolved = Vec::with_capacity(*k);
                for (pos, p) in params.into_iter().enumerate() {
                    match p {
                        Some(ty) => resolved.push(ty),
                        None => {
                            return Err(TypeError::Unresolved {
                                path: self.here(),
                                index: k - 1 - pos,
                            })
                        }
                    }
                }
                Ty::Arrow(resolved, Box::new(ret))
            }
        };
        self.finish(id, &ty);
        Ok(ty)
    }

    fn check(&mut self, t: &Term, expected: &Ty) -> Result<(), TypeError> {
        match t {
            Term::Var(i) => {
                let id = self.enter();
                let slot = self.var_slot(*i).ok_or_else(|| TypeError::Unbound {
                    path: self.here(),
                    index: *i,
                })?;
                match &self.vars[slot] {
                    Some(actual) if actual != expected => {
                        return Err(TypeError::Mismatch {
                            path: self.here(),
                            expected: expected.clone(),
                            actual: actual.clone(),
                        })
                    }
                    Some(_) => {}
                    None => self.vars[slot] = Some(expected.clone()),
                }
                self.finish(id, expected);
                Ok(())
            }
            Term::Lam(k, body) => {
                let id = self.enter();
                let Some((params, ret)) = expected.as_arrow() else {
                    return Err(TypeError::LambdaShape {
                        path: self.here(),
                        arity: *k,
                        expected: expected.clone(),
                    });
                };
                if params.len() != *k {
                    return Err(TypeError::LambdaShape {
                        path: self.here(),
                        arity: *k,
                        expected: expected.clone(),
                    });
                }
                let base = self.vars.len();
                self.vars.extend(params.iter().cloned().map(Some));
                let out = self.child(0, |c| c.check(body, ret));
                self.vars.truncate(base);
                out?;
                self.finish(id, expected);
                Ok(())
            }
            _ => {
                let actual = self.synth(t)?;
                if &actual != expected {
                    return Err(TypeError::Mismatch {
                        path: self.here(),
                        expected: expected.clone(),
                        actual,
                    });
                }
                Ok(())
            }
        }
    }
}

/// Infers the unique type of a closed term.
pub fn infer_type<E: TypeEnv + ?Sized>(
    t: &Term,
    inputs: &BTreeMap<String, Ty>,
    env: &E,
) -> Result<Ty, TypeError> {
    let mut c = Checker {
        inputs,
        env,
        vars: Vec::new(),
        path: Vec::new(),
        record: None,
        counter: 0,
    };
    c.synth(t)
}

/// Checks a term against a known type.
pub fn check_type<E: TypeEnv + ?Sized>(
    t: &Term,
    expected: &Ty,
    inputs: &BTreeMap<String, Ty>,
    env: &E,
) -> Result<(), TypeError> {
    let mut c = Checker {
        inputs,
        env,
        vars: Vec::new(),
        path: Vec::new(),
        record: None,
        counter: 0,
    };
    c.check(t, expected)
}

/// Like [`infer_type`], additionally returning the type of every node in
/// pre-order (the order of [`Term::walk`]).
pub fn annotate<E: TypeEnv + ?Sized>(
    t: &Term,
    inputs: &BTreeMap<String, Ty>,
    env: &E,
) -> Result<(Ty, Vec<Ty>), TypeError> {
    let mut c = Checker {
        inputs,
        env,
        vars: Vec::new(),
        path: Vec::new(),
        record: Some(Vec::new()),
        counter: 0,
    };
    let ty = c.synth(t)?;
    let types = c
        .record
        .take()
        .unwrap_or_default()
        .into_iter()
        .map(|t| t.expect("every visited node is typed on success"))
        .collect();
    Ok((ty, types))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::sexp::{parse, WithInputs};

    fn env() -> BTreeMap<String, Ty> {
        let mut m = BTreeMap::new();
        m.insert("+".into(), Ty::arrow(vec![Ty::Int, Ty::Int], Ty::Int));
        m.insert("Sort".into(), Ty::arrow(vec![Ty::IntList], Ty::IntList));
        m.insert(
            "Map".into(),
            Ty::arrow(
                vec![Ty::arrow(vec![Ty::Int], Ty::Int), Ty::IntList],
                Ty::IntList,
            ),
        );
        m
    }

    fn p(s: &str) -> Term {
        let scope: std::collections::BTreeSet<String> = env().keys().cloned().collect();
        let names = vec!["xs".to_string()];
        parse(
            s,
            &WithInputs {
                inner: &scope,
                inputs: &names,
            },
        )
        .unwrap()
    }

    fn inputs() -> BTreeMap<String, Ty> {
        [("xs".to_string(), Ty::IntList)].into_iter().collect()
    }

    #[test]
    fn two_parameter_lambda() {
        let ty = infer_type(&p("(lam2 (+ $1 $0))"), &inputs(), &env()).unwrap();
        assert_eq!(ty, Ty::arrow(vec![Ty::Int, Ty::Int], Ty::Int));
    }

    #[test]
    fn sort_of_int_is_rejected() {
        match infer_type(&p("(Sort 3)"), &inputs(), &env()) {
            Err(TypeError::Mismatch {
                path,
                expected,
                actual,
            }) => {
                assert_eq!(path, NodePath(vec![1]));
                assert_eq!(expected, Ty::IntList);
                assert_eq!(actual, Ty::Int);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn lambda_argument_checked_against_expected_arrow() {
        let t = p("(Map (lam (+ $0 1)) xs)");
        assert_eq!(infer_type(&t, &inputs(), &env()).unwrap(), Ty::IntList);
        let bad = p("(Map (lam2 (+ $0 1)) xs)");
        assert!(matches!(
            infer_type(&bad, &inputs(), &env()),
            Err(TypeError::LambdaShape { .. })
        ));
    }

    #[test]
    fn unconstrained_parameter_is_unresolved() {
        assert!(matches!(
            infer_type(&p("(lam 1)"), &inputs(), &env()),
            Err(TypeError::Unresolved { .. })
        ));
    }

    #[test]
    fn annotate_lists_preorder_types() {
        let t = p("(+ 1 (+ 2 3))");
        let (_, types) = annotate(&t, &inputs(), &env()).unwrap();
        let mut count = 0;
        t.walk(&mut |_| count += 1);
        assert_eq!(types.len(), count);
        assert_eq!(types[0], Ty::Int);
        assert_eq!(types[1], Ty::arrow(vec![Ty::Int, Ty::Int], Ty::Int));
    }

    #[test]
    fn unknown_names() {
        let t = Term::call("Nope", vec![Term::Int(1)]);
        assert_eq!(
            infer_type(&t, &inputs(), &env()),
            Err(TypeError::UnknownOp("Nope".into()))
        );
        assert_eq!(
            infer_type(&Term::input("ys"), &inputs(), &env()),
            Err(TypeError::UnknownInput("ys".into()))
        );
    }
}
