//! Call-by-value evaluation with step and value bounds.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use super::term::Term;
use crate::dsl::{DSLibrary, OpKind, Operation};

pub type Bindings = BTreeMap<String, Value>;

#[derive(Clone)]
pub enum Value {
    Int(i64),
    Bool(bool),
    List(Arc<[i64]>),
    Closure(Arc<Closure>),
    /// An operation referenced by name and not yet applied.
    Op(Arc<str>),
}

pub struct Closure {
    pub arity: usize,
    pub body: Arc<Term>,
    pub env: Vec<Value>,
    pub inputs: Arc<Bindings>,
}

impl Value {
    pub fn list(values: impl Into<Arc<[i64]>>) -> Value {
        Value::List(values.into())
    }

    pub fn as_int(&self) -> Option<i64> {
        match self {
            Value::Int(v) => Some(*v),
            _ => None,
        }
    }

    pub fn as_list(&self) -> Option<&[i64]> {
        match self {
            Value::List(v) => Some(v),
            _ => None,
        }
    }

    pub fn is_callable(&self) -> bool {
        matches!(self, Value::Closure(_) | Value::Op(_))
    }

    /// Literal term for first-order values.
    pub fn to_term(&self) -> Option<Term> {
        match self {
            Value::Int(v) => Some(Term::Int(*v)),
            Value::Bool(b) => Some(Term::Bool(*b)),
            Value::List(vs) => Some(Term::List(vs.to_vec())),
            _ => None,
        }
    }
}

impl PartialEq for Value {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Value::Int(a), Value::Int(b)) => a == b,
            (Value::Bool(a), Value::Bool(b)) => a == b,
            (Value::List(a), Value::List(b)) => a == b,
            (Value::Closure(a), Value::Closure(b)) => Arc::ptr_eq(a, b),
            (Value::Op(a), Value::Op(b)) => a == b,
            _ => false,
        }
    }
}

impl fmt::Debug for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(v) => write!(f, "{v}"),
            Value::Bool(b) => write!(f, "{b}"),
            Value::List(vs) => write!(f, "{vs:?}"),
            Value::Closure(c) => write!(f, "<closure {}>", Term::Lam(c.arity, c.body.clone())),
            Value::Op(name) => write!(f, "<op {name}>"),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::List(vs) => {
                write!(f, "[")?;
                for (i, v) in vs.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{v}")?;
                }
                write!(f, "]")
            }
            other => write!(f, "{other:?}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EvalLimits {
    pub max_steps: u64,
    pub max_int: i64,
    pub max_list_len: usize,
}

impl Default for EvalLimits {
    fn default() -> Self {
        EvalLimits {
            max_steps: 10_000,
            max_int: i32::MAX as i64,
            max_list_len: 1024,
        }
    }
}

/// Coarse error classes, used when errors are folded into signatures.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ErrorClass {
    Limit,
    Bound,
    Domain,
    Fault,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EvalError {
    #[error("step limit exceeded")]
    StepLimit,
    #[error("integer {0} exceeds the value bound")]
    IntBound(i128),
    #[error("list of length {0} exceeds the length bound")]
    ListBound(usize),
    #[error("domain error: {0}")]
    Domain(&'static str),
    #[error("unbound variable ${0}")]
    Unbound(usize),
    #[error("unknown input `{0}`")]
    UnknownInput(String),
    #[error("unknown operation `{0}`")]
    UnknownOp(String),
    #[error("`{name}` expects {expected} arguments, got {given}")]
    Arity {
        name: String,
        expected: usize,
        given: usize,
    },
    #[error("value is not callable")]
    NotCallable,
    #[error("runtime type error: {0}")]
    RuntimeType(&'static str),
}

impl EvalError {
    pub fn class(&self) -> ErrorClass {
        match self {
            EvalError::StepLimit => ErrorClass::Limit,
            EvalError::IntBound(_) | EvalError::ListBound(_) => ErrorClass::Bound,
            EvalError::Domain(_) => ErrorClass::Domain,
            _ => ErrorClass::Fault,
        }
    }
}

/// One evaluation: owns the step counter.
pub struct Machine<'a> {
    lib: &'a DSLibrary,
    limits: EvalLimits,
    steps: u64,
}

impl<'a> Machine<'a> {
    pub fn new(lib: &'a DSLibrary, limits: EvalLimits) -> Self {
        Machine {
            lib,
            limits,
            steps: 0,
        }
    }

    pub fn limits(&self) -> &EvalLimits {
        &self.limits
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn tick(&mut self, n: u64) -> Result<(), EvalError> {
        self.steps += n;
        if self.steps > self.limits.max_steps {
            Err(EvalError::StepLimit)
        } else {
            Ok(())
        }
    }

    pub fn int(&self, v: i128) -> Result<Value, EvalError> {
        if v.unsigned_abs() > self.limits.max_int as u128 {
            Err(EvalError::IntBound(v))
        } else {
            Ok(Value::Int(v as i64))
        }
    }

    pub fn list(&self, v: Vec<i64>) -> Result<Value, EvalError> {
        if v.len() > self.limits.max_list_len {
            Err(EvalError::ListBound(v.len()))
        } else {
            Ok(Value::List(v.into()))
        }
    }

    pub fn eval(
        &mut self,
        t: &Term,
        env: &[Value],
        inputs: &Arc<Bindings>,
    ) -> Result<Value, EvalError> {
        self.tick(1)?;
        match t {
            Term::Var(i) => env
                .len()
                .checked_sub(i + 1)
                .map(|slot| env[slot].clone())
                .ok_or(EvalError::Unbound(*i)),
            Term::Input(name) => inputs
                .get(name)
                .cloned()
                .ok_or_else(|| EvalError::UnknownInput(name.clone())),
            Term::Int(v) => self.int(*v as i128),
            Term::Bool(b) => Ok(Value::Bool(*b)),
            Term::List(vs) => self.list(vs.clone()),
            Term::Prim(name) => {
                if let Some(c) = self.lib.constant(name) {
                    let body = c.term.clone();
                    self.eval(&body, &[], inputs)
                } else if self.lib.op(name).is_some() {
                    Ok(Value::Op(name.as_str().into()))
                } else {
                    Err(EvalError::UnknownOp(name.clone()))
                }
            }
            Term::Lam(k, body) => Ok(Value::Closure(Arc::new(Closure {
                arity: *k,
                body: body.clone(),
                env: env.to_vec(),
                inputs: inputs.clone(),
            }))),
            Term::App(head, args) => {
                let mut vals = Vec::with_capacity(args.len());
                if let Term::Prim(name) = head.as_ref() {
                    let op = self
                        .lib
                        .op(name)
                        .ok_or_else(|| EvalError::UnknownOp(name.clone()))?;
                    for a in args {
                        vals.push(self.eval(a, env, inputs)?);
                    }
                    return self.apply_op(op, vals);
                }
                let f = self.eval(head, env, inputs)?;
                for a in args {
                    vals.push(self.eval(a, env, inputs)?);
                }
                self.call(&f, vals)
            }
        }
    }

    /// Invokes a callable value.
    pub fn call(&mut self, f: &Value, args: Vec<Value>) -> Result<Value, EvalError> {
        match f {
            Value::Closure(c) => {
                if c.arity != args.len() {
                    return Err(EvalError::Arity {
                        name: "<lambda>".into(),
                        expected: c.arity,
                        given: args.len(),
                    });
                }
                self.tick(1)?;
                let mut env = Vec::with_capacity(c.env.len() + args.len());
                env.extend(c.env.iter().cloned());
                env.extend(args);
                self.eval(&c.body, &env, &c.inputs)
            }
            Value::Op(name) => {
                let op = self
                    .lib
                    .op(name)
                    .ok_or_else(|| EvalError::UnknownOp(name.to_string()))?;
                self.apply_op(op, args)
            }
            _ => Err(EvalError::NotCallable),
        }
    }

    pub fn apply_op(&mut self, op: &Operation, args: Vec<Value>) -> Result<Value, EvalError> {
        if args.len() != op.params.len() {
            return Err(EvalError::Arity {
                name: op.name.clone(),
                expected: op.params.len(),
                given: args.len(),
            });
        }
        match &op.kind {
            OpKind::Primitive(f) => f(self, &args),
            OpKind::Learned { body, .. } => {
                self.tick(1)?;
                // bodies are `(lamN ...)` over exactly the operation's parameters
                match body {
                    Term::Lam(_, inner) => {
                        let empty = Arc::new(Bindings::new());
                        self.eval(inner, &args, &empty)
                    }
                    _ => Err(EvalError::RuntimeType(
                        "learned operation body is not a lambda",
                    )),
                }
            }
        }
    }
}

/// Evaluates a closed term against one binding of the task inputs.
pub fn evaluate(
    t: &Term,
    inputs: &Bindings,
    lib: &DSLibrary,
    limits: EvalLimits,
) -> Result<Value, EvalError> {
    let inputs = Arc::new(inputs.clone());
    Machine::new(lib, limits).eval(t, &[], &inputs)
}
