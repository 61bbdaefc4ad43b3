//! Typed lambda-calculus terms: representation, syntax, typing and evaluation.

pub mod eval;
pub mod sexp;
pub mod term;
pub mod ty;
pub mod typecheck;

pub use eval::{evaluate, Bindings, Closure, ErrorClass, EvalError, EvalLimits, Machine, Value};
pub use sexp::{parse, parse_open, print, OpenScope, ParseError, Scope, SymbolKind, WithInputs};
pub use term::Term;
pub use ty::Ty;
pub use typecheck::{annotate, check_type, infer_type, TypeEnv, TypeError};
