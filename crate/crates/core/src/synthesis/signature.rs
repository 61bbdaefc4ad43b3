//! Observational signatures used to deduplicate explored values.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dsl::DSLibrary;
use crate::lang::{Bindings, ErrorClass, EvalError, EvalLimits, Machine, Term, Ty, Value};

/// Number of canonical argument tuples a lambda is probed with per example.
pub const BATTERY_SIZE: usize = 8;
const BATTERY_SEED: u64 = 0x5eed_ba77;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SigValue {
    Int(i64),
    Bool(bool),
    List(Arc<[i64]>),
    Error(ErrorClass),
}

impl SigValue {
    pub fn from_result(r: Result<Value, EvalError>) -> SigValue {
        match r {
            Ok(Value::Int(v)) => SigValue::Int(v),
            Ok(Value::Bool(b)) => SigValue::Bool(b),
            Ok(Value::List(l)) => SigValue::List(l),
            Ok(_) => SigValue::Error(ErrorClass::Fault),
            Err(e) => SigValue::Error(e.class()),
        }
    }

    pub fn to_value(&self) -> Option<Value> {
        match self {
            SigValue::Int(v) => Some(Value::Int(*v)),
            SigValue::Bool(b) => Some(Value::Bool(*b)),
            SigValue::List(l) => Some(Value::List(l.clone())),
            SigValue::Error(_) => None,
        }
    }

    pub fn is_error(&self) -> bool {
        matches!(self, SigValue::Error(_))
    }
}

/// One result per evaluation point: per example for concrete values, per
/// (example, battery tuple) for lambda bodies.
pub type Signature = Arc<[SigValue]>;

/// The fixed argument battery for a lambda with the given parameter types.
pub fn battery(params: &[Ty]) -> Vec<Vec<Value>> {
    let mut rng = ChaCha8Rng::seed_from_u64(BATTERY_SEED);
    let small = [0, 1, -1, 2, 3, -2, 5, 7];
    (0..BATTERY_SIZE)
        .map(|i| {
            params
                .iter()
                .enumerate()
                .map(|(j, ty)| match ty {
                    Ty::Int if j == 0 => Value::Int(small[i]),
                    Ty::Int => Value::Int(rng.gen_range(-4..=9)),
                    Ty::Bool => Value::Bool((i + j) % 2 == 0),
                    _ => {
                        let len = rng.gen_range(0..=4);
                        Value::list((0..len).map(|_| rng.gen_range(-4..=9)).collect::<Vec<_>>())
                    }
                })
                .collect()
        })
        .collect()
}

/// Evaluates `term` at every point. For a lambda context (`params` non-empty)
/// `term` is the lambda body and each example is paired with every battery tuple.
pub fn compute_signature(
    term: &Term,
    params: &[Ty],
    examples: &[Arc<Bindings>],
    lib: &DSLibrary,
    limits: EvalLimits,
) -> Signature {
    let mut out = Vec::new();
    if params.is_empty() {
        for inputs in examples {
            out.push(SigValue::from_result(Machine::new(lib, limits).eval(
                term,
                &[],
                inputs,
            )));
        }
    } else {
        let tuples = battery(params);
        for inputs in examples {
            for args in &tuples {
                out.push(SigValue::from_result(
                    Machine::new(lib, limits).eval(term, args, inputs),
                ));
            }
        }
    }
    out.into()
}
