//! Built-in operation semantics, resolved by name.

use crate::lang::{EvalError, Machine, Ty, Value};

pub type BuiltinFn = fn(&mut Machine<'_>, &[Value]) -> Result<Value, EvalError>;

/// Signature and semantics of a built-in primitive.
pub struct Builtin {
    pub params: Vec<Ty>,
    pub ret: Ty,
    pub run: BuiltinFn,
}

/// Operations of the integer-list DSL, in library order.
pub const LIST_DSL_OPS: &[&str] = &[
    "Add", "Subtract", "Multiply", "Min", "Max", "Greater", "If", "IsEven", "IsOdd", "Head",
    "Last", "Take", "Drop", "Access", "Minimum", "Maximum", "Reverse", "Sort", "Sum", "Length",
    "Append", "Concat", "Range", "Map", "Filter", "Count", "ZipWith", "Scanl1",
];

/// Operations of the five-primitive loop language used to illustrate library learning.
pub const LOOP_DSL_OPS: &[&str] = &["IsEven", "Double", "IfKeep", "Loop", "Len"];

fn int(v: &Value) -> Result<i64, EvalError> {
    v.as_int().ok_or(EvalError::RuntimeType("expected Int"))
}

fn boolean(v: &Value) -> Result<bool, EvalError> {
    match v {
        Value::Bool(b) => Ok(*b),
        _ => Err(EvalError::RuntimeType("expected Bool")),
    }
}

fn list(v: &Value) -> Result<&[i64], EvalError> {
    v.as_list()
        .ok_or(EvalError::RuntimeType("expected IntList"))
}

fn fun(v: &Value) -> Result<&Value, EvalError> {
    if v.is_callable() {
        Ok(v)
    } else {
        Err(EvalError::RuntimeType("expected a function"))
    }
}

fn index(n: i64, len: usize) -> usize {
    n.clamp(0, len as i64) as usize
}

fn arrow(params: Vec<Ty>, ret: Ty) -> Ty {
    Ty::arrow(params, ret)
}

/// Looks up a primitive by name.
pub fn builtin(name: &str) -> Option<Builtin> {
    use Ty::{Bool, Int, IntList};
    let b = |params: Vec<Ty>, ret: Ty, run: BuiltinFn| Some(Builtin { params, ret, run });
    match name {
        "Add" => b(vec![Int, Int], Int, |m, a| {
            m.int(int(&a[0])? as i128 + int(&a[1])? as i128)
        }),
        "Subtract" => b(vec![Int, Int], Int, |m, a| {
            m.int(int(&a[0])? as i128 - int(&a[1])? as i128)
        }),
        "Multiply" => b(vec![Int, Int], Int, |m, a| {
            m.int(int(&a[0])? as i128 * int(&a[1])? as i128)
        }),
        "Min" => b(vec![Int, Int], Int, |_, a| {
            Ok(Value::Int(int(&a[0])?.min(int(&a[1])?)))
        }),
        "Max" => b(vec![Int, Int], Int, |_, a| {
            Ok(Value::Int(int(&a[0])?.max(int(&a[1])?)))
        }),
        "Greater" => b(vec![Int, Int], Bool, |_, a| {
            Ok(Value::Bool(int(&a[0])? > int(&a[1])?))
        }),
        "If" => b(vec![Bool, Int, Int], Int, |_, a| {
            Ok(if boolean(&a[0])? {
                a[1].clone()
            } else {
                a[2].clone()
            })
        }),
        "IsEven" => b(vec![Int], Bool, |_, a| {
            Ok(Value::Bool(int(&a[0])?.rem_euclid(2) == 0))
        }),
        "IsOdd" => b(vec![Int], Bool, |_, a| {
            Ok(Value::Bool(int(&a[0])?.rem_euclid(2) == 1))
        }),
        "Head" => b(vec![IntList], Int, |_, a| {
            list(&a[0])?
                .first()
                .map(|v| Value::Int(*v))
                .ok_or(EvalError::Domain("Head of empty list"))
        }),
        "Last" => b(vec![IntList], Int, |_, a| {
            list(&a[0])?
                .last()
                .map(|v| Value::Int(*v))
                .ok_or(EvalError::Domain("Last of empty list"))
        }),
        "Take" => b(vec![Int, IntList], IntList, |m, a| {
            let xs = list(&a[1])?;
            m.tick(xs.len() as u64)?;
            m.list(xs[..index(int(&a[0])?, xs.len())].to_vec())
        }),
        "Drop" => b(vec![Int, IntList], IntList, |m, a| {
            let xs = list(&a[1])?;
            m.tick(xs.len() as u64)?;
            m.list(xs[index(int(&a[0])?, xs.len())..].to_vec())
        }),
        "Access" => b(vec![Int, IntList], Int, |_, a| {
            let xs = list(&a[1])?;
            let i = int(&a[0])?;
            if i < 0 || i as usize >= xs.len() {
                return Err(EvalError::Domain("index out of range"));
            }
            Ok(Value::Int(xs[i as usize]))
        }),
        "Minimum" => b(vec![IntList], Int, |m, a| {
            let xs = list(&a[0])?;
            m.tick(xs.len() as u64)?;
            xs.iter()
                .min()
                .map(|v| Value::Int(*v))
                .ok_or(EvalError::Domain("Minimum of empty list"))
        }),
        "Maximum" => b(vec![IntList], Int, |m, a| {
            let xs = list(&a[0])?;
            m.tick(xs.len() as u64)?;
            xs.iter()
                .max()
                .map(|v| Value::Int(*v))
                .ok_or(EvalError::Domain("Maximum of empty list"))
        }),
        "Reverse" => b(vec![IntList], IntList, |m, a| {
            let xs = list(&a[0])?;
            m.tick(xs.len() as u64)?;
            m.list(xs.iter().rev().copied().collect())
        }),
        "Sort" => b(vec![IntList], IntList, |m, a| {
            let mut xs = list(&a[0])?.to_vec();
            m.tick(xs.len() as u64)?;
            xs.sort_unstable();
            m.list(xs)
        }),
        "Sum" => b(vec![IntList], Int, |m, a| {
            let xs = list(&a[0])?;
            m.tick(xs.len() as u64)?;
            m.int(xs.iter().map(|v| *v as i128).sum())
        }),
        "Length" => b(vec![IntList], Int, |_, a| {
            Ok(Value::Int(list(&a[0])?.len() as i64))
        }),
        "Append" => b(vec![IntList, Int], IntList, |m, a| {
            let mut xs = list(&a[0])?.to_vec();
            m.tick(xs.len() as u64)?;
            xs.push(int(&a[1])?);
            m.list(xs)
        }),
        "Concat" => b(vec![IntList, IntList], IntList, |m, a| {
            let mut xs = list(&a[0])?.to_vec();
            let ys = list(&a[1])?;
            m.tick((xs.len() + ys.len()) as u64)?;
            xs.extend_from_slice(ys);
            m.list(xs)
        }),
        "Range" => b(vec![Int], IntList, |m, a| {
            let n = int(&a[0])?.max(0);
            if n as u64 > m_list_cap(m) {
                return Err(EvalError::ListBound(n as usize));
            }
            m.tick(n as u64)?;
            m.list((0..n).collect())
        }),
        "Map" => b(vec![arrow(vec![Int], Int), IntList], IntList, |m, a| {
            let f = fun(&a[0])?;
            let xs = list(&a[1])?;
            let mut out = Vec::with_capacity(xs.len());
            for x in xs {
                out.push(int(&m.call(f, vec![Value::Int(*x)])?)?);
            }
            m.list(out)
        }),
        "Filter" => b(vec![arrow(vec![Int], Bool), IntList], IntList, |m, a| {
            let f = fun(&a[0])?;
            let xs = list(&a[1])?;
            let mut out = Vec::new();
            for x in xs {
                if boolean(&m.call(f, vec![Value::Int(*x)])?)? {
                    out.push(*x);
                }
            }
            m.list(out)
        }),
        "Count" => b(vec![arrow(vec![Int], Bool), IntList], Int, |m, a| {
            let f = fun(&a[0])?;
            let mut n = 0;
            for x in list(&a[1])? {
                if boolean(&m.call(f, vec![Value::Int(*x)])?)? {
                    n += 1;
                }
            }
            Ok(Value::Int(n))
        }),
        "ZipWith" => b(
            vec![arrow(vec![Int, Int], Int), IntList, IntList],
            IntList,
            |m, a| {
                let f = fun(&a[0])?;
                let (xs, ys) = (list(&a[1])?, list(&a[2])?);
                let mut out = Vec::with_capacity(xs.len().min(ys.len()));
                for (x, y) in xs.iter().zip(ys) {
                    out.push(int(&m.call(f, vec![Value::Int(*x), Value::Int(*y)])?)?);
                }
                m.list(out)
            },
        ),
        "Scanl1" => b(
            vec![arrow(vec![Int, Int], Int), IntList],
            IntList,
            |m, a| {
                let f = fun(&a[0])?;
                let xs = list(&a[1])?;
                let mut out: Vec<i64> = Vec::with_capacity(xs.len());
                for x in xs {
                    let next = match out.last() {
                        None => *x,
                        Some(acc) => int(&m.call(f, vec![Value::Int(*acc), Value::Int(*x)])?)?,
                    };
                    out.push(next);
                }
                m.list(out)
            },
        ),
        // loop language
        "Double" => b(vec![Int], Int, |m, a| m.int(int(&a[0])? as i128 * 2)),
        "IfKeep" => b(vec![Bool, Int], IntList, |m, a| {
            if boolean(&a[0])? {
                m.list(vec![int(&a[1])?])
            } else {
                m.list(Vec::new())
            }
        }),
        "Len" => b(vec![IntList], Int, |_, a| {
            Ok(Value::Int(list(&a[0])?.len() as i64))
        }),
        "Loop" => b(
            vec![IntList, Int, Int, arrow(vec![Int], IntList)],
            IntList,
            |m, a| {
                let xs = list(&a[0])?;
                let start = index(int(&a[1])?, xs.len());
                let stop = index(int(&a[2])?, xs.len()).max(start);
                let f = fun(&a[3])?;
                let mut out = Vec::new();
                for x in &xs[start..stop] {
                    let piece = m.call(f, vec![Value::Int(*x)])?;
                    out.extend_from_slice(list(&piece)?);
                    if out.len() > m_list_cap(m) as usize {
                        return Err(EvalError::ListBound(out.len()));
                    }
                }
                m.list(out)
            },
        ),
        _ => None,
    }
}

fn m_list_cap(m: &Machine<'_>) -> u64 {
    m.limits().max_list_len as u64
}
