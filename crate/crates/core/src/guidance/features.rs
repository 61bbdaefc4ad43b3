//! Engineered features of explored values and tasks.

use std::collections::BTreeSet;

use crate::lang::{Term, Ty};
use crate::synthesis::signature::SigValue;
use crate::synthesis::space::SearchSpace;
use crate::synthesis::store::ValueEntry;

/// Length of a value feature vector.
pub const VALUE_FEATURES: usize = 20;

/// Human-readable names, index-aligned with [`value_features`].
pub const FEATURE_NAMES: [&str; VALUE_FEATURES] = [
    "bias",
    "is_int",
    "is_bool",
    "is_list",
    "is_lambda",
    "weight",
    "is_leaf",
    "eq_output",
    "in_output",
    "output_in",
    "len_match",
    "mean_int",
    "mean_len",
    "sum",
    "error_frac",
    "eq_input",
    "is_constant",
    "is_input",
    "true_frac",
    "distinct",
];

fn contains_all(hay: &[i64], needles: &[i64]) -> bool {
    needles.iter().all(|n| hay.contains(n))
}

/// Features of `entry` (stored in context `c` of `space`) relative to the
/// per-example target outputs.
pub fn value_features(
    space: &SearchSpace<'_>,
    c: usize,
    entry: &ValueEntry,
    target: &[SigValue],
) -> Vec<f64> {
    let ctx = &space.contexts[c];
    let n = entry.signature.len().max(1) as f64;
    let mut f = vec![0.0; VALUE_FEATURES];
    f[0] = 1.0;
    f[1] = (entry.ty == Ty::Int) as u8 as f64;
    f[2] = (entry.ty == Ty::Bool) as u8 as f64;
    f[3] = (entry.ty == Ty::IntList) as u8 as f64;
    f[4] = entry.is_lambda as u8 as f64;
    f[5] = entry.weight as f64 / 15.0;
    f[6] = (entry.weight <= 1) as u8 as f64;
    let (mut eq, mut inside, mut outside, mut len_match) = (0.0, 0.0, 0.0, 0.0);
    let (mut ints, mut int_count, mut lens, mut list_count) = (0.0, 0.0, 0.0, 0.0);
    let (mut sum, mut errors, mut trues) = (0.0, 0.0, 0.0);
    let mut distinct = BTreeSet::new();
    for (p, v) in entry.signature.iter().enumerate() {
        let out = target.get(ctx.point_example[p]);
        distinct.insert(v);
        match v {
            SigValue::Error(_) => errors += 1.0,
            SigValue::Bool(b) => trues += *b as u8 as f64,
            SigValue::Int(x) => {
                ints += *x as f64;
                int_count += 1.0;
                sum += *x as f64;
            }
            SigValue::List(xs) => {
                lens += xs.len() as f64;
                list_count += 1.0;
                sum += xs.iter().map(|x| *x as f64).sum::<f64>();
                ints += xs.iter().map(|x| *x as f64).sum::<f64>();
                int_count += xs.len() as f64;
            }
        }
        if Some(v) == out {
            eq += 1.0;
        }
        match (v, out) {
            (SigValue::Int(x), Some(SigValue::List(ys))) => {
                inside += ys.contains(x) as u8 as f64;
                len_match += (*x == ys.len() as i64) as u8 as f64;
            }
            (SigValue::List(xs), Some(SigValue::Int(y))) => {
                outside += xs.contains(y) as u8 as f64;
                len_match += (*y == xs.len() as i64) as u8 as f64;
            }
            (SigValue::List(xs), Some(SigValue::List(ys))) => {
                inside += contains_all(ys, xs) as u8 as f64;
                outside += contains_all(xs, ys) as u8 as f64;
                len_match += (xs.len() == ys.len()) as u8 as f64;
            }
            _ => {}
        }
    }
    f[7] = eq / n;
    f[8] = inside / n;
    f[9] = outside / n;
    f[10] = len_match / n;
    f[11] = if int_count > 0.0 {
        (ints / int_count / 10.0).tanh()
    } else {
        0.0
    };
    f[12] = if list_count > 0.0 {
        (lens / list_count / 5.0).tanh()
    } else {
        0.0
    };
    f[13] = (sum / n / 20.0).tanh();
    f[14] = errors / n;
    f[15] = equals_input(space, c, entry) as u8 as f64;
    f[16] = matches!(
        entry.term,
        Term::Int(_) | Term::Bool(_) | Term::List(_) | Term::Prim(_)
    ) as u8 as f64;
    f[17] = matches!(entry.term, Term::Input(_) | Term::Var(_)) as u8 as f64;
    f[18] = trues / n;
    f[19] = distinct.len() as f64 / n;
    f
}

fn equals_input(space: &SearchSpace<'_>, c: usize, entry: &ValueEntry) -> bool {
    let ctx = &space.contexts[c];
    space.inputs.iter().any(|(name, _)| {
        entry.signature.iter().enumerate().all(|(p, v)| {
            let inp = &space.examples[ctx.point_example[p]][name];
            v.to_value().as_ref() == Some(inp)
        })
    })
}

/// Length of a task feature vector.
pub const TASK_FEATURES: usize = 6;

/// Summary of a task's examples: input count, output type, mean output size.
pub fn task_features(space: &SearchSpace<'_>) -> Vec<f64> {
    task_features_from(
        space.inputs.len(),
        space.examples.len(),
        space.target.as_ref().map(|(t, s)| (t, &s[..])),
    )
}

pub fn task_features_from(
    inputs: usize,
    examples: usize,
    target: Option<(&Ty, &[SigValue])>,
) -> Vec<f64> {
    let mut f = vec![0.0; TASK_FEATURES];
    f[0] = inputs as f64 / 3.0;
    if let Some((ty, outs)) = target {
        f[1] = (*ty == Ty::Int) as u8 as f64;
        f[2] = (*ty == Ty::Bool) as u8 as f64;
        f[3] = (*ty == Ty::IntList) as u8 as f64;
        let lens: f64 = outs
            .iter()
            .map(|o| match o {
                SigValue::List(xs) => xs.len() as f64,
                _ => 1.0,
            })
            .sum();
        f[4] = (lens / outs.len().max(1) as f64 / 5.0).tanh();
    }
    f[5] = (examples as f64 / 5.0).min(1.0);
    f
}
