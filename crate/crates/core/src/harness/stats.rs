//! Means, t-based confidence intervals and two-sample t-tests.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StatsError {
    #[error("needs at least 2 samples, got {0}")]
    TooFewSamples(usize),
}

/// Result of a pooled-variance two-sample t-test.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TTest {
    #[serde(with = "extended_f64")]
    pub t: f64,
    /// Two-sided p value.
    pub p: f64,
    pub df: f64,
    /// Zero pooled variance with unequal means: `t` is infinite and `p` is 0.
    pub degenerate: bool,
}

impl TTest {
    pub fn significant(&self, alpha: f64) -> bool {
        self.p < alpha
    }
}

pub fn mean(x: &[f64]) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    x.iter().sum::<f64>() / x.len() as f64
}

/// Sample variance with `n - 1` in the denominator.
pub fn sample_variance(x: &[f64]) -> f64 {
    if x.len() < 2 || x.iter().all(|v| *v == x[0]) {
        return 0.0;
    }
    let m = mean(x);
    x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (x.len() - 1) as f64
}

fn t_dist(df: f64) -> StudentsT {
    StudentsT::new(0.0, 1.0, df).expect("positive degrees of freedom")
}

/// Half-width of the 95% confidence interval of the mean:
/// `t(0.975, n - 1) · s / √n`.
pub fn ci95(x: &[f64]) -> Result<f64, StatsError> {
    let n = x.len();
    if n < 2 {
        return Err(StatsError::TooFewSamples(n));
    }
    let s = sample_variance(x).sqrt();
    if s == 0.0 {
        return Ok(0.0);
    }
    let crit = t_dist((n - 1) as f64).inverse_cdf(0.975);
    Ok(crit * s / (n as f64).sqrt())
}

/// Student's two-sample t-test with pooled variance:
/// `t = (ā − b̄) / √(s_p² (1/n_a + 1/n_b))`, `df = n_a + n_b − 2`.
pub fn t_test(a: &[f64], b: &[f64]) -> Result<TTest, StatsError> {
    for x in [a, b] {
        if x.len() < 2 {
            return Err(StatsError::TooFewSamples(x.len()));
        }
    }
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let df = na + nb - 2.0;
    let pooled = ((na - 1.0) * sample_variance(a) + (nb - 1.0) * sample_variance(b)) / df;
    let diff = mean(a) - mean(b);
    if pooled == 0.0 {
        return Ok(if diff == 0.0 {
            TTest {
                t: 0.0,
                p: 1.0,
                df,
                degenerate: false,
            }
        } else {
            TTest {
                t: diff.signum() * f64::INFINITY,
                p: 0.0,
                df,
                degenerate: true,
            }
        });
    }
    let t = diff / (pooled * (1.0 / na + 1.0 / nb)).sqrt();
    let p = 2.0 * t_dist(df).cdf(-t.abs());
    Ok(TTest {
        t,
        p,
        df,
        degenerate: false,
    })
}

/// JSON has no infinities; they are written as the strings `inf` and `-inf`.
mod extended_f64 {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        if x.is_finite() {
            s.serialize_f64(*x)
        } else {
            s.serialize_str(if *x > 0.0 { "inf" } else { "-inf" })
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(x) => Ok(x),
            Repr::Text(t) => t.parse().map_err(serde::de::Error::custom),
        }
    }
}
