//! Sequential monitors built on Ville's inequality.
//!
//! These operate on realized paths. Whether a path is a nonnegative
//! supermartingale under the null is the caller's statistical contract; the
//! tests in this module simulate such processes to check the guarantees.

use crate::error::{check_alpha, check_nonnegative, check_u, Error, Result};
use crate::markov::Decision;

/// Realized values `M_0, ..., M_n` of a nonnegative process.
#[derive(Debug, Clone, PartialEq)]
pub struct WealthPath {
    values: Vec<f64>,
    running_sup: f64,
}

impl WealthPath {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyInput("path"));
        }
        let mut running_sup = 0.0f64;
        for &v in &values {
            check_nonnegative("M_t", v)?;
            running_sup = running_sup.max(v);
        }
        Ok(Self {
            values,
            running_sup,
        })
    }

    /// Path starting at `M_0 = initial`.
    pub fn starting_at(initial: f64) -> Result<Self> {
        Self::new(vec![initial])
    }

    pub fn push(&mut self, value: f64) -> Result<()> {
        check_nonnegative("M_t", value)?;
        self.running_sup = self.running_sup.max(value);
        self.values.push(value);
        Ok(())
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn running_sup(&self) -> f64 {
        self.running_sup
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn last(&self) -> f64 {
        *self.values.last().expect("paths are nonempty")
    }
}

/// Smallest index `t` with `M_t >= 1/alpha`.
pub fn ville_first_crossing(path: &WealthPath, alpha: f64) -> Result<Option<usize>> {
    check_alpha(alpha)?;
    let threshold = 1.0 / alpha;
    Ok(path.values.iter().position(|&m| m >= threshold))
}

/// Randomized Ville rule at stopping index `tau`: reject if `M_t >= 1/alpha`
/// for some `t < tau`, or if `M_tau >= u/alpha`.
///
/// `u` must be drawn independently of the path, e.g. after stopping.
pub fn randomized_ville_reject(
    path: &WealthPath,
    tau: usize,
    alpha: f64,
    u: f64,
) -> Result<Decision> {
    check_alpha(alpha)?;
    check_u(u)?;
    if tau >= path.len() {
        return Err(Error::InvalidCount {
            name: "tau",
            value: tau,
            expected: "an index of the path",
        });
    }
    let threshold = 1.0 / alpha;
    if let Some(t) = path.values[..tau].iter().position(|&m| m >= threshold) {
        return Ok(Decision::reject_at(Some(t), Some(u)));
    }
    Ok(if path.values[tau] >= u / alpha {
        Decision::reject_at(Some(tau), Some(u))
    } else {
        Decision::accept(Some(u))
    })
}

/// Running-average monitor for an exchangeable stream of nonnegative values.
///
/// Rejects at the first `t` with `(x_1 + ... + x_t) / t >= 1/alpha`. The
/// stream may be stopped at any data-dependent time without losing validity.
#[derive(Debug, Clone)]
pub struct ReverseAvgMonitor {
    threshold: f64,
    t: usize,
    mean: f64,
    crossed_at: Option<usize>,
}

impl ReverseAvgMonitor {
    pub fn new(alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        Ok(Self {
            threshold: 1.0 / alpha,
            t: 0,
            mean: 0.0,
            crossed_at: None,
        })
    }

    /// Consumes one value; returns whether the monitor has rejected so far.
    /// Values after a rejection are ignored.
    pub fn push(&mut self, x: f64) -> Result<bool> {
        check_nonnegative("x", x)?;
        if self.crossed_at.is_some() {
            return Ok(true);
        }
        self.t += 1;
        self.mean = if self.t == 1 || x == self.mean {
            x
        } else {
            self.mean + (x - self.mean) / self.t as f64
        };
        if self.mean >= self.threshold {
            self.crossed_at = Some(self.t);
        }
        Ok(self.crossed_at.is_some())
    }

    pub fn count(&self) -> usize {
        self.t
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn decision(&self) -> Decision {
        match self.crossed_at {
            Some(t) => Decision::reject_at(Some(t), None),
            None => Decision::accept(None),
        }
    }
}
