//! Markov-type decision kernels.
//!
//! Each rule compares a nonnegative statistic (typically an e-value) with a
//! threshold and returns a [`Decision`]:
//!
//! | rule | rejects when |
//! |------|--------------|
//! | MI   | `x >= 1/alpha` |
//! | UMI  | `x >= u/alpha` |
//! | AMI  | `x >= eps - eps*u` |
//! | EMI  | some running average of `xs` reaches `1/alpha` |
//! | EUMI | `xs[0] >= u/alpha`, or the EMI condition holds |
//!
//! Running averages are computed with the incremental update
//! `m_t = m_{t-1} + (x_t - m_{t-1}) / t` everywhere in the crate, so the
//! average of a constant sequence is exactly that constant and the full-prefix
//! average used by EMI is bit-identical to the plain average used by MI.

use crate::error::{check_alpha, check_nonnegative, check_positive, check_u, Error, Result};
use crate::rng::RngStream;

/// Outcome of a rejection rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Decision {
    pub reject: bool,
    /// Step (1-based for averages, path index for wealth paths) at which the
    /// rule stopped and rejected.
    pub crossing_index: Option<usize>,
    /// The randomization draw the rule consumed, if any.
    pub randomization_used: Option<f64>,
}

impl Decision {
    pub fn accept(randomization_used: Option<f64>) -> Self {
        Self {
            reject: false,
            crossing_index: None,
            randomization_used,
        }
    }

    pub fn reject_at(crossing_index: Option<usize>, randomization_used: Option<f64>) -> Self {
        Self {
            reject: true,
            crossing_index,
            randomization_used,
        }
    }

    fn from_bool(reject: bool, randomization_used: Option<f64>) -> Self {
        Self {
            reject,
            crossing_index: None,
            randomization_used,
        }
    }
}

/// Incremental mean of `xs`; `0` for an empty slice.
pub fn mean(xs: &[f64]) -> f64 {
    RunningMeans::new(xs.iter().copied()).last().unwrap_or(0.0)
}

/// Iterator over the running averages `(x_1 + ... + x_t) / t`.
#[derive(Debug, Clone)]
pub struct RunningMeans<I> {
    inner: I,
    t: usize,
    mean: f64,
}

impl<I: Iterator<Item = f64>> RunningMeans<I> {
    pub fn new(inner: I) -> Self {
        Self {
            inner,
            t: 0,
            mean: 0.0,
        }
    }
}

impl<I: Iterator<Item = f64>> Iterator for RunningMeans<I> {
    type Item = f64;

    #[inline]
    fn next(&mut self) -> Option<f64> {
        let x = self.inner.next()?;
        self.t += 1;
        self.mean = if self.t == 1 || x == self.mean {
            x
        } else if x.is_infinite() || self.mean.is_infinite() {
            // avoid inf - inf
            self.mean + x
        } else {
            self.mean + (x - self.mean) / self.t as f64
        };
        Some(self.mean)
    }
}

fn check_sequence(xs: &[f64]) -> Result<()> {
    if xs.is_empty() {
        return Err(Error::EmptyInput("xs"));
    }
    xs.iter()
        .try_for_each(|&x| check_nonnegative("x", x).map(|_| ()))
}

/// Markov rule: reject iff `x >= 1/alpha`.
pub fn mi_reject(x: f64, alpha: f64) -> Result<Decision> {
    check_alpha(alpha)?;
    check_nonnegative("x", x)?;
    Ok(Decision::from_bool(x >= 1.0 / alpha, None))
}

/// Uniformly-randomized Markov rule: reject iff `x >= u/alpha`.
pub fn umi_reject(x: f64, alpha: f64, u: f64) -> Result<Decision> {
    check_alpha(alpha)?;
    check_u(u)?;
    check_nonnegative("x", x)?;
    Ok(Decision::from_bool(x >= u / alpha, Some(u)))
}

/// Additively-randomized Markov rule: reject iff `x >= eps - A` with
/// `A = eps * u`. Equivalent to `umi_reject(x, 1/eps, 1 - u)`.
pub fn ami_reject(x: f64, epsilon: f64, u: f64) -> Result<Decision> {
    check_positive("epsilon", epsilon)?;
    if !(u > 0.0 && u < 1.0) {
        return Err(Error::InvalidParameter {
            name: "u",
            value: u,
            expected: "a value in (0, 1)",
        });
    }
    check_nonnegative("x", x)?;
    Ok(Decision::from_bool(x >= epsilon - epsilon * u, Some(u)))
}

/// Exchangeable Markov rule: reject at the first `t` whose running average
/// reaches `1/alpha`.
///
/// Prefixes are scanned left to right and the scan stops at the first
/// crossing, so callers may feed adaptively-sized sequences.
pub fn emi_reject(xs: &[f64], alpha: f64) -> Result<Decision> {
    check_alpha(alpha)?;
    check_sequence(xs)?;
    Ok(emi_scan(xs, 1.0 / alpha, None))
}

fn emi_scan(xs: &[f64], threshold: f64, u: Option<f64>) -> Decision {
    match RunningMeans::new(xs.iter().copied()).position(|m| m >= threshold) {
        Some(t) => Decision::reject_at(Some(t + 1), u),
        None => Decision::accept(u),
    }
}

/// Combined rule: reject if `xs[0] >= u/alpha`, or if EMI rejects.
pub fn eumi_reject(xs: &[f64], alpha: f64, u: f64) -> Result<Decision> {
    check_alpha(alpha)?;
    check_u(u)?;
    check_sequence(xs)?;
    if xs[0] >= u / alpha {
        return Ok(Decision::reject_at(Some(1), Some(u)));
    }
    Ok(emi_scan(xs, 1.0 / alpha, Some(u)))
}

/// E-to-p calibration `min(u/e, 1)`, with `u = 1` when absent.
///
/// `e = 0` maps to `p = 1` (`u/0` is read as `+inf`). Non-positive or NaN
/// inputs are treated the same way.
pub fn e_to_p(e: f64, u: Option<f64>) -> f64 {
    let u = u.unwrap_or(1.0);
    if e > 0.0 {
        (u / e).min(1.0)
    } else {
        1.0
    }
}

/// A pair of nondecreasing maps `f: values -> I` and `g: I -> values` with
/// `f(g(z)) >= z` on the interval `I`.
///
/// For any `X`, an independent uniform `U` and `f(x) > 0`,
/// `P(X >= g(U f(x))) <= E[f(X)] / f(x)`.
pub struct MonotonePair<F, G> {
    pub f: F,
    pub g: G,
    /// Closed interval `I`; the upper end may be `+inf`.
    pub domain: (f64, f64),
}

impl<F, G> MonotonePair<F, G>
where
    F: Fn(f64) -> f64,
    G: Fn(f64) -> f64,
{
    pub fn new(f: F, g: G, domain: (f64, f64)) -> Self {
        Self { f, g, domain }
    }

    fn in_domain(&self, z: f64) -> bool {
        z >= self.domain.0 && z <= self.domain.1
    }

    /// Spot-checks `f(g(z)) >= z` on `samples` points of `I`.
    ///
    /// Returns the first violating `z`, if any. Relative slack of `1e-12`
    /// absorbs rounding in the caller's maps.
    pub fn find_violation(&self, rng: &mut RngStream, samples: usize) -> Option<f64> {
        let (lo, hi) = self.domain;
        (0..samples).find_map(|_| {
            let u = rng.uniform01();
            let z = if hi.is_finite() {
                lo + (hi - lo) * u
            } else {
                lo + (std::f64::consts::FRAC_PI_2 * u).tan()
            };
            let back = (self.f)((self.g)(z));
            (back < z - 1e-12 * z.abs().max(1.0)).then_some(z)
        })
    }
}

/// Randomized tail threshold `g(u f(x))`.
pub fn randomized_tail_threshold<F, G>(pair: &MonotonePair<F, G>, x: f64, u: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
    G: Fn(f64) -> f64,
{
    check_u(u)?;
    let fx = (pair.f)(x);
    if fx.is_nan() || fx <= 0.0 {
        return Err(Error::InvalidParameter {
            name: "f(x)",
            value: fx,
            expected: "f(x) > 0",
        });
    }
    let z = u * fx;
    if !pair.in_domain(z) {
        return Err(Error::InvalidParameter {
            name: "u*f(x)",
            value: z,
            expected: "a point of the domain of g",
        });
    }
    Ok((pair.g)(z))
}
