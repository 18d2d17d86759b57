//! Universal inference for the number of components of a Gaussian mixture.
//!
//! The model is `w1 N(mu1, 1) + (1 - w1) N(mu2, 1)` with known weight `w1`,
//! tested against the null `mu1 = mu2`. Under the null the density is exactly
//! `N(mu, 1)`, so the null MLE on any subset is its sample mean.

use std::fmt;

use crate::error::{check_alpha, check_open_unit, check_positive, check_u, Error, Result};
use crate::markov::{emi_reject, eumi_reject, mean, mi_reject, umi_reject, Decision};
use crate::rng::{rank_randomizer, RngStream};
use crate::tail_bounds::chi2_1_quantile;

/// Mixing weight of the first component in the simulation model.
pub const DEFAULT_W1: f64 = 0.25;
pub const DEFAULT_TOL: f64 = 1e-8;
pub const DEFAULT_MAX_ITER: usize = 500;
pub const DEFAULT_SPLIT_FRAC: f64 = 0.5;

const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

#[derive(Debug, Clone, PartialEq)]
pub struct MixtureFit {
    pub mu1: f64,
    pub mu2: f64,
    pub loglik: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Log-likelihood at the start of each iteration, ending with the value
    /// at the returned means.
    pub loglik_path: Vec<f64>,
}

/// Mixture log-density evaluator with the logs of the weights cached.
#[derive(Debug, Clone, Copy)]
struct Mixture {
    ln_w1: f64,
    ln_w2: f64,
}

impl Mixture {
    fn new(w1: f64) -> Self {
        Self {
            ln_w1: w1.ln(),
            ln_w2: (-w1).ln_1p(),
        }
    }

    /// Returns `(log density, responsibility of component 1)` at `y`.
    #[inline]
    fn eval(&self, y: f64, mu1: f64, mu2: f64) -> (f64, f64) {
        let a1 = self.ln_w1 - 0.5 * (y - mu1) * (y - mu1);
        let a2 = self.ln_w2 - 0.5 * (y - mu2) * (y - mu2);
        let d = a1 - a2;
        let e = (-d.abs()).exp();
        let log_density = a1.max(a2) + e.ln_1p() - HALF_LN_2PI;
        let r1 = if d >= 0.0 {
            1.0 / (1.0 + e)
        } else {
            e / (1.0 + e)
        };
        (log_density, r1)
    }

    fn loglik(&self, data: &[f64], mu1: f64, mu2: f64) -> f64 {
        data.iter().map(|&y| self.eval(y, mu1, mu2).0).sum()
    }

    /// One pass: log-likelihood at `(mu1, mu2)` and the EM update.
    fn em_step(&self, data: &[f64], mu1: f64, mu2: f64) -> (f64, f64, f64) {
        let (mut ll, mut s1, mut sy1, mut sy) = (0.0, 0.0, 0.0, 0.0);
        for &y in data {
            let (l, r) = self.eval(y, mu1, mu2);
            ll += l;
            s1 += r;
            sy1 += r * y;
            sy += y;
        }
        let n = data.len() as f64;
        let s2 = n - s1;
        // an empty component keeps its mean
        let new1 = if s1 > 1e-300 { sy1 / s1 } else { mu1 };
        let new2 = if s2 > 1e-300 { (sy - sy1) / s2 } else { mu2 };
        (ll, new1, new2)
    }
}

fn check_data(data: &[f64]) -> Result<()> {
    if data.is_empty() {
        return Err(Error::EmptyInput("data"));
    }
    for &y in data {
        if !y.is_finite() {
            return Err(Error::InvalidParameter {
                name: "data",
                value: y,
                expected: "finite values",
            });
        }
    }
    Ok(())
}

/// EM for the two means of a unit-variance mixture with fixed weights
/// `(w1, 1 - w1)`. Stops when the log-likelihood changes by less than `tol`
/// or after `max_iter` updates.
pub fn em_fit_two_component(
    data: &[f64],
    w1: f64,
    tol: f64,
    max_iter: usize,
    init: (f64, f64),
) -> Result<MixtureFit> {
    check_data(data)?;
    check_open_unit("w1", w1)?;
    check_positive("tol", tol)?;
    if max_iter == 0 {
        return Err(Error::InvalidCount {
            name: "max_iter",
            value: 0,
            expected: "max_iter >= 1",
        });
    }
    let mix = Mixture::new(w1);
    let (mut mu1, mut mu2) = init;
    let mut path: Vec<f64> = Vec::with_capacity(32);
    let mut converged = false;
    let mut iterations = 0;
    while iterations < max_iter {
        let (ll, n1, n2) = mix.em_step(data, mu1, mu2);
        if let Some(&prev) = path.last() {
            if (ll - prev).abs() < tol {
                path.push(ll);
                converged = true;
                break;
            }
        }
        path.push(ll);
        mu1 = n1;
        mu2 = n2;
        iterations += 1;
    }
    if !converged {
        path.push(mix.loglik(data, mu1, mu2));
    }
    // when converged, the last entry was computed at the returned means
    let loglik = *path.last().expect("at least one pass");
    Ok(MixtureFit {
        mu1,
        mu2,
        loglik,
        iterations,
        converged,
        loglik_path: path,
    })
}

fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let h = p * (sorted.len() - 1) as f64;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// EM with SQUAREM extrapolation (Varadhan and Roland, 2008).
///
/// Each cycle takes two EM steps from `theta0`, extrapolates along their
/// differences and applies one more EM step to the extrapolated point. The
/// result is kept only if its log-likelihood is at least that of the second
/// plain step, which is kept otherwise, so the recorded log-likelihoods are
/// nondecreasing exactly as for plain EM. `iterations` counts EM updates.
/// Near `mu1 = mu2` plain EM converges sublinearly; this needs a small
/// fraction of the passes there.
pub fn em_fit_squarem(
    data: &[f64],
    w1: f64,
    tol: f64,
    max_iter: usize,
    init: (f64, f64),
) -> Result<MixtureFit> {
    check_data(data)?;
    check_open_unit("w1", w1)?;
    check_positive("tol", tol)?;
    if max_iter == 0 {
        return Err(Error::InvalidCount {
            name: "max_iter",
            value: 0,
            expected: "max_iter >= 1",
        });
    }
    let mix = Mixture::new(w1);
    let step = |t: (f64, f64)| {
        let (ll, a, b) = mix.em_step(data, t.0, t.1);
        (ll, (a, b))
    };
    let mut theta = init;
    let (mut ll, mut next) = step(theta);
    let mut path = vec![ll];
    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iter {
        let theta1 = next;
        let (ll1, theta2) = step(theta1);
        let (ll2, next2) = step(theta2);
        iterations += 2;
        let r = (theta1.0 - theta.0, theta1.1 - theta.1);
        let v = (theta2.0 - theta1.0 - r.0, theta2.1 - theta1.1 - r.1);
        let (rn, vn) = (r.0.hypot(r.1), v.0.hypot(v.1));
        let mut accepted = (theta2, ll2, next2);
        if vn > 0.0 && rn > 0.0 && iterations < max_iter {
            let a = (-rn / vn).min(-1.0);
            let prime = (
                theta.0 - 2.0 * a * r.0 + a * a * v.0,
                theta.1 - 2.0 * a * r.1 + a * a * v.1,
            );
            let (_, stabilized) = step(prime);
            let (ll_s, next_s) = step(stabilized);
            iterations += 1;
            if ll_s.is_finite() && ll_s >= ll2 {
                accepted = (stabilized, ll_s, next_s);
            }
        }
        path.push(ll1);
        path.push(accepted.1);
        let previous = ll;
        (theta, ll, next) = accepted;
        if (ll - previous).abs() < tol {
            converged = true;
            break;
        }
    }
    Ok(MixtureFit {
        mu1: theta.0,
        mu2: theta.1,
        loglik: ll,
        iterations,
        converged,
        loglik_path: path,
    })
}

/// EM from two starts, the quartiles and mean -/+ one standard deviation,
/// keeping the fit with the larger log-likelihood.
pub fn fit_mixture(data: &[f64], w1: f64) -> Result<MixtureFit> {
    check_data(data)?;
    let mut sorted = data.to_vec();
    sorted.sort_by(f64::total_cmp);
    let m = mean(data);
    let sd = (data.iter().map(|y| (y - m) * (y - m)).sum::<f64>() / data.len() as f64).sqrt();
    let a = em_fit_squarem(
        data,
        w1,
        DEFAULT_TOL,
        DEFAULT_MAX_ITER,
        (
            quantile_sorted(&sorted, 0.25),
            quantile_sorted(&sorted, 0.75),
        ),
    )?;
    let b = em_fit_squarem(data, w1, DEFAULT_TOL, DEFAULT_MAX_ITER, (m - sd, m + sd))?;
    Ok(if b.loglik > a.loglik { b } else { a })
}

/// `sum_{y in D0} [log q(y) - log phi(y - mean(D0))]` for the mixture `q` with
/// means `(mu1, mu2)`.
pub fn log_split_ratio(d0: &[f64], w1: f64, mu1: f64, mu2: f64) -> Result<f64> {
    check_data(d0)?;
    check_open_unit("w1", w1)?;
    let mix = Mixture::new(w1);
    let m = mean(d0);
    Ok(d0
        .iter()
        .map(|&y| mix.eval(y, mu1, mu2).0 + 0.5 * (y - m) * (y - m) + HALF_LN_2PI)
        .sum())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SplitEValue {
    pub value: f64,
    pub log_value: f64,
    pub split_id: u64,
    /// Size of the evaluation half.
    pub n0: usize,
    /// Size of the fitting half.
    pub n1: usize,
    /// Rank of the last-drawn evaluation point within the evaluation half,
    /// usable in place of an external uniform.
    pub rank_u: f64,
}

/// Split likelihood-ratio e-value on a uniformly random partition.
///
/// A fraction `split_frac` of the points (rounded, at least one on each side)
/// forms the evaluation half `D0`; the mixture is fitted on the rest.
pub fn split_lrt(data: &[f64], split_frac: f64, rng: &mut RngStream) -> Result<SplitEValue> {
    split_lrt_weighted(data, split_frac, DEFAULT_W1, rng)
}

pub fn split_lrt_weighted(
    data: &[f64],
    split_frac: f64,
    w1: f64,
    rng: &mut RngStream,
) -> Result<SplitEValue> {
    check_data(data)?;
    check_open_unit("split_frac", split_frac)?;
    let n = data.len();
    if n < 2 {
        return Err(Error::InvalidCount {
            name: "n",
            value: n,
            expected: "n >= 2",
        });
    }
    let split_id = rng.next_u64();
    let mut shuffled = data.to_vec();
    rng.shuffle(&mut shuffled);
    let n0 = ((split_frac * n as f64).round() as usize).clamp(1, n - 1);
    let (d0, d1) = shuffled.split_at(n0);
    let fit = fit_mixture(d1, w1)?;
    let log_value = log_split_ratio(d0, w1, fit.mu1, fit.mu2)?;
    let rank_u = rank_randomizer(d0[n0 - 1], d0)?;
    Ok(SplitEValue {
        value: log_value.exp(),
        log_value,
        split_id,
        n0,
        n1: n - n0,
        rank_u,
    })
}

/// `B` split e-values on independent random partitions, the `b`-th drawn from
/// substream `b` of `rng`.
pub fn subsampled_split_evalues(
    data: &[f64],
    split_frac: f64,
    b_count: usize,
    rng: &RngStream,
) -> Result<Vec<SplitEValue>> {
    if b_count == 0 {
        return Err(Error::InvalidCount {
            name: "B",
            value: 0,
            expected: "B >= 1",
        });
    }
    (0..b_count as u64)
        .map(|b| split_lrt(data, split_frac, &mut rng.substream(b)))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UiRule {
    UI,
    UmiUi,
    SUI,
    UmiSui,
    EmiSui,
    EumiSui,
}

impl UiRule {
    pub const ALL: [UiRule; 6] = [
        Self::UI,
        Self::UmiUi,
        Self::SUI,
        Self::UmiSui,
        Self::EmiSui,
        Self::EumiSui,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::UI => "UI",
            Self::UmiUi => "UMI-UI",
            Self::SUI => "SUI",
            Self::UmiSui => "UMI-SUI",
            Self::EmiSui => "EMI-SUI",
            Self::EumiSui => "EUMI-SUI",
        }
    }
}

impl fmt::Display for UiRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Applies a universal-inference rule to split e-values. `UI` and `UmiUi`
/// take exactly one e-value.
pub fn ui_reject(es: &[f64], alpha: f64, u: f64, rule: UiRule) -> Result<Decision> {
    check_alpha(alpha)?;
    check_u(u)?;
    if es.is_empty() {
        return Err(Error::EmptyInput("e-values"));
    }
    let single = matches!(rule, UiRule::UI | UiRule::UmiUi);
    if single && es.len() != 1 {
        return Err(Error::RuleArity {
            rule: rule.name(),
            expected: "exactly one e-value",
            got: es.len(),
        });
    }
    match rule {
        UiRule::UI => mi_reject(es[0], alpha),
        UiRule::UmiUi => umi_reject(es[0], alpha, u),
        UiRule::SUI => mi_reject(mean(es), alpha),
        UiRule::UmiSui => umi_reject(mean(es), alpha, u),
        UiRule::EmiSui => emi_reject(es, alpha),
        UiRule::EumiSui => eumi_reject(es, alpha, u),
    }
}

/// `-2 log lambda` for the full data: twice the gap between the mixture fit
/// and the single-Gaussian fit. The mixture's value is floored at the null's,
/// which the alternative contains.
pub fn lrt_statistic(data: &[f64], w1: f64) -> Result<f64> {
    check_data(data)?;
    if data.len() < 2 {
        return Err(Error::InvalidCount {
            name: "n",
            value: data.len(),
            expected: "n >= 2",
        });
    }
    let m = mean(data);
    let ll_null: f64 = data
        .iter()
        .map(|y| -0.5 * (y - m) * (y - m) - HALF_LN_2PI)
        .sum();
    let fit = fit_mixture(data, w1)?;
    Ok(2.0 * (fit.loglik.max(ll_null) - ll_null))
}

/// Likelihood-ratio test for known weights: reject when `-2 log lambda`
/// exceeds the `1 - 2 alpha` quantile of chi-square(1), the limit law being
/// `max(0, Z)^2`.
pub fn goffinet_lrt_reject(data: &[f64], alpha: f64) -> Result<Decision> {
    check_alpha(alpha)?;
    if alpha >= 0.5 {
        return Err(Error::InvalidParameter {
            name: "alpha",
            value: alpha,
            expected: "alpha in (0, 1/2)",
        });
    }
    let stat = lrt_statistic(data, DEFAULT_W1)?;
    Ok(if stat > chi2_1_quantile(1.0 - 2.0 * alpha) {
        Decision::reject_at(None, None)
    } else {
        Decision::accept(None)
    })
}

/// Draws `n` points from `w1 N(mu1, 1) + (1 - w1) N(mu2, 1)`.
pub fn sample_mixture(
    rng: &mut RngStream,
    n: usize,
    w1: f64,
    mu1: f64,
    mu2: f64,
) -> Result<Vec<f64>> {
    check_open_unit("w1", w1)?;
    Ok((0..n)
        .map(|_| {
            let mu = if rng.uniform01() < w1 { mu1 } else { mu2 };
            mu + rng.standard_normal()
        })
        .collect())
}
