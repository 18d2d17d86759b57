//! Confidence intervals and tail thresholds from classical concentration
//! inequalities, each with a uniformly-randomized counterpart.
//!
//! Randomization always enters as a draw `u` in (0, 1]; `u = 1` reproduces the
//! deterministic bound exactly. A `u` that is only stochastically larger than
//! uniform (for example [`crate::rng::rank_randomizer`]) is equally valid.

use std::fmt;

use crate::betting::BettingRule;
use crate::error::{check_alpha, check_open_unit, check_positive, check_u, Error, Result};

/// Which construction produced an interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CiMethod {
    Hoeffding,
    RandomizedHoeffding,
    HoeffdingCltFloor,
    Chebyshev,
    RandomizedChebyshev,
    TruncatedChebyshev,
    ExactZ,
    EmpiricalBernstein,
    RandomizedEmpiricalBernstein,
    EmpiricalBernsteinIntersection,
    RandomizedEmpiricalBernsteinIntersection,
    Betting(BettingRule),
}

impl fmt::Display for CiMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            CiMethod::Hoeffding => "hoeffding",
            CiMethod::RandomizedHoeffding => "rand_hoeffding",
            CiMethod::HoeffdingCltFloor => "rand_hoeffding_clt_floor",
            CiMethod::Chebyshev => "chebyshev",
            CiMethod::RandomizedChebyshev => "rand_chebyshev",
            CiMethod::TruncatedChebyshev => "truncated_chebyshev",
            CiMethod::ExactZ => "exact_z",
            CiMethod::EmpiricalBernstein => "empirical_bernstein",
            CiMethod::RandomizedEmpiricalBernstein => "rand_empirical_bernstein",
            CiMethod::EmpiricalBernsteinIntersection => "empirical_bernstein_intersection",
            CiMethod::RandomizedEmpiricalBernsteinIntersection => {
                "rand_empirical_bernstein_intersection"
            }
            CiMethod::Betting(rule) => return write!(f, "betting_{rule}"),
        };
        f.write_str(name)
    }
}

/// A confidence interval `[lower, upper]` or the explicit empty set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConfidenceInterval {
    pub center: f64,
    pub halfwidth: f64,
    pub lower: f64,
    pub upper: f64,
    /// Set when the construction produced the empty set; `lower`, `upper` and
    /// `halfwidth` are then meaningless (stored as `center`, `center`, 0).
    pub empty: bool,
    pub method: CiMethod,
    pub u_draw: Option<f64>,
}

impl ConfidenceInterval {
    /// `center ± halfwidth`; a negative halfwidth yields the empty interval.
    pub fn symmetric(center: f64, halfwidth: f64, method: CiMethod, u_draw: Option<f64>) -> Self {
        if halfwidth < 0.0 {
            return Self::empty(center, method, u_draw);
        }
        Self {
            center,
            halfwidth,
            lower: center - halfwidth,
            upper: center + halfwidth,
            empty: false,
            method,
            u_draw,
        }
    }

    pub fn from_bounds(lower: f64, upper: f64, method: CiMethod, u_draw: Option<f64>) -> Self {
        debug_assert!(lower <= upper);
        Self {
            center: 0.5 * (lower + upper),
            halfwidth: 0.5 * (upper - lower),
            lower,
            upper,
            empty: false,
            method,
            u_draw,
        }
    }

    pub fn empty(center: f64, method: CiMethod, u_draw: Option<f64>) -> Self {
        Self {
            center,
            halfwidth: 0.0,
            lower: center,
            upper: center,
            empty: true,
            method,
            u_draw,
        }
    }

    pub fn contains(&self, theta: f64) -> bool {
        !self.empty && self.lower <= theta && theta <= self.upper
    }

    pub fn width(&self) -> f64 {
        if self.empty {
            0.0
        } else {
            self.upper - self.lower
        }
    }

    /// Intersection with `[lo, hi]`.
    pub fn clip(&self, lo: f64, hi: f64) -> Self {
        if self.empty {
            return *self;
        }
        let lower = self.lower.max(lo);
        let upper = self.upper.min(hi);
        if lower > upper {
            return Self::empty(self.center, self.method, self.u_draw);
        }
        Self::from_bounds(lower, upper, self.method, self.u_draw)
    }
}

/// Inverse of the standard normal CDF.
///
/// Acklam's rational approximation; relative error below `1.2e-9` over the
/// whole open interval.
pub fn normal_quantile(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_69e2,
        -3.066_479_806_614_716e1,
        2.506_628_277_459_239,
    ];
    const B: [f64; 5] = [
        -5.447_609_879_822_406e1,
        1.615_858_368_580_409e2,
        -1.556_989_798_598_866e2,
        6.680_131_188_771_972e1,
        -1.328_068_155_288_572e1,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_293e-3,
        -3.223_964_580_411_365e-1,
        -2.400_758_277_161_838,
        -2.549_732_539_343_734,
        4.374_664_141_464_968,
        2.938_163_982_698_783,
    ];
    const D: [f64; 4] = [
        7.784_695_709_041_462e-3,
        3.224_671_290_700_398e-1,
        2.445_134_137_142_996,
        3.754_408_661_907_416,
    ];
    const P_LOW: f64 = 0.02425;

    if p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
    let tail = |q: f64| {
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };
    if p < P_LOW {
        tail((-2.0 * p.ln()).sqrt())
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        -tail((-2.0 * (1.0 - p).ln()).sqrt())
    }
}

/// `p`-quantile of the chi-square distribution with one degree of freedom.
pub fn chi2_1_quantile(p: f64) -> f64 {
    normal_quantile(0.5 * (1.0 + p)).powi(2)
}

fn check_n(n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidCount {
            name: "n",
            value: n,
            expected: "n >= 1",
        });
    }
    Ok(n as f64)
}

/// One-sided randomized Hoeffding threshold for the mean of `n`
/// sigma-subGaussian variables:
/// `sigma sqrt(2 log(1/alpha) / n) + sigma log(u) / sqrt(2 n log(1/alpha))`.
pub fn hoeffding_threshold(sigma: f64, n: usize, alpha: f64, u: Option<f64>) -> Result<f64> {
    check_positive("sigma", sigma)?;
    let n = check_n(n)?;
    check_alpha(alpha)?;
    Ok(hoeffding_halfwidth(
        sigma,
        n,
        (1.0 / alpha).ln(),
        u.map(check_u).transpose()?,
    ))
}

fn hoeffding_halfwidth(sigma: f64, n: f64, log_term: f64, u: Option<f64>) -> f64 {
    let classical = sigma * (2.0 * log_term / n).sqrt();
    match u {
        Some(u) => classical + sigma * u.ln() / (2.0 * n * log_term).sqrt(),
        None => classical,
    }
}

/// Hoeffding interval `xbar ± h` with `h = sigma sqrt(2 log(2/alpha)/n)`,
/// plus `sigma log(u) / sqrt(2 n log(2/alpha))` when `u` is given.
///
/// A negative randomized halfwidth gives the empty interval unless
/// `clt_floor` is set, in which case the halfwidth is floored at the normal
/// interval's `sigma z_{1-alpha/2} / sqrt(n)`.
pub fn hoeffding_ci(
    xbar: f64,
    sigma: f64,
    n: usize,
    alpha: f64,
    u: Option<f64>,
    clt_floor: bool,
) -> Result<ConfidenceInterval> {
    check_positive("sigma", sigma)?;
    let nf = check_n(n)?;
    check_alpha(alpha)?;
    let u = u.map(check_u).transpose()?;
    let mut halfwidth = hoeffding_halfwidth(sigma, nf, (2.0 / alpha).ln(), u);
    let method = if clt_floor {
        halfwidth = halfwidth.max(sigma * normal_quantile(1.0 - alpha / 2.0) / nf.sqrt());
        CiMethod::HoeffdingCltFloor
    } else if u.is_some() {
        CiMethod::RandomizedHoeffding
    } else {
        CiMethod::Hoeffding
    };
    Ok(ConfidenceInterval::symmetric(xbar, halfwidth, method, u))
}

/// Normal-theory interval `xbar ± sigma z_{1-alpha/2} / sqrt(n)`.
pub fn exact_z_ci(xbar: f64, sigma: f64, n: usize, alpha: f64) -> Result<ConfidenceInterval> {
    check_positive("sigma", sigma)?;
    let n = check_n(n)?;
    check_alpha(alpha)?;
    let halfwidth = sigma * normal_quantile(1.0 - alpha / 2.0) / n.sqrt();
    Ok(ConfidenceInterval::symmetric(
        xbar,
        halfwidth,
        CiMethod::ExactZ,
        None,
    ))
}

/// Chebyshev interval `xbar ± sigma / sqrt(alpha n)`, scaled by `sqrt(u)`
/// when `u` is given and by `max(sqrt(u), floor)` when a truncation floor is
/// also given.
pub fn chebyshev_ci(
    xbar: f64,
    sigma: f64,
    n: usize,
    alpha: f64,
    u: Option<f64>,
    truncate_floor: Option<f64>,
) -> Result<ConfidenceInterval> {
    check_positive("sigma", sigma)?;
    let nf = check_n(n)?;
    check_alpha(alpha)?;
    let u = u.map(check_u).transpose()?;
    let floor = truncate_floor
        .map(|f| check_open_unit("truncate_floor", f))
        .transpose()?;
    let base = sigma / (alpha * nf).sqrt();
    let (factor, method) = match (u, floor) {
        (None, _) => (1.0, CiMethod::Chebyshev),
        (Some(u), None) => (u.sqrt(), CiMethod::RandomizedChebyshev),
        (Some(u), Some(floor)) => (u.sqrt().max(floor), CiMethod::TruncatedChebyshev),
    };
    Ok(ConfidenceInterval::symmetric(
        xbar,
        factor * base,
        method,
        u,
    ))
}

/// Cantelli threshold: `k sigma`, or `sqrt(u)(k sigma + sigma/k) - sigma/k`
/// when randomized. Both exceedance probabilities are at most
/// [`cantelli_tail_bound`]`(k)`.
pub fn cantelli_threshold(sigma: f64, k: f64, u: Option<f64>) -> Result<f64> {
    check_positive("sigma", sigma)?;
    check_positive("k", k)?;
    Ok(match u.map(check_u).transpose()? {
        None => k * sigma,
        Some(u) => u.sqrt() * (k * sigma + sigma / k) - sigma / k,
    })
}

pub fn cantelli_tail_bound(k: f64) -> f64 {
    1.0 / (k * k + 1.0)
}

/// Bernstein threshold `x = sqrt(2 sigma^2 log(1/alpha)) + 2 b log(1/alpha)`;
/// randomized as `x + (b x + sigma^2) log(u) / x`.
///
/// The randomized form applies the generic tail bound with
/// `f = exp(lambda ·)`, `g = log(·) / lambda` at the Bernstein-optimal
/// `lambda = x / (b x + sigma^2)`, which keeps the tail at
/// `exp(-x^2 / (2 (sigma^2 + b x))) = alpha`. The coefficient `(b x + sigma^2)`
/// without the `1/x` corresponds to `lambda = 1 / (b x + sigma^2)` and does not
/// keep the level in general (see the Bernoulli test below).
pub fn bernstein_threshold(sigma: f64, b: f64, alpha: f64, u: Option<f64>) -> Result<f64> {
    check_positive("sigma", sigma)?;
    check_positive("b", b)?;
    check_alpha(alpha)?;
    let log_term = (1.0 / alpha).ln();
    let sigma2 = sigma * sigma;
    let x = (2.0 * sigma2 * log_term).sqrt() + 2.0 * b * log_term;
    Ok(match u.map(check_u).transpose()? {
        None => x,
        Some(u) => x + (b * x + sigma2) * u.ln() / x,
    })
}

/// `psi(lambda) = -log(1 - lambda) - lambda` for `lambda` in [0, 1).
pub fn psi(lambda: f64) -> f64 {
    -(-lambda).ln_1p() - lambda
}

/// Regularized running mean and variance of [0, 1]-valued data:
/// `mu_t = (1/2 + sum x_i) / (t + 1)` and
/// `sigma2_t = (1/4 + sum (x_i - mu_i)^2) / (t + 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegularizedMoments {
    t: usize,
    sum: f64,
    sum_sq_dev: f64,
    mu_hat: f64,
    sigma2_hat: f64,
}

impl Default for RegularizedMoments {
    fn default() -> Self {
        Self {
            t: 0,
            sum: 0.0,
            sum_sq_dev: 0.0,
            mu_hat: 0.5,
            sigma2_hat: 0.25,
        }
    }
}

impl RegularizedMoments {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn update(&mut self, x: f64) {
        self.t += 1;
        let denom = (self.t + 1) as f64;
        self.sum += x;
        self.mu_hat = (0.5 + self.sum) / denom;
        let dev = x - self.mu_hat;
        self.sum_sq_dev += dev * dev;
        self.sigma2_hat = (0.25 + self.sum_sq_dev) / denom;
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn mu_hat(&self) -> f64 {
        self.mu_hat
    }

    pub fn sigma2_hat(&self) -> f64 {
        self.sigma2_hat
    }
}

/// Fold state for the predictable-plugin empirical Bernstein interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmpiricalBernsteinState {
    horizon: f64,
    log_term: f64,
    moments: RegularizedMoments,
    sum_lambda: f64,
    sum_lambda_x: f64,
    sum_v_psi: f64,
}

impl EmpiricalBernsteinState {
    /// State for a sample of planned size `horizon` at level `alpha`.
    pub fn new(horizon: usize, alpha: f64) -> Result<Self> {
        let horizon = check_n(horizon)?;
        check_alpha(alpha)?;
        Ok(Self {
            horizon,
            log_term: (2.0 / alpha).ln(),
            moments: RegularizedMoments::new(),
            sum_lambda: 0.0,
            sum_lambda_x: 0.0,
            sum_v_psi: 0.0,
        })
    }

    /// Bet for the next observation; depends on past data only.
    pub fn next_lambda(&self) -> f64 {
        (2.0 * self.log_term / (self.moments.sigma2_hat * self.horizon))
            .sqrt()
            .min(0.5)
    }

    pub fn update(&mut self, x: f64) {
        let lambda = self.next_lambda();
        let v = (x - self.moments.mu_hat).powi(2);
        self.sum_lambda += lambda;
        self.sum_lambda_x += lambda * x;
        self.sum_v_psi += v * psi(lambda);
        self.moments.update(x);
    }

    pub fn t(&self) -> usize {
        self.moments.t
    }

    pub fn mu_hat(&self) -> f64 {
        self.moments.mu_hat
    }

    pub fn sigma2_hat(&self) -> f64 {
        self.moments.sigma2_hat
    }

    pub fn sum_lambda(&self) -> f64 {
        self.sum_lambda
    }

    pub fn sum_lambda_x(&self) -> f64 {
        self.sum_lambda_x
    }

    pub fn sum_v_psi(&self) -> f64 {
        self.sum_v_psi
    }

    /// `(center, halfwidth)` of the current interval before clipping; `u`
    /// adds `log(u)` to the numerator of the halfwidth.
    pub fn center_halfwidth(&self, u: Option<f64>) -> (f64, f64) {
        let log_u = u.map_or(0.0, f64::ln);
        (
            self.sum_lambda_x / self.sum_lambda,
            (self.log_term + log_u + self.sum_v_psi) / self.sum_lambda,
        )
    }
}

/// Empirical Bernstein interval for the mean of [0, 1]-valued data, clipped
/// to [0, 1].
///
/// With `u`, the halfwidth numerator gains `log(u)`; a negative randomized
/// halfwidth collapses to the point `{center}`. With `intersect`, the result
/// is the running intersection of the prefix intervals; only the final prefix
/// uses `u`. If that intersection is empty the final interval is returned
/// instead.
pub fn empirical_bernstein_ci(
    data: &[f64],
    alpha: f64,
    u: Option<f64>,
    intersect: bool,
) -> Result<ConfidenceInterval> {
    if data.is_empty() {
        return Err(Error::EmptyInput("data"));
    }
    if let Some(&bad) = data.iter().find(|x| !(0.0..=1.0).contains(*x)) {
        return Err(Error::InvalidParameter {
            name: "data",
            value: bad,
            expected: "values in [0, 1]",
        });
    }
    let u = u.map(check_u).transpose()?;
    let method = match (u.is_some(), intersect) {
        (false, false) => CiMethod::EmpiricalBernstein,
        (true, false) => CiMethod::RandomizedEmpiricalBernstein,
        (false, true) => CiMethod::EmpiricalBernsteinIntersection,
        (true, true) => CiMethod::RandomizedEmpiricalBernsteinIntersection,
    };
    let prefix_interval = |state: &EmpiricalBernsteinState, u: Option<f64>| {
        let (center, halfwidth) = state.center_halfwidth(u);
        ConfidenceInterval::symmetric(center, halfwidth.max(0.0), method, u).clip(0.0, 1.0)
    };

    let mut state = EmpiricalBernsteinState::new(data.len(), alpha)?;
    let (last, head) = data.split_last().expect("nonempty");
    let mut running: Option<(f64, f64)> = None;
    for &x in head {
        state.update(x);
        if intersect {
            let c = prefix_interval(&state, None);
            running = Some(match running {
                None => (c.lower, c.upper),
                Some((lo, hi)) => (lo.max(c.lower), hi.min(c.upper)),
            });
        }
    }
    state.update(*last);
    let last_ci = prefix_interval(&state, u);
    match running {
        Some((lo, hi)) if intersect => {
            let (lo, hi) = (lo.max(last_ci.lower), hi.min(last_ci.upper));
            Ok(if lo <= hi {
                ConfidenceInterval::from_bounds(lo, hi, method, u)
            } else {
                last_ci
            })
        }
        _ => Ok(last_ci),
    }
}
