//! Testing the mean of a [0, 1]-valued variable by betting.
//!
//! A gambler starting with unit wealth bets `lambda_t` on each observation
//! through the factor `1 + lambda_t (y_t - m0)`. Under `H0: mean = m0` the
//! wealth is a nonnegative martingale whenever the bets are predictable.
//! Two one-sided gamblers (betting on a mean above and below `m0`) are
//! averaged to test both sides.

use std::fmt;

use crate::error::{check_alpha, check_open_unit, check_positive, check_u, Error, Result};
use crate::markov::{emi_reject, eumi_reject, mean, mi_reject, umi_reject, Decision};
use crate::rng::{random_permutation, Permutation, RngStream};
use crate::tail_bounds::{CiMethod, ConfidenceInterval, RegularizedMoments};
use crate::ville::{randomized_ville_reject, ville_first_crossing, WealthPath};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BettingRule {
    /// Running supremum of one wealth path.
    Ville,
    /// Ville on one path, plus the final wealth against `u/alpha`.
    RandVille,
    /// Average final wealth over `B` permutations against `1/alpha`.
    AvMI,
    UMI,
    EMI,
    EUMI,
}

impl BettingRule {
    pub const ALL: [BettingRule; 6] = [
        Self::Ville,
        Self::RandVille,
        Self::AvMI,
        Self::UMI,
        Self::EMI,
        Self::EUMI,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Ville => "Ville",
            Self::RandVille => "RandVille",
            Self::AvMI => "AvMI",
            Self::UMI => "UMI",
            Self::EMI => "EMI",
            Self::EUMI => "EUMI",
        }
    }

    /// Whether the rule uses final wealths over permutations.
    pub fn uses_permutations(self) -> bool {
        !matches!(self, Self::Ville | Self::RandVille)
    }
}

impl fmt::Display for BettingRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// What a strategy may look at before betting on observation `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetContext {
    /// Regularized mean of the first `t - 1` observations.
    pub mu_hat: f64,
    /// Regularized variance of the first `t - 1` observations.
    pub sigma2_hat: f64,
    pub t: usize,
    pub alpha: f64,
    pub m0: f64,
}

/// A predictable betting strategy. Bets are nonnegative stakes for the
/// gambler expecting a mean above `m0` (`plus`) or below it (`minus`); the
/// engine clamps them to the range that keeps wealth nonnegative.
pub trait BettingStrategy: Sync {
    fn plus(&self, ctx: &BetContext) -> f64;
    fn minus(&self, ctx: &BetContext) -> f64;
}

/// Approximate Kelly bet `(mu - m0) / (sigma2 + (mu - m0)^2)`, capped at half
/// the largest safe stake.
#[derive(Debug, Clone, Copy, Default)]
pub struct ApproxKelly;

#[inline]
fn kelly(edge: f64, sigma2: f64, cap: f64) -> f64 {
    (edge.max(0.0) / (sigma2 + edge * edge)).min(cap)
}

impl BettingStrategy for ApproxKelly {
    #[inline]
    fn plus(&self, c: &BetContext) -> f64 {
        kelly(c.mu_hat - c.m0, c.sigma2_hat, 0.5 / c.m0)
    }

    #[inline]
    fn minus(&self, c: &BetContext) -> f64 {
        kelly(c.m0 - c.mu_hat, c.sigma2_hat, 0.5 / (1.0 - c.m0))
    }
}

/// The same stake every round on both sides.
#[derive(Debug, Clone, Copy)]
pub struct ConstantBet(pub f64);

impl BettingStrategy for ConstantBet {
    fn plus(&self, _: &BetContext) -> f64 {
        self.0
    }

    fn minus(&self, _: &BetContext) -> f64 {
        self.0
    }
}

/// The default strategy's bet on the upper side.
pub fn default_strategy_lambda(
    mu_hat: f64,
    sigma2_hat: f64,
    t: usize,
    alpha: f64,
    m0: f64,
) -> Result<f64> {
    check_positive("sigma2_hat", sigma2_hat)?;
    check_alpha(alpha)?;
    check_open_unit("m0", m0)?;
    if !mu_hat.is_finite() {
        return Err(Error::InvalidParameter {
            name: "mu_hat",
            value: mu_hat,
            expected: "a finite value",
        });
    }
    Ok(ApproxKelly.plus(&BetContext {
        mu_hat,
        sigma2_hat,
        t,
        alpha,
        m0,
    }))
}

fn check_m0(m0: f64) -> Result<f64> {
    if (0.0..=1.0).contains(&m0) {
        Ok(m0)
    } else {
        Err(Error::InvalidParameter {
            name: "m0",
            value: m0,
            expected: "a value in [0, 1]",
        })
    }
}

fn check_unit_data(ys: &[f64]) -> Result<()> {
    if ys.is_empty() {
        return Err(Error::EmptyInput("data"));
    }
    for &y in ys {
        if !(0.0..=1.0).contains(&y) {
            return Err(Error::InvalidParameter {
                name: "y",
                value: y,
                expected: "data in [0, 1]",
            });
        }
    }
    Ok(())
}

/// Runs both gamblers over `ys` in order, calling `visit(plus, minus)` after
/// each step. Bets are clamped to `[0, 1/m0]` and `[0, 1/(1 - m0)]`.
#[inline]
fn run_wealth<S: BettingStrategy + ?Sized>(
    ys: impl Iterator<Item = f64>,
    m0: f64,
    alpha: f64,
    strategy: &S,
    mut visit: impl FnMut(f64, f64, f64, f64),
) {
    let (cap_plus, cap_minus) = (1.0 / m0, 1.0 / (1.0 - m0));
    let mut moments = RegularizedMoments::new();
    let (mut wp, mut wm) = (1.0f64, 1.0f64);
    for (i, y) in ys.enumerate() {
        let ctx = BetContext {
            mu_hat: moments.mu_hat(),
            sigma2_hat: moments.sigma2_hat(),
            t: i + 1,
            alpha,
            m0,
        };
        let lp = strategy.plus(&ctx).clamp(0.0, cap_plus);
        let lm = strategy.minus(&ctx).clamp(0.0, cap_minus);
        // clamp at zero against rounding when a bet sits exactly on the cap
        wp *= (1.0 + lp * (y - m0)).max(0.0);
        wm *= (1.0 - lm * (y - m0)).max(0.0);
        visit(lp, lm, wp, wm);
        moments.update(y);
    }
}

/// Pathwise wealth of both gamblers and their average, each starting at 1.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoSidedWealth {
    pub plus: WealthPath,
    pub minus: WealthPath,
    /// `(plus + minus) / 2` at every index.
    pub combined: WealthPath,
}

pub fn wealth_paths<S: BettingStrategy + ?Sized>(
    ys: &[f64],
    m0: f64,
    strategy: &S,
    alpha: f64,
) -> Result<TwoSidedWealth> {
    check_unit_data(ys)?;
    check_m0(m0)?;
    check_alpha(alpha)?;
    let n = ys.len() + 1;
    let (mut p, mut m, mut c) = (
        Vec::with_capacity(n),
        Vec::with_capacity(n),
        Vec::with_capacity(n),
    );
    p.push(1.0);
    m.push(1.0);
    c.push(1.0);
    run_wealth(ys.iter().copied(), m0, alpha, strategy, |_, _, wp, wm| {
        p.push(wp);
        m.push(wm);
        c.push(0.5 * (wp + wm));
    });
    Ok(TwoSidedWealth {
        plus: WealthPath::new(p)?,
        minus: WealthPath::new(m)?,
        combined: WealthPath::new(c)?,
    })
}

/// The bets `(plus, minus)` placed on each observation.
pub fn bet_sequence<S: BettingStrategy + ?Sized>(
    ys: &[f64],
    m0: f64,
    strategy: &S,
    alpha: f64,
) -> Result<Vec<(f64, f64)>> {
    check_unit_data(ys)?;
    check_m0(m0)?;
    check_alpha(alpha)?;
    let mut bets = Vec::with_capacity(ys.len());
    run_wealth(ys.iter().copied(), m0, alpha, strategy, |lp, lm, _, _| {
        bets.push((lp, lm))
    });
    Ok(bets)
}

/// Final combined wealth after processing `ys` in the order given by `order`.
fn final_wealth<S: BettingStrategy + ?Sized>(
    ys: &[f64],
    order: &[usize],
    m0: f64,
    alpha: f64,
    strategy: &S,
) -> f64 {
    let mut last = (1.0, 1.0);
    run_wealth(
        order.iter().map(|&i| ys[i]),
        m0,
        alpha,
        strategy,
        |_, _, wp, wm| last = (wp, wm),
    );
    0.5 * (last.0 + last.1)
}

/// Randomness shared by every rule within one replication: `B` permutations
/// and one uniform draw.
#[derive(Debug, Clone, PartialEq)]
pub struct BettingDesign {
    pub permutations: Vec<Permutation>,
    pub u: f64,
}

impl BettingDesign {
    /// Permutations come from substream 1 of `rng` and `u` from substream 2,
    /// so the draw does not depend on how many permutations were requested.
    pub fn draw(n: usize, b_count: usize, rng: &RngStream) -> Result<Self> {
        if b_count == 0 {
            return Err(Error::InvalidCount {
                name: "B",
                value: 0,
                expected: "B >= 1",
            });
        }
        let mut perm_rng = rng.substream(1);
        let permutations = (0..b_count)
            .map(|_| random_permutation(&mut perm_rng, n))
            .collect::<Result<Vec<_>>>()?;
        let u = rng.substream(2).uniform01();
        Ok(Self { permutations, u })
    }

    /// Wealth evidence for `H0: mean = m0`. Final wealths over permutations
    /// are only computed when `with_permutations` is set.
    pub fn evidence<S: BettingStrategy + ?Sized>(
        &self,
        ys: &[f64],
        m0: f64,
        alpha: f64,
        strategy: &S,
        with_permutations: bool,
    ) -> Result<BettingEvidence> {
        let path = wealth_paths(ys, m0, strategy, alpha)?.combined;
        let finals = if with_permutations {
            self.permutations
                .iter()
                .map(|pi| {
                    if pi.len() != ys.len() {
                        return Err(Error::InvalidCount {
                            name: "permutation length",
                            value: pi.len(),
                            expected: "the sample size",
                        });
                    }
                    Ok(final_wealth(ys, pi.mapping(), m0, alpha, strategy))
                })
                .collect::<Result<Vec<_>>>()?
        } else {
            Vec::new()
        };
        Ok(BettingEvidence {
            path,
            finals,
            u: self.u,
        })
    }
}

/// Combined wealth path in the original order and final combined wealths
/// over the design's permutations.
#[derive(Debug, Clone, PartialEq)]
pub struct BettingEvidence {
    pub path: WealthPath,
    pub finals: Vec<f64>,
    pub u: f64,
}

impl BettingEvidence {
    pub fn decide(&self, rule: BettingRule, alpha: f64) -> Result<Decision> {
        check_alpha(alpha)?;
        check_u(self.u)?;
        if rule.uses_permutations() && self.finals.is_empty() {
            return Err(Error::RuleArity {
                rule: rule.name(),
                expected: "final wealths over at least one permutation",
                got: 0,
            });
        }
        match rule {
            BettingRule::Ville => Ok(match ville_first_crossing(&self.path, alpha)? {
                Some(t) => Decision::reject_at(Some(t), None),
                None => Decision::accept(None),
            }),
            BettingRule::RandVille => {
                randomized_ville_reject(&self.path, self.path.len() - 1, alpha, self.u)
            }
            BettingRule::AvMI => mi_reject(mean(&self.finals), alpha),
            BettingRule::UMI => umi_reject(mean(&self.finals), alpha, self.u),
            BettingRule::EMI => emi_reject(&self.finals, alpha),
            BettingRule::EUMI => eumi_reject(&self.finals, alpha, self.u),
        }
    }
}

/// Tests `H0: mean = m0` with the default strategy. Ville and RandVille
/// process the data in the given order; the other rules draw `b_count`
/// permutations from `rng`.
pub fn betting_reject(
    data: &[f64],
    m0: f64,
    alpha: f64,
    b_count: usize,
    rng: &RngStream,
    rule: BettingRule,
) -> Result<Decision> {
    let design = BettingDesign::draw(data.len(), b_count, rng)?;
    design
        .evidence(data, m0, alpha, &ApproxKelly, rule.uses_permutations())?
        .decide(rule, alpha)
}

/// Confidence interval for the mean by inverting the betting test over the
/// grid `{0, step, 2 step, ..., 1}`, all tests sharing one design. Returns the
/// hull of the grid points that are not rejected, or an empty interval.
pub fn invert_mean_ci(
    data: &[f64],
    alpha: f64,
    grid_step: f64,
    b_count: usize,
    rng: &RngStream,
    rule: BettingRule,
) -> Result<ConfidenceInterval> {
    check_positive("grid_step", grid_step)?;
    if grid_step > 0.1 {
        return Err(Error::InvalidParameter {
            name: "grid_step",
            value: grid_step,
            expected: "a step in (0, 0.1]",
        });
    }
    check_unit_data(data)?;
    let design = BettingDesign::draw(data.len(), b_count, rng)?;
    let steps = (1.0 / grid_step).round() as usize;
    let grid: Vec<f64> = (0..=steps)
        .map(|k| (k as f64 * grid_step).min(1.0))
        .collect();
    let accepted = |m: f64| -> Result<bool> {
        Ok(!design
            .evidence(data, m, alpha, &ApproxKelly, rule.uses_permutations())?
            .decide(rule, alpha)?
            .reject)
    };
    let method = CiMethod::Betting(rule);
    let u_draw = matches!(
        rule,
        BettingRule::RandVille | BettingRule::UMI | BettingRule::EUMI
    )
    .then_some(design.u);
    let mut lower = None;
    for &m in &grid {
        if accepted(m)? {
            lower = Some(m);
            break;
        }
    }
    let Some(lower) = lower else {
        return Ok(ConfidenceInterval::empty(mean(data), method, u_draw));
    };
    let mut upper = lower;
    for &m in grid.iter().rev() {
        if m <= lower {
            break;
        }
        if accepted(m)? {
            upper = m;
            break;
        }
    }
    Ok(ConfidenceInterval::from_bounds(
        lower, upper, method, u_draw,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{make_rng, sample_beta_vec};

    #[test]
    fn default_lambda_examples() {
        assert_eq!(
            default_strategy_lambda(0.5, 0.1, 3, 0.05, 0.5).unwrap(),
            0.0
        );
        assert_eq!(
            default_strategy_lambda(0.7, 0.05, 3, 0.05, 0.5).unwrap(),
            1.0
        );
        let l = default_strategy_lambda(0.55, 0.05, 3, 0.05, 0.5).unwrap();
        assert!((l - 0.05 / 0.0525).abs() < 1e-12);
        assert!(default_strategy_lambda(0.5, 0.0, 3, 0.05, 0.5).is_err());
        assert!(default_strategy_lambda(0.5, 0.1, 3, 0.05, 1.0).is_err());
    }

    #[test]
    fn forced_bet_arithmetic() {
        let w = wealth_paths(&[1.0, 0.0], 0.5, &ConstantBet(1.0), 0.05).unwrap();
        assert!((w.plus.last() - 0.75).abs() < 1e-15);
        let w = wealth_paths(&[0.3, 0.9, 0.1], 0.5, &ConstantBet(0.0), 0.05).unwrap();
        assert!(w.combined.values().iter().all(|&m| m == 1.0));
        assert!(wealth_paths(&[1.2], 0.5, &ApproxKelly, 0.05).is_err());
        assert!(wealth_paths(&[], 0.5, &ApproxKelly, 0.05).is_err());
    }

    #[test]
    fn combined_is_pathwise_average_and_nonnegative() {
        let mut r = make_rng(80);
        for _ in 0..200 {
            let n = 1 + r.below(50);
            let ys: Vec<f64> = (0..n).map(|_| (r.below(3) as f64) / 2.0).collect();
            let m0 = r.uniform01();
            let w = wealth_paths(&ys, m0, &ConstantBet(1e6), 0.05).unwrap();
            for i in 0..=n {
                let (p, m) = (w.plus.values()[i], w.minus.values()[i]);
                assert!(p >= 0.0 && m >= 0.0);
                assert_eq!(w.combined.values()[i], 0.5 * (p + m));
            }
        }
    }

    #[test]
    fn bets_are_predictable() {
        let mut r = make_rng(81);
        let ys = sample_beta_vec(&mut r, 2.0, 3.0, 100).unwrap();
        let bets = bet_sequence(&ys, 0.5, &ApproxKelly, 0.05).unwrap();
        for t in [1usize, 10, 50, 99] {
            let mut other = ys.clone();
            r.shuffle(&mut other[t..]);
            let again = bet_sequence(&other, 0.5, &ApproxKelly, 0.05).unwrap();
            assert_eq!(bets[..=t], again[..=t]);
        }
    }

    #[test]
    fn null_wealth_has_unit_mean() {
        let mut r = make_rng(82);
        let reps = 10_000;
        let finals: Vec<f64> = (0..reps)
            .map(|_| {
                let ys = sample_beta_vec(&mut r, 20.0, 20.0, 500).unwrap();
                wealth_paths(&ys, 0.5, &ApproxKelly, 0.05)
                    .unwrap()
                    .combined
                    .last()
            })
            .collect();
        let m = mean(&finals);
        let sd = (finals.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (reps - 1) as f64).sqrt();
        assert!(
            (m - 1.0).abs() <= 3.0 * sd / (reps as f64).sqrt(),
            "{m} {sd}"
        );
    }

    #[test]
    fn rule_examples() {
        let mut values = vec![1.0; 38];
        values[37] = 20.5;
        let ev = BettingEvidence {
            path: WealthPath::new(values).unwrap(),
            finals: vec![10.0],
            u: 0.4,
        };
        assert_eq!(
            ev.decide(BettingRule::Ville, 0.05).unwrap().crossing_index,
            Some(37)
        );
        assert!(!ev.decide(BettingRule::AvMI, 0.05).unwrap().reject);
        assert!(ev.decide(BettingRule::UMI, 0.05).unwrap().reject);
        let no_finals = BettingEvidence {
            finals: vec![],
            ..ev
        };
        assert!(no_finals.decide(BettingRule::EMI, 0.05).is_err());
    }

    #[test]
    fn rule_dominance_on_shared_design() {
        let mut r = make_rng(83);
        for rep in 0..300 {
            let b = 18.0 + 4.0 * r.uniform01();
            let n = 20 + r.below(200);
            let ys = sample_beta_vec(&mut r, 20.0, b, n).unwrap();
            let design = BettingDesign::draw(n, 1 + r.below(10), &r.substream(rep)).unwrap();
            let ev = design.evidence(&ys, 0.5, 0.05, &ApproxKelly, true).unwrap();
            let d = |rule| ev.decide(rule, 0.05).unwrap().reject;
            if d(BettingRule::Ville) {
                assert!(d(BettingRule::RandVille));
            }
            if d(BettingRule::AvMI) {
                assert!(d(BettingRule::UMI) && d(BettingRule::EMI));
            }
            if d(BettingRule::EMI) || d(BettingRule::UMI) && ev.finals.len() == 1 {
                assert!(d(BettingRule::EUMI));
            }
        }
    }

    #[test]
    fn design_is_reproducible() {
        let rng = make_rng(84);
        let a = BettingDesign::draw(30, 5, &rng).unwrap();
        let b = BettingDesign::draw(30, 5, &rng).unwrap();
        assert_eq!(a, b);
        let c = BettingDesign::draw(30, 8, &rng).unwrap();
        assert_eq!(a.u, c.u);
        assert_eq!(a.permutations[..], c.permutations[..5]);
        assert!(BettingDesign::draw(30, 0, &rng).is_err());
    }

    #[test]
    fn betting_type_one_error() {
        let base = make_rng(85);
        let reps = 300;
        let mut hits = [0usize; 6];
        for rep in 0..reps {
            let rng = base.substream(rep);
            let ys = sample_beta_vec(&mut rng.substream(0), 20.0, 20.0, 300).unwrap();
            let ev = BettingDesign::draw(300, 20, &rng)
                .unwrap()
                .evidence(&ys, 0.5, 0.05, &ApproxKelly, true)
                .unwrap();
            for (i, rule) in BettingRule::ALL.into_iter().enumerate() {
                hits[i] += ev.decide(rule, 0.05).unwrap().reject as usize;
            }
        }
        let se = (0.05f64 * 0.95 / reps as f64).sqrt();
        for (rule, h) in BettingRule::ALL.iter().zip(hits) {
            assert!((h as f64 / reps as f64) <= 0.05 + 3.0 * se, "{rule}: {h}");
        }
    }

    #[test]
    fn strong_signal_is_detected() {
        let rng = make_rng(86);
        let ys = sample_beta_vec(&mut rng.substream(0), 20.0, 15.0, 1000).unwrap();
        for rule in BettingRule::ALL {
            assert!(
                betting_reject(&ys, 0.5, 0.05, 10, &rng, rule)
                    .unwrap()
                    .reject,
                "{rule}"
            );
        }
    }

    #[test]
    fn ci_examples() {
        let rng = make_rng(87);
        let ys = vec![0.5; 100];
        let ci = invert_mean_ci(&ys, 0.05, 0.05, 5, &rng, BettingRule::UMI).unwrap();
        assert!(ci.contains(0.5));
        assert!(invert_mean_ci(&ys, 0.05, 0.2, 5, &rng, BettingRule::UMI).is_err());

        let ys = sample_beta_vec(&mut rng.substream(0), 20.0, 20.0, 300).unwrap();
        for _ in 0..3 {
            let umi = invert_mean_ci(&ys, 0.05, 0.02, 10, &rng, BettingRule::UMI).unwrap();
            let av = invert_mean_ci(&ys, 0.05, 0.02, 10, &rng, BettingRule::AvMI).unwrap();
            assert!(umi.empty || (umi.lower >= av.lower && umi.upper <= av.upper));
        }
    }

    #[test]
    fn ci_coverage() {
        let base = make_rng(88);
        let reps = 200;
        let mut covered = 0;
        for rep in 0..reps {
            let rng = base.substream(rep);
            let ys = sample_beta_vec(&mut rng.substream(0), 20.0, 20.0, 200).unwrap();
            covered += invert_mean_ci(&ys, 0.05, 0.02, 10, &rng, BettingRule::UMI)
                .unwrap()
                .contains(0.5) as usize;
        }
        let se = (0.05f64 * 0.95 / reps as f64).sqrt();
        assert!(covered as f64 / reps as f64 >= 0.95 - 3.0 * se);
    }
}
