//! Combining several e-values for the same null.
//!
//! [`combine_dependent`] covers arbitrarily dependent e-values: the plain
//! average with Markov (AvMI), the randomized threshold (UMI), running
//! averages along a permutation (EMI) and their combination (EUMI). Each rule
//! also yields a p-value. The m-way rules in [`mway_reject`] apply when every
//! m-subset of the e-values is jointly independent.

use std::fmt;

use crate::error::{check_alpha, check_nonnegative, check_u, Error, Result};
use crate::markov::{emi_reject, eumi_reject, mean, mi_reject, umi_reject, Decision, RunningMeans};
use crate::rng::{Permutation, RngStream};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CombinationRule {
    AvMI,
    UMI,
    EMI,
    EUMI,
    MwayUstatMI,
    MwayUstatUMI,
    MwaySequentialEMI,
}

impl CombinationRule {
    pub const DEPENDENT: [CombinationRule; 4] = [Self::AvMI, Self::UMI, Self::EMI, Self::EUMI];

    pub fn name(self) -> &'static str {
        match self {
            Self::AvMI => "AvMI",
            Self::UMI => "UMI",
            Self::EMI => "EMI",
            Self::EUMI => "EUMI",
            Self::MwayUstatMI => "mway_ustat_MI",
            Self::MwayUstatUMI => "mway_ustat_UMI",
            Self::MwaySequentialEMI => "mway_sequential_EMI",
        }
    }
}

impl fmt::Display for CombinationRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

fn check_evalues(es: &[f64]) -> Result<()> {
    if es.is_empty() {
        return Err(Error::EmptyInput("e-values"));
    }
    es.iter()
        .try_for_each(|&e| check_nonnegative("e-value", e).map(|_| ()))
}

fn inverse_or_one(x: f64) -> f64 {
    if x > 0.0 {
        (1.0 / x).min(1.0)
    } else {
        1.0
    }
}

/// Applies one of the four dependent-e-value rules and returns the decision
/// together with the rule's p-value.
///
/// `pi` orders the e-values for the EMI and EUMI rules: the identity when the
/// caller knows them to be exchangeable, a uniformly random permutation
/// otherwise. AvMI and UMI ignore it.
pub fn combine_dependent(
    es: &[f64],
    alpha: f64,
    u: f64,
    pi: &Permutation,
    rule: CombinationRule,
) -> Result<(Decision, f64)> {
    check_alpha(alpha)?;
    check_u(u)?;
    check_evalues(es)?;
    if pi.len() != es.len() {
        return Err(Error::InvalidCount {
            name: "permutation length",
            value: pi.len(),
            expected: "the number of e-values",
        });
    }
    match rule {
        CombinationRule::AvMI => {
            let avg = mean(es);
            Ok((mi_reject(avg, alpha)?, inverse_or_one(avg)))
        }
        CombinationRule::UMI => {
            let avg = mean(es);
            let p = if avg > 0.0 { (u / avg).min(1.0) } else { 1.0 };
            Ok((umi_reject(avg, alpha, u)?, p))
        }
        CombinationRule::EMI => {
            let ordered = pi.apply(es);
            let best = max_running_mean(&ordered);
            Ok((emi_reject(&ordered, alpha)?, inverse_or_one(best)))
        }
        CombinationRule::EUMI => {
            let ordered = pi.apply(es);
            let best = max_running_mean(&ordered);
            let first = if ordered[0] > 0.0 {
                u / ordered[0]
            } else {
                f64::INFINITY
            };
            let p = inverse_or_one(best).min(first).min(1.0);
            Ok((eumi_reject(&ordered, alpha, u)?, p))
        }
        _ => Err(Error::RuleArity {
            rule: rule.name(),
            expected: "a dependent-e-value rule (AvMI, UMI, EMI, EUMI)",
            got: es.len(),
        }),
    }
}

fn max_running_mean(xs: &[f64]) -> f64 {
    RunningMeans::new(xs.iter().copied()).fold(0.0, f64::max)
}

/// Average over all size-`m` subsets of the product of their e-values.
///
/// Computed exactly in `O(K m)` through the normalized elementary symmetric
/// recursion `A_j(k) = (k-j)/k A_j(k-1) + j/k x_k A_{j-1}(k-1)`, which never
/// forms the binomial coefficient and so has no size limit.
pub fn mway_ustat(es: &[f64], m: usize) -> Result<f64> {
    check_evalues(es)?;
    if m == 0 || m > es.len() {
        return Err(Error::InvalidCount {
            name: "m",
            value: m,
            expected: "1 <= m <= K",
        });
    }
    let mut avg = vec![0.0; m + 1];
    avg[0] = 1.0;
    for (idx, &x) in es.iter().enumerate() {
        let k = (idx + 1) as f64;
        for j in (1..=m.min(idx + 1)).rev() {
            let jf = j as f64;
            let keep = if j == idx + 1 {
                0.0
            } else {
                (k - jf) / k * avg[j]
            };
            avg[j] = keep + jf / k * x * avg[j - 1];
        }
    }
    Ok(avg[m])
}

/// m-way independent e-value rules.
///
/// - `MwayUstatMI`: reject iff [`mway_ustat`] `>= 1/alpha`.
/// - `MwayUstatUMI`: reject iff it is `>= u/alpha`.
/// - `MwaySequentialEMI`: draw size-`m` subsets uniformly with replacement,
///   one at a time, and reject at the first `b <= max_draws` whose running
///   average of subset products reaches `1/alpha`.
pub fn mway_reject(
    es: &[f64],
    m: usize,
    alpha: f64,
    u: f64,
    rng: &mut RngStream,
    rule: CombinationRule,
    max_draws: usize,
) -> Result<Decision> {
    check_alpha(alpha)?;
    match rule {
        CombinationRule::MwayUstatMI => mi_reject(mway_ustat(es, m)?, alpha),
        CombinationRule::MwayUstatUMI => umi_reject(mway_ustat(es, m)?, alpha, u),
        CombinationRule::MwaySequentialEMI => {
            check_evalues(es)?;
            if m == 0 || m > es.len() {
                return Err(Error::InvalidCount {
                    name: "m",
                    value: m,
                    expected: "1 <= m <= K",
                });
            }
            if max_draws == 0 {
                return Err(Error::InvalidCount {
                    name: "max_draws",
                    value: max_draws,
                    expected: "max_draws >= 1",
                });
            }
            let threshold = 1.0 / alpha;
            let mut idx: Vec<usize> = (0..es.len()).collect();
            let products = (0..max_draws).map(|_| {
                // partial Fisher-Yates: the first m slots become a uniform m-subset
                for i in 0..m {
                    let j = i + rng.below(es.len() - i);
                    idx.swap(i, j);
                }
                idx[..m].iter().map(|&i| es[i]).product::<f64>()
            });
            Ok(
                match RunningMeans::new(products).position(|avg| avg >= threshold) {
                    Some(b) => Decision::reject_at(Some(b + 1), None),
                    None => Decision::accept(None),
                },
            )
        }
        _ => Err(Error::RuleArity {
            rule: rule.name(),
            expected: "an m-way rule",
            got: es.len(),
        }),
    }
}
