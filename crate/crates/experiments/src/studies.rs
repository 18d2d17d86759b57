//! The four simulation studies. Each replication derives all of its
//! randomness from its own substream: data from label 0, permutations or
//! splits from label 1 and the uniform `u` from label 2, so every method in a
//! replication sees the same data, `u` and permutations.

use rayon::prelude::*;

use randmarkov::betting::{ApproxKelly, BettingDesign, BettingRule};
use randmarkov::evalues::{combine_dependent, CombinationRule};
use randmarkov::markov::mean;
use randmarkov::rng::{random_permutation, sample_ar1_toeplitz, sample_beta_vec, RngStream};
use randmarkov::tail_bounds::{exact_z_ci, hoeffding_ci, ConfidenceInterval};
use randmarkov::universal_inference::{
    goffinet_lrt_reject, sample_mixture, subsampled_split_evalues, ui_reject, UiRule,
    DEFAULT_SPLIT_FRAC, DEFAULT_W1,
};

use crate::config::ExperimentConfig;
use crate::error::Result;
use crate::rows::ResultRow;

/// Evaluates `rep_fn` over every (grid point, replication) pair in parallel
/// and returns the rows in grid-major, replication-minor order.
pub fn run_grid<G, F>(
    grid: &[G],
    reps: usize,
    stream: &RngStream,
    rep_fn: F,
) -> Result<Vec<ResultRow>>
where
    G: Sync,
    F: Fn(&G, usize, RngStream) -> Result<Vec<ResultRow>> + Sync,
{
    let tasks: Vec<(usize, usize)> = (0..grid.len())
        .flat_map(|g| (0..reps).map(move |r| (g, r)))
        .collect();
    let chunks = tasks
        .par_iter()
        .map(|&(g, r)| rep_fn(&grid[g], r, rep_stream(stream, g, r)))
        .collect::<Result<Vec<_>>>()?;
    Ok(chunks.into_iter().flatten().collect())
}

/// `stream / grid index / replication index`.
pub fn rep_stream(stream: &RngStream, grid_index: usize, rep: usize) -> RngStream {
    stream.substream(grid_index as u64).substream(rep as u64)
}

/// Hoeffding, randomized Hoeffding and exact normal intervals for the mean
/// of `n` standard normal draws.
pub fn gaussian_ci_rep(n: usize, alpha: f64, rng: &RngStream) -> Result<[ConfidenceInterval; 3]> {
    let mut data_rng = rng.substream(0);
    let xbar = (0..n).map(|_| data_rng.standard_normal()).sum::<f64>() / n as f64;
    let u = rng.substream(2).uniform01();
    Ok([
        hoeffding_ci(xbar, 1.0, n, alpha, None, false)?,
        hoeffding_ci(xbar, 1.0, n, alpha, Some(u), false)?,
        exact_z_ci(xbar, 1.0, n, alpha)?,
    ])
}

pub fn run_gaussian_ci(cfg: &ExperimentConfig, stream: &RngStream) -> Result<Vec<ResultRow>> {
    run_grid(&cfg.n_grid, cfg.reps, stream, |&n, rep, rng| {
        Ok(gaussian_ci_rep(n, cfg.alpha, &rng)?
            .iter()
            .map(|ci| ResultRow::GaussianCi {
                method: ci.method.to_string(),
                n,
                rep,
                bounds: (!ci.empty).then_some((ci.lower, ci.upper)),
                covered: ci.contains(0.0),
                width: ci.width(),
            })
            .collect())
    })
}

/// `K` e-values `exp(X_j - 1/2)` from an AR(1) Gaussian vector with mean `mu`
/// and correlation `rho^|i-j|`, combined by the four dependent rules.
pub fn evalue_rep(mu: f64, rho: f64, k: usize, alpha: f64, rng: &RngStream) -> Result<[bool; 4]> {
    let x = sample_ar1_toeplitz(&mut rng.substream(0), k, rho, mu)?;
    let es: Vec<f64> = x.iter().map(|v| (v - 0.5).exp()).collect();
    let pi = random_permutation(&mut rng.substream(1), k)?;
    let u = rng.substream(2).uniform01();
    let mut out = [false; 4];
    for (slot, rule) in out.iter_mut().zip(CombinationRule::DEPENDENT) {
        *slot = combine_dependent(&es, alpha, u, &pi, rule)?.0.reject;
    }
    Ok(out)
}

pub fn run_evalue_power(cfg: &ExperimentConfig, stream: &RngStream) -> Result<Vec<ResultRow>> {
    let grid: Vec<(f64, f64)> = cfg
        .mu_grid
        .iter()
        .flat_map(|&mu| cfg.rho_grid.iter().map(move |&rho| (mu, rho)))
        .collect();
    run_grid(&grid, cfg.reps, stream, |&(mu, rho), rep, rng| {
        let decisions = evalue_rep(mu, rho, cfg.k, cfg.alpha, &rng)?;
        Ok(CombinationRule::DEPENDENT
            .iter()
            .zip(decisions)
            .map(|(rule, reject)| ResultRow::EvaluePower {
                method: rule.to_string(),
                k: cfg.k,
                rho,
                mu,
                rep,
                reject,
            })
            .collect())
    })
}

/// Names of the mixture-study tests in output order.
pub const UI_METHODS: [&str; 7] = [
    "LRT", "UI", "UMI-UI", "SUI", "UMI-SUI", "EMI-SUI", "EUMI-SUI",
];

/// Decisions of one mixture replication.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct UiOutcome {
    /// In the order of [`UI_METHODS`].
    pub tests: [bool; 7],
    /// UMI-UI on the first split with the rank of its last evaluation point
    /// in place of `u`.
    pub rank_ui: bool,
}

/// Mixture sample with `mu2 = -mu1 = mu`, tested by the likelihood-ratio
/// benchmark and the six universal-inference rules. The single-split rules
/// use the first of the `b_count` splits.
pub fn ui_rep(mu: f64, n: usize, b_count: usize, alpha: f64, rng: &RngStream) -> Result<UiOutcome> {
    let data = sample_mixture(&mut rng.substream(0), n, DEFAULT_W1, -mu, mu)?;
    let splits = subsampled_split_evalues(&data, DEFAULT_SPLIT_FRAC, b_count, &rng.substream(1))?;
    let es: Vec<f64> = splits.iter().map(|e| e.value).collect();
    let u = rng.substream(2).uniform01();
    let mut tests = [false; 7];
    tests[0] = goffinet_lrt_reject(&data, alpha)?.reject;
    for (slot, rule) in tests[1..].iter_mut().zip(UiRule::ALL) {
        let input = if matches!(rule, UiRule::UI | UiRule::UmiUi) {
            &es[..1]
        } else {
            &es[..]
        };
        *slot = ui_reject(input, alpha, u, rule)?.reject;
    }
    let rank_ui = ui_reject(&es[..1], alpha, splits[0].rank_u, UiRule::UmiUi)?.reject;
    Ok(UiOutcome { tests, rank_ui })
}

pub fn run_ui_power(cfg: &ExperimentConfig, stream: &RngStream) -> Result<Vec<ResultRow>> {
    run_grid(&cfg.mu_grid, cfg.reps, stream, |&mu, rep, rng| {
        let decisions = ui_rep(mu, cfg.ui_n, cfg.b_count, cfg.alpha, &rng)?.tests;
        Ok(UI_METHODS
            .iter()
            .zip(decisions)
            .map(|(m, reject)| ResultRow::UiPower {
                method: m.to_string(),
                mu,
                n: cfg.ui_n,
                rep,
                reject,
            })
            .collect())
    })
}

/// `Beta(20, b)` sample tested for mean 1/2 by the six betting rules on one
/// shared design.
pub fn betting_rep(
    b: f64,
    n: usize,
    b_count: usize,
    alpha: f64,
    rng: &RngStream,
) -> Result<[bool; 6]> {
    let data = sample_beta_vec(&mut rng.substream(0), 20.0, b, n)?;
    let evidence =
        BettingDesign::draw(n, b_count, rng)?.evidence(&data, 0.5, alpha, &ApproxKelly, true)?;
    let mut out = [false; 6];
    for (slot, rule) in out.iter_mut().zip(BettingRule::ALL) {
        *slot = evidence.decide(rule, alpha)?.reject;
    }
    Ok(out)
}

pub fn run_betting_power(cfg: &ExperimentConfig, stream: &RngStream) -> Result<Vec<ResultRow>> {
    let grid: Vec<(f64, usize)> = cfg
        .b_grid
        .iter()
        .flat_map(|&b| cfg.n_grid.iter().map(move |&n| (b, n)))
        .collect();
    run_grid(&grid, cfg.reps, stream, |&(b, n), rep, rng| {
        let decisions = betting_rep(b, n, cfg.b_count, cfg.alpha, &rng)?;
        Ok(BettingRule::ALL
            .iter()
            .zip(decisions)
            .map(|(rule, reject)| ResultRow::BettingPower {
                method: rule.to_string(),
                b,
                n,
                rep,
                reject,
            })
            .collect())
    })
}

/// Mean of the 0/1 outcome per method, in first-seen order.
pub fn method_means(rows: &[ResultRow]) -> Vec<(String, f64)> {
    let mut names: Vec<String> = Vec::new();
    let mut hits: Vec<Vec<f64>> = Vec::new();
    for row in rows {
        let idx = match names.iter().position(|m| m == row.method()) {
            Some(i) => i,
            None => {
                names.push(row.method().to_string());
                hits.push(Vec::new());
                names.len() - 1
            }
        };
        hits[idx].push(row.indicator() as u8 as f64);
    }
    names
        .into_iter()
        .zip(hits.iter().map(|h| mean(h)))
        .collect()
}
