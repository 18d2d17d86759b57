//! Experiment configuration: per-study defaults, a flat `key = value` file
//! format and validation.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ExperimentId {
    GaussianCi,
    EvaluePower,
    UiPower,
    BettingPower,
}

impl ExperimentId {
    pub const ALL: [ExperimentId; 4] = [
        Self::GaussianCi,
        Self::EvaluePower,
        Self::UiPower,
        Self::BettingPower,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::GaussianCi => "gaussian_ci",
            Self::EvaluePower => "evalue_power",
            Self::UiPower => "ui_power",
            Self::BettingPower => "betting_power",
        }
    }

    /// Substream label under the base seed.
    pub fn label(self) -> u64 {
        match self {
            Self::GaussianCi => 1,
            Self::EvaluePower => 2,
            Self::UiPower => 3,
            Self::BettingPower => 4,
        }
    }

    pub fn file_name(self) -> String {
        format!("{}.csv", self.name())
    }

    pub fn header(self) -> &'static [&'static str] {
        match self {
            Self::GaussianCi => &[
                "method",
                "n",
                "rep",
                "lower",
                "upper",
                "covered",
                "width",
                "empty_flag",
            ],
            Self::EvaluePower => &["method", "K", "rho", "mu", "rep", "reject"],
            Self::UiPower => &["method", "mu", "n", "rep", "reject"],
            Self::BettingPower => &["method", "b", "n", "rep", "reject"],
        }
    }

    fn desk_reps(self) -> usize {
        match self {
            Self::GaussianCi => 2000,
            Self::BettingPower => 200,
            _ => 500,
        }
    }

    fn paper_reps(self) -> usize {
        match self {
            Self::GaussianCi => 20_000,
            _ => 500,
        }
    }
}

impl fmt::Display for ExperimentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentId {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|id| id.name() == s)
            .ok_or_else(|| HarnessError::config("experiment", format!("unknown experiment '{s}'")))
    }
}

/// `count` equally spaced points from `lo` to `hi`, rounded to 12
/// significant digits so that e.g. `20` appears exactly in `19..=20.8`.
pub fn linspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..count)
            .map(|i| round_sig(lo + (hi - lo) * i as f64 / (count - 1) as f64, 12))
            .collect(),
    }
}

pub(crate) fn round_sig(x: f64, digits: usize) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{:.*e}", digits - 1, x)
        .parse()
        .expect("formatted float parses")
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: ExperimentId,
    pub alpha: f64,
    pub reps: usize,
    /// Number of e-values, splits or permutations combined per replication.
    pub b_count: usize,
    /// Sample sizes for the interval and betting studies.
    pub n_grid: Vec<usize>,
    /// True means: of the Gaussians behind the e-values, or `mu2 = -mu1` of
    /// the mixture.
    pub mu_grid: Vec<f64>,
    pub rho_grid: Vec<f64>,
    /// Second Beta shape parameter; the first is 20.
    pub b_grid: Vec<f64>,
    /// Number of e-values in the e-value study.
    pub k: usize,
    /// Sample size of the mixture study.
    pub ui_n: usize,
    pub base_seed: u64,
    pub out_dir: PathBuf,
}

impl ExperimentConfig {
    /// Desk-scale defaults for one study.
    pub fn new(experiment: ExperimentId) -> Self {
        let n_grid = linspace(100.0, 2000.0, 10)
            .into_iter()
            .map(|n| n.round() as usize)
            .collect();
        let mu_grid = match experiment {
            ExperimentId::UiPower => {
                let mut g = linspace(0.0, 1.0, 10);
                g.push(0.8);
                g.sort_by(f64::total_cmp);
                g
            }
            _ => linspace(0.0, 4.0, 10),
        };
        Self {
            experiment,
            alpha: 0.05,
            reps: experiment.desk_reps(),
            b_count: 100,
            n_grid,
            mu_grid,
            rho_grid: linspace(0.0, 1.0, 10),
            b_grid: linspace(19.0, 20.8, 10),
            k: 100,
            ui_n: 500,
            base_seed: 42,
            out_dir: PathBuf::from("results"),
        }
    }

    pub fn output_path(&self) -> PathBuf {
        self.out_dir.join(self.experiment.file_name())
    }

    /// Applies overrides on top of the defaults, then validates.
    pub fn resolve(experiment: ExperimentId, overrides: &Overrides) -> Result<Self> {
        let mut cfg = Self::new(experiment);
        if overrides.paper_scale.unwrap_or(false) {
            cfg.reps = experiment.paper_reps();
        }
        if let Some(v) = overrides.alpha {
            cfg.alpha = v;
        }
        if let Some(v) = overrides.reps {
            cfg.reps = v;
        }
        if let Some(v) = overrides.b_count {
            cfg.b_count = v;
        }
        if let Some(v) = overrides.seed {
            cfg.base_seed = v;
        }
        if let Some(v) = &overrides.out {
            cfg.out_dir = v.clone();
        }
        if let Some(v) = &overrides.n_grid {
            cfg.n_grid = v.clone();
        }
        if let Some(v) = &overrides.mu_grid {
            cfg.mu_grid = v.clone();
        }
        if let Some(v) = &overrides.rho_grid {
            cfg.rho_grid = v.clone();
        }
        if let Some(v) = &overrides.b_grid {
            cfg.b_grid = v.clone();
        }
        if let Some(v) = overrides.k {
            cfg.k = v;
        }
        if let Some(v) = overrides.ui_n {
            cfg.ui_n = v;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |flag: &str, msg: String| Err(HarnessError::config(flag, msg));
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return bad("--alpha", format!("{} is not in (0, 1)", self.alpha));
        }
        if self.experiment == ExperimentId::UiPower && self.alpha >= 0.5 {
            return bad(
                "--alpha",
                format!("{} must be below 0.5 for the LRT benchmark", self.alpha),
            );
        }
        if self.reps == 0 {
            return bad("--reps", "must be at least 1".into());
        }
        if self.b_count == 0 {
            return bad("--b-count", "must be at least 1".into());
        }
        if self.n_grid.is_empty() || self.n_grid.iter().any(|&n| n < 2) {
            return bad("n_grid", "needs at least one sample size, each >= 2".into());
        }
        if self.mu_grid.is_empty() || self.mu_grid.iter().any(|m| !m.is_finite()) {
            return bad("mu_grid", "needs at least one finite value".into());
        }
        if self.rho_grid.is_empty() || self.rho_grid.iter().any(|r| !(0.0..=1.0).contains(r)) {
            return bad(
                "rho_grid",
                "needs at least one value, each in [0, 1]".into(),
            );
        }
        if self.b_grid.is_empty() || self.b_grid.iter().any(|b| !(b.is_finite() && *b > 0.0)) {
            return bad("b_grid", "needs at least one positive value".into());
        }
        if self.k == 0 {
            return bad("k", "must be at least 1".into());
        }
        if self.ui_n < 2 {
            return bad("ui_n", "must be at least 2".into());
        }
        Ok(())
    }
}

/// Optional settings from a config file or the command line.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub alpha: Option<f64>,
    pub reps: Option<usize>,
    pub b_count: Option<usize>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub paper_scale: Option<bool>,
    pub n_grid: Option<Vec<usize>>,
    pub mu_grid: Option<Vec<f64>>,
    pub rho_grid: Option<Vec<f64>>,
    pub b_grid: Option<Vec<f64>>,
    pub k: Option<usize>,
    pub ui_n: Option<usize>,
}

fn parse_value<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| HarnessError::config(key, format!("cannot parse '{value}'")))
}

fn parse_list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    value
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| parse_value(key, s))
        .collect()
}

impl Overrides {
    /// Parses `key = value` lines; `#` starts a comment. Lists are comma
    /// separated.
    pub fn parse(text: &str) -> Result<Self> {
        let mut o = Self::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                HarnessError::config("--config", format!("line {}: expected key = value", i + 1))
            })?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "alpha" => o.alpha = Some(parse_value(key, value)?),
                "reps" => o.reps = Some(parse_value(key, value)?),
                "b_count" | "B" => o.b_count = Some(parse_value(key, value)?),
                "seed" => o.seed = Some(parse_value(key, value)?),
                "out" => o.out = Some(PathBuf::from(value)),
                "paper_scale" => o.paper_scale = Some(parse_value(key, value)?),
                "n_grid" => o.n_grid = Some(parse_list(key, value)?),
                "mu_grid" => o.mu_grid = Some(parse_list(key, value)?),
                "rho_grid" => o.rho_grid = Some(parse_list(key, value)?),
                "b_grid" => o.b_grid = Some(parse_list(key, value)?),
                "k" | "K" => o.k = Some(parse_value(key, value)?),
                "ui_n" => o.ui_n = Some(parse_value(key, value)?),
                other => {
                    return Err(HarnessError::config(
                        "--config",
                        format!("unknown key '{other}'"),
                    ))
                }
            }
        }
        Ok(o)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::config("--config", format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Fields set in `other` win.
    pub fn merged_with(mut self, other: &Overrides) -> Self {
        macro_rules! take {
            ($($f:ident),*) => {$(if other.$f.is_some() { self.$f = other.$f.clone(); })*};
        }
        take!(
            alpha,
            reps,
            b_count,
            seed,
            out,
            paper_scale,
            n_grid,
            mu_grid,
            rho_grid,
            b_grid,
            k,
            ui_n
        );
        self
    }
}
