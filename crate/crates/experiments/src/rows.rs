//! One CSV row per (method, grid point, replication).

use std::io::{Read, Write};

use csv::StringRecord;

use crate::config::{round_sig, ExperimentId};
use crate::error::{HarnessError, Result};

/// Marker written in place of the bounds of an empty interval.
pub const EMPTY: &str = "EMPTY";

#[derive(Debug, Clone, PartialEq)]
pub enum ResultRow {
    GaussianCi {
        method: String,
        n: usize,
        rep: usize,
        /// `None` for the empty interval.
        bounds: Option<(f64, f64)>,
        covered: bool,
        width: f64,
    },
    EvaluePower {
        method: String,
        k: usize,
        rho: f64,
        mu: f64,
        rep: usize,
        reject: bool,
    },
    UiPower {
        method: String,
        mu: f64,
        n: usize,
        rep: usize,
        reject: bool,
    },
    BettingPower {
        method: String,
        b: f64,
        n: usize,
        rep: usize,
        reject: bool,
    },
}

/// Shortest decimal form of `x` rounded to 12 significant digits.
pub fn format_number(x: f64) -> String {
    format!("{}", round_sig(x, 12))
}

fn flag(b: bool) -> String {
    (if b { "1" } else { "0" }).to_string()
}

impl ResultRow {
    pub fn experiment(&self) -> ExperimentId {
        match self {
            Self::GaussianCi { .. } => ExperimentId::GaussianCi,
            Self::EvaluePower { .. } => ExperimentId::EvaluePower,
            Self::UiPower { .. } => ExperimentId::UiPower,
            Self::BettingPower { .. } => ExperimentId::BettingPower,
        }
    }

    pub fn method(&self) -> &str {
        match self {
            Self::GaussianCi { method, .. }
            | Self::EvaluePower { method, .. }
            | Self::UiPower { method, .. }
            | Self::BettingPower { method, .. } => method,
        }
    }

    pub fn rep(&self) -> usize {
        match *self {
            Self::GaussianCi { rep, .. }
            | Self::EvaluePower { rep, .. }
            | Self::UiPower { rep, .. }
            | Self::BettingPower { rep, .. } => rep,
        }
    }

    /// The 0/1 outcome: coverage for intervals, rejection otherwise.
    pub fn indicator(&self) -> bool {
        match *self {
            Self::GaussianCi { covered, .. } => covered,
            Self::EvaluePower { reject, .. }
            | Self::UiPower { reject, .. }
            | Self::BettingPower { reject, .. } => reject,
        }
    }

    pub fn to_record(&self) -> Vec<String> {
        match self {
            Self::GaussianCi {
                method,
                n,
                rep,
                bounds,
                covered,
                width,
            } => {
                let (lo, hi) = match bounds {
                    Some((l, u)) => (format_number(*l), format_number(*u)),
                    None => (EMPTY.into(), EMPTY.into()),
                };
                vec![
                    method.clone(),
                    n.to_string(),
                    rep.to_string(),
                    lo,
                    hi,
                    flag(*covered),
                    format_number(*width),
                    flag(bounds.is_none()),
                ]
            }
            Self::EvaluePower {
                method,
                k,
                rho,
                mu,
                rep,
                reject,
            } => vec![
                method.clone(),
                k.to_string(),
                format_number(*rho),
                format_number(*mu),
                rep.to_string(),
                flag(*reject),
            ],
            Self::UiPower {
                method,
                mu,
                n,
                rep,
                reject,
            } => vec![
                method.clone(),
                format_number(*mu),
                n.to_string(),
                rep.to_string(),
                flag(*reject),
            ],
            Self::BettingPower {
                method,
                b,
                n,
                rep,
                reject,
            } => vec![
                method.clone(),
                format_number(*b),
                n.to_string(),
                rep.to_string(),
                flag(*reject),
            ],
        }
    }

    pub fn from_record(experiment: ExperimentId, rec: &StringRecord) -> Result<Self> {
        let line = rec.position().map_or(0, |p| p.line());
        let err = |message: String| HarnessError::Parse { line, message };
        let want = experiment.header().len();
        if rec.len() != want {
            return Err(err(format!("expected {want} fields, found {}", rec.len())));
        }
        let field = |i: usize| &rec[i];
        let num = |i: usize| -> Result<f64> {
            let v: f64 = field(i).parse().map_err(|_| {
                err(format!(
                    "{}: not a number: '{}'",
                    experiment.header()[i],
                    field(i)
                ))
            })?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(err(format!("{}: not finite", experiment.header()[i])))
            }
        };
        let count = |i: usize| -> Result<usize> {
            field(i).parse().map_err(|_| {
                err(format!(
                    "{}: not a count: '{}'",
                    experiment.header()[i],
                    field(i)
                ))
            })
        };
        let bit = |i: usize| -> Result<bool> {
            match field(i) {
                "0" => Ok(false),
                "1" => Ok(true),
                other => Err(err(format!(
                    "{}: expected 0 or 1, found '{other}'",
                    experiment.header()[i]
                ))),
            }
        };
        let method = field(0).to_string();
        Ok(match experiment {
            ExperimentId::GaussianCi => {
                let empty = bit(7)?;
                let bounds = if empty {
                    if field(3) != EMPTY || field(4) != EMPTY {
                        return Err(err("empty interval must have EMPTY bounds".into()));
                    }
                    None
                } else {
                    Some((num(3)?, num(4)?))
                };
                Self::GaussianCi {
                    method,
                    n: count(1)?,
                    rep: count(2)?,
                    bounds,
                    covered: bit(5)?,
                    width: num(6)?,
                }
            }
            ExperimentId::EvaluePower => Self::EvaluePower {
                method,
                k: count(1)?,
                rho: num(2)?,
                mu: num(3)?,
                rep: count(4)?,
                reject: bit(5)?,
            },
            ExperimentId::UiPower => Self::UiPower {
                method,
                mu: num(1)?,
                n: count(2)?,
                rep: count(3)?,
                reject: bit(4)?,
            },
            ExperimentId::BettingPower => Self::BettingPower {
                method,
                b: num(1)?,
                n: count(2)?,
                rep: count(3)?,
                reject: bit(4)?,
            },
        })
    }
}

pub fn write_rows<W: Write>(experiment: ExperimentId, rows: &[ResultRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(experiment.header())?;
    for row in rows {
        debug_assert_eq!(row.experiment(), experiment);
        w.write_record(row.to_record())?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn read_rows<R: Read>(experiment: ExperimentId, input: R) -> Result<Vec<ResultRow>> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers()?.clone();
    if header.iter().ne(experiment.header().iter().copied()) {
        return Err(HarnessError::Parse {
            line: 1,
            message: format!("expected header {}", experiment.header().join(",")),
        });
    }
    r.records()
        .map(|rec| ResultRow::from_record(experiment, &rec?))
        .collect()
}
