//! Randomized and exchangeable Markov-type inequalities and the tests built
//! on them.
//!
//! The crate is organised bottom-up:
//!
//! - [`rng`]: seeded, splittable random streams and the samplers used by the
//!   simulation harness.
//! - [`markov`]: decision kernels for the plain, uniformly-randomized (UMI),
//!   additively-randomized (AMI), exchangeable (EMI) and combined (EUMI)
//!   Markov rules, e-to-p calibration and a generic randomized tail bound.
//! - [`tail_bounds`]: Hoeffding, Chebyshev, Cantelli, Bernstein and empirical
//!   Bernstein intervals and thresholds, each with a randomized form.
//! - [`ville`]: forward Ville crossing checks, the randomized stopping rule and
//!   a running-average monitor for exchangeable streams.
//! - [`evalues`]: combination rules for dependent and m-way independent
//!   e-values.
//! - [`universal_inference`]: split likelihood-ratio e-values for a
//!   two-component Gaussian mixture and the likelihood-ratio benchmark.
//! - [`betting`]: wealth processes for testing the mean of a bounded variable
//!   and confidence intervals by test inversion.
//!
//! All randomness enters through explicit arguments (`u` draws, permutations,
//! [`rng::RngStream`]s), so every decision is a pure function of its inputs.

pub mod betting;
pub mod error;
pub mod evalues;
pub mod markov;
pub mod rng;
pub mod tail_bounds;
pub mod universal_inference;
pub mod ville;

pub use error::{Error, Result};
pub use markov::Decision;
pub use rng::{Permutation, RngStream};
pub use tail_bounds::ConfidenceInterval;
pub use ville::WealthPath;
