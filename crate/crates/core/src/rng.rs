//! Deterministic randomness.
//!
//! [`RngStream`] is a SplitMix64 generator that remembers how it was derived
//! (`origin_seed` plus the chain of substream labels). Child streams are
//! derived by avalanche-mixing the parent state with a label, so parallel
//! replications can each own an independent stream without any shared
//! mutable state.
//!
//! The stream implements [`rand::RngCore`], so the well-tested samplers of
//! `rand_distr` (ziggurat normal, Cheng's beta) are used for the continuous
//! laws.

use rand::RngCore;
use rand_distr::{Beta, Distribution, StandardNormal};

use crate::error::{check_positive, Error, Result};

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;
const SUBSTREAM_SALT: u64 = 0x6A09_E667_F3BC_C909;

/// SplitMix64 finalizer (Stafford variant 13).
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seeded random stream with labelled substreams.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RngStream {
    state: u64,
    origin_seed: u64,
    label_path: Vec<u64>,
}

impl RngStream {
    /// Creates a stream from a seed. Every seed, including zero, is valid.
    pub fn new(seed: u64) -> Self {
        Self {
            state: seed,
            origin_seed: seed,
            label_path: Vec::new(),
        }
    }

    /// Derives a child stream from the current state and `label`.
    ///
    /// The parent is not advanced, so calling this twice with the same label
    /// yields identical children.
    pub fn substream(&self, label: u64) -> Self {
        let keyed = mix64(self.state ^ SUBSTREAM_SALT);
        let state = mix64(keyed ^ mix64(label.wrapping_add(GOLDEN_GAMMA)));
        let mut label_path = self.label_path.clone();
        label_path.push(label);
        Self {
            state,
            origin_seed: self.origin_seed,
            label_path,
        }
    }

    pub fn origin_seed(&self) -> u64 {
        self.origin_seed
    }

    pub fn label_path(&self) -> &[u64] {
        &self.label_path
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN_GAMMA);
        mix64(self.state)
    }

    /// Uniform draw strictly inside (0, 1).
    ///
    /// Uses the top 52 bits offset by half a step, so neither endpoint can
    /// occur and `ln(u)` and `1/u` are always finite. (With 53 bits the top
    /// value `2^53 - 1/2` would round up to exactly 1.)
    #[inline]
    pub fn uniform01(&mut self) -> f64 {
        ((self.next_u64() >> 12) as f64 + 0.5) * (1.0 / (1u64 << 52) as f64)
    }

    /// Uniform integer in `0..bound` (Lemire's multiply-shift with rejection).
    #[inline]
    pub fn below(&mut self, bound: usize) -> usize {
        debug_assert!(bound > 0);
        let bound = bound as u64;
        let threshold = bound.wrapping_neg() % bound;
        loop {
            let product = u128::from(self.next_u64()) * u128::from(bound);
            if (product as u64) >= threshold {
                return (product >> 64) as usize;
            }
        }
    }

    /// Standard normal draw.
    #[inline]
    pub fn standard_normal(&mut self) -> f64 {
        StandardNormal.sample(self)
    }

    /// In-place Fisher–Yates shuffle.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.below(i + 1);
            items.swap(i, j);
        }
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        (RngStream::next_u64(self) >> 32) as u32
    }

    fn next_u64(&mut self) -> u64 {
        RngStream::next_u64(self)
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        for chunk in dst.chunks_mut(8) {
            let bytes = RngStream::next_u64(self).to_le_bytes();
            chunk.copy_from_slice(&bytes[..chunk.len()]);
        }
    }
}

/// Seeded stream; equal seeds give equal sequences.
pub fn make_rng(seed: u64) -> RngStream {
    RngStream::new(seed)
}

/// A permutation of `n` items stored 0-based: position `i` of the permuted
/// sequence holds the original item `mapping[i]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Permutation {
    mapping: Vec<usize>,
}

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Self {
            mapping: (0..n).collect(),
        }
    }

    /// Builds a permutation from an explicit 0-based mapping.
    pub fn from_mapping(mapping: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; mapping.len()];
        for &m in &mapping {
            if m >= mapping.len() || seen[m] {
                return Err(Error::InvalidCount {
                    name: "permutation entry",
                    value: m,
                    expected: "a bijection on 0..n",
                });
            }
            seen[m] = true;
        }
        Ok(Self { mapping })
    }

    pub fn len(&self) -> usize {
        self.mapping.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mapping.is_empty()
    }

    pub fn mapping(&self) -> &[usize] {
        &self.mapping
    }

    /// Index of the original item placed at position `i`.
    pub fn at(&self, i: usize) -> usize {
        self.mapping[i]
    }

    /// Returns `xs` reordered by this permutation.
    pub fn apply<T: Copy>(&self, xs: &[T]) -> Vec<T> {
        self.mapping.iter().map(|&i| xs[i]).collect()
    }

    pub fn is_bijection(&self) -> bool {
        Self::from_mapping(self.mapping.clone()).is_ok()
    }
}

/// Uniformly random permutation of `n` items (Fisher–Yates).
pub fn random_permutation(rng: &mut RngStream, n: usize) -> Result<Permutation> {
    if n == 0 {
        return Err(Error::InvalidCount {
            name: "n",
            value: n,
            expected: "n >= 1",
        });
    }
    let mut mapping: Vec<usize> = (0..n).collect();
    rng.shuffle(&mut mapping);
    Ok(Permutation { mapping })
}

pub fn sample_gaussian(rng: &mut RngStream, mu: f64, sigma: f64) -> Result<f64> {
    check_positive("sigma", sigma)?;
    Ok(mu + sigma * rng.standard_normal())
}

pub fn sample_beta(rng: &mut RngStream, a: f64, b: f64) -> Result<f64> {
    Ok(beta_law(a, b)?.sample(rng))
}

/// `n` independent Beta(a, b) draws.
pub fn sample_beta_vec(rng: &mut RngStream, a: f64, b: f64, n: usize) -> Result<Vec<f64>> {
    let law = beta_law(a, b)?;
    Ok((0..n).map(|_| law.sample(rng)).collect())
}

fn beta_law(a: f64, b: f64) -> Result<Beta<f64>> {
    check_positive("a", a)?;
    check_positive("b", b)?;
    Beta::new(a, b).map_err(|_| Error::InvalidParameter {
        name: "a",
        value: a,
        expected: "a valid Beta shape",
    })
}

/// Gaussian vector with mean `mu` and covariance `rho^|i-j|`, drawn through
/// the stationary AR(1) recursion `X_i = rho X_{i-1} + sqrt(1 - rho^2) Z_i`.
pub fn sample_ar1_toeplitz(rng: &mut RngStream, k: usize, rho: f64, mu: f64) -> Result<Vec<f64>> {
    if k == 0 {
        return Err(Error::InvalidCount {
            name: "K",
            value: k,
            expected: "K >= 1",
        });
    }
    if !(0.0..=1.0).contains(&rho) {
        return Err(Error::InvalidParameter {
            name: "rho",
            value: rho,
            expected: "a value in [0, 1]",
        });
    }
    let innovation = (1.0 - rho * rho).sqrt();
    let mut out = Vec::with_capacity(k);
    let mut prev = rng.standard_normal();
    out.push(mu + prev);
    for _ in 1..k {
        prev = if innovation == 0.0 {
            prev
        } else {
            rho * prev + innovation * rng.standard_normal()
        };
        out.push(mu + prev);
    }
    Ok(out)
}

/// Fraction of the bag that is `<= x_last`, a value in `{1/n, ..., 1}`.
///
/// For continuous i.i.d. data the rank of the last observation is uniform on
/// that grid and independent of the unordered bag, so it stochastically
/// dominates a uniform draw and can stand in for an external `u`.
pub fn rank_randomizer(x_last: f64, bag: &[f64]) -> Result<f64> {
    if bag.is_empty() {
        return Err(Error::EmptyInput("bag"));
    }
    let mut at_most = 0usize;
    let mut present = false;
    for &x in bag {
        if x <= x_last {
            at_most += 1;
        }
        present |= x == x_last;
    }
    if !present {
        return Err(Error::NotInBag(x_last));
    }
    Ok(at_most as f64 / bag.len() as f64)
}
