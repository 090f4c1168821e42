//! Seeded, splittable random sampling.
//!
//! Every replication of an experiment owns one [`SimRng`], built from a
//! [`SeedSpec`]. Seeds form a tree: [`SeedSpec::derive_stream`] produces a
//! child that is a pure function of the parent and an index, so parallel
//! replications never share generator state and results do not depend on
//! scheduling.
//!
//! The generator is ChaCha8 keyed by `master_seed` with the ChaCha stream
//! counter set to `stream_id`. Samplers avoid lookup tables: normals come
//! from the Marsaglia polar method, exponentials from inversion.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on the total mass of a probability vector.
pub const PROB_SUM_TOL: f64 = 1e-12;

const TWO_POW_NEG_53: f64 = 1.0 / (1u64 << 53) as f64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SeedSpec {
    pub master_seed: u64,
    pub stream_id: u64,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl SeedSpec {
    /// Root seed of an experiment.
    pub fn new(master_seed: u64) -> Self {
        SeedSpec {
            master_seed,
            stream_id: 0,
        }
    }

    /// Child seed number `k`. Children of one parent share a ChaCha key and
    /// differ in the stream counter, so they are distinct for distinct `k`.
    pub fn derive_stream(&self, k: u64) -> SeedSpec {
        SeedSpec {
            master_seed: splitmix64(self.master_seed ^ splitmix64(self.stream_id)),
            stream_id: k,
        }
    }

    pub fn rng(&self) -> SimRng {
        SimRng::from_seed_spec(*self)
    }
}

/// Free-function form of [`SeedSpec::derive_stream`].
pub fn derive_stream(seed: SeedSpec, k: u64) -> SeedSpec {
    seed.derive_stream(k)
}

/// Simulation generator. Keeps a buffer of random bits for fair coin flips,
/// which is what most lattice walk steps consume.
#[derive(Debug, Clone)]
pub struct SimRng {
    inner: ChaCha8Rng,
    bits: u64,
    nbits: u32,
    spare_normal: Option<f64>,
}

impl SimRng {
    pub fn from_seed_spec(seed: SeedSpec) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed.master_seed);
        inner.set_stream(seed.stream_id);
        SimRng {
            inner,
            bits: 0,
            nbits: 0,
            spare_normal: None,
        }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// One fair coin flip drawn from the bit buffer.
    #[inline]
    pub fn coin(&mut self) -> bool {
        if self.nbits == 0 {
            self.bits = self.inner.next_u64();
            self.nbits = 64;
        }
        let b = self.bits & 1 == 1;
        self.bits >>= 1;
        self.nbits -= 1;
        b
    }

    /// The next 64 coin flips, in the same order [`SimRng::coin`] would
    /// return them (lowest bit first).
    #[inline]
    pub fn coins64(&mut self) -> u64 {
        if self.nbits == 0 {
            return self.inner.next_u64();
        }
        let fresh = self.inner.next_u64();
        let out = self.bits | (fresh << self.nbits);
        self.bits = fresh >> (64 - self.nbits);
        out
    }

    /// Uniform on [0, 1) with 53 random bits.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        (self.inner.next_u64() >> 11) as f64 * TWO_POW_NEG_53
    }

    /// Uniform on (0, 1).
    #[inline]
    pub fn uniform_open(&mut self) -> f64 {
        ((self.inner.next_u64() >> 11) as f64 + 0.5) * TWO_POW_NEG_53
    }

    pub fn standard_normal(&mut self) -> f64 {
        if let Some(z) = self.spare_normal.take() {
            return z;
        }
        loop {
            let u = 2.0 * self.uniform() - 1.0;
            let v = 2.0 * self.uniform() - 1.0;
            let s = u * u + v * v;
            if s > 0.0 && s < 1.0 {
                let f = (-2.0 * s.ln() / s).sqrt();
                self.spare_normal = Some(v * f);
                return u * f;
            }
        }
    }

    pub fn exponential(&mut self, rate: f64) -> f64 {
        -self.uniform_open().ln() / rate
    }

    #[inline]
    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.uniform() < p
    }
}

pub fn sample_uniform(rng: &mut SimRng) -> f64 {
    rng.uniform()
}

pub fn sample_standard_normal(rng: &mut SimRng) -> f64 {
    rng.standard_normal()
}

pub fn sample_exponential(rate: f64, rng: &mut SimRng) -> Result<f64> {
    if !(rate > 0.0 && rate.is_finite()) {
        return Err(Error::invalid(format!("exponential rate must be positive, got {rate}")));
    }
    Ok(rng.exponential(rate))
}

pub fn sample_bernoulli(p: f64, rng: &mut SimRng) -> Result<bool> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::invalid(format!("bernoulli probability {p} outside [0,1]")));
    }
    Ok(rng.bernoulli(p))
}

/// Standard one-sided stable-1/2 (Lévy) draw, `1 / Z^2` with `Z` standard
/// normal. Its CDF is `erfc(1 / sqrt(2x))`.
pub fn sample_levy_stable_half(rng: &mut SimRng) -> f64 {
    loop {
        let z = rng.standard_normal();
        if z != 0.0 {
            return 1.0 / (z * z);
        }
    }
}

/// A validated categorical law on `1..=N`.
#[derive(Debug, Clone, PartialEq)]
pub struct Categorical {
    probs: Vec<f64>,
    cumulative: Vec<f64>,
}

impl Categorical {
    pub fn new(probs: &[f64]) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::invalid("probability vector is empty"));
        }
        if let Some(p) = probs.iter().find(|p| !(**p >= 0.0) || !p.is_finite()) {
            return Err(Error::invalid(format!("negative or non-finite probability {p}")));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > PROB_SUM_TOL {
            return Err(Error::invalid(format!(
                "probabilities sum to {total}, not 1"
            )));
        }
        let mut acc = 0.0;
        let cumulative = probs
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        Ok(Categorical {
            probs: probs.to_vec(),
            cumulative,
        })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// 1-based index `j` drawn with probability `probs[j-1]`.
    #[inline]
    pub fn sample(&self, rng: &mut SimRng) -> usize {
        let u = rng.uniform();
        // The last bin absorbs rounding in the running sum; zero-mass bins
        // are skipped so they are never returned.
        let n = self.cumulative.len();
        for (i, &c) in self.cumulative.iter().enumerate() {
            if u < c && self.probs[i] > 0.0 {
                return i + 1;
            }
        }
        (0..n).rev().find(|&i| self.probs[i] > 0.0).unwrap_or(n - 1) + 1
    }
}

pub fn sample_categorical(probs: &[f64], rng: &mut SimRng) -> Result<usize> {
    Ok(Categorical::new(probs)?.sample(rng))
}
