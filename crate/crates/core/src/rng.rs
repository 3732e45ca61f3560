//! Reproducible random streams.
//!
//! A [`RandomStream`] is a `(seed, stream)` pair naming a ChaCha8 keystream.
//! Independent sub-streams are obtained with [`RandomStream::derive`], so a
//! replicate's randomness depends only on its index, never on scheduling.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Largest Poisson mean accepted by [`Sampler::poisson`].
pub const MAX_POISSON_MEAN: f64 = 1e6;

/// Seed and stream identifier of a reproducible random source.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RandomStream {
    pub seed: u64,
    pub stream: u64,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl RandomStream {
    /// Root stream for `seed`.
    pub fn new(seed: u64) -> Self {
        Self { seed, stream: 0 }
    }

    /// Child stream number `index`; distinct indices give independent streams.
    pub fn derive(&self, index: u64) -> Self {
        Self {
            seed: self.seed,
            stream: splitmix64(self.stream ^ splitmix64(index ^ 0xD1B5_4A32_D192_ED03)),
        }
    }

    /// Sampler positioned at the start of this stream.
    pub fn sampler(&self) -> Sampler {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        Sampler { rng }
    }
}

/// Random variate generator attached to a [`RandomStream`].
#[derive(Debug, Clone)]
pub struct Sampler {
    rng: ChaCha8Rng,
}

impl Sampler {
    /// Uniform variate on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    /// Uniform variate on `(0, 1]`.
    pub fn uniform_open0(&mut self) -> f64 {
        1.0 - self.uniform()
    }

    /// Raw 64-bit output.
    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Uniform integer in `0..n` (`n > 0`).
    pub fn below(&mut self, n: usize) -> usize {
        self.rng.random_range(0..n)
    }

    /// Standard normal variate (Box-Muller, one value per call).
    pub fn normal(&mut self) -> f64 {
        let u = self.uniform_open0();
        let v = self.uniform();
        (-2.0 * u.ln()).sqrt() * (core::f64::consts::TAU * v).cos()
    }

    /// Exponential variate with unit mean.
    pub fn exponential(&mut self) -> f64 {
        -self.uniform_open0().ln()
    }

    /// Poisson variate with the given mean, by sequential inversion on
    /// chunks of mean at most 500 (so `exp(-mean)` never underflows).
    pub fn poisson(&mut self, mean: f64) -> Result<usize> {
        if !(mean >= 0.0) || !mean.is_finite() {
            return Err(invalid("Poisson mean must be finite and non-negative"));
        }
        if mean > MAX_POISSON_MEAN {
            return Err(invalid("Poisson mean exceeds 1e6"));
        }
        let chunks = (mean / 500.0).ceil().max(1.0) as usize;
        let lambda = mean / chunks as f64;
        let mut total = 0usize;
        for _ in 0..chunks {
            total += self.poisson_small(lambda);
        }
        Ok(total)
    }

    fn poisson_small(&mut self, lambda: f64) -> usize {
        if lambda == 0.0 {
            return 0;
        }
        let u = self.uniform();
        let mut k = 0usize;
        let mut p = (-lambda).exp();
        let mut cdf = p;
        while u >= cdf {
            k += 1;
            p *= lambda / k as f64;
            let next = cdf + p;
            if next == cdf {
                break;
            }
            cdf = next;
        }
        k
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;

    #[test]
    fn same_stream_same_values() {
        let a: Vec<u64> = {
            let mut s = RandomStream::new(7).derive(3).sampler();
            (0..5).map(|_| s.next_u64()).collect()
        };
        let b: Vec<u64> = {
            let mut s = RandomStream::new(7).derive(3).sampler();
            (0..5).map(|_| s.next_u64()).collect()
        };
        assert_eq!(a, b);
        let mut c = RandomStream::new(7).derive(4).sampler();
        assert_ne!(a[0], c.next_u64());
    }

    #[test]
    fn poisson_moments() {
        for &mean in &[0.5, 30.0, 1234.5] {
            let mut s = RandomStream::new(11).derive(mean as u64).sampler();
            let n = 20_000;
            let xs: Vec<f64> = (0..n).map(|_| s.poisson(mean).unwrap() as f64).collect();
            let m = crate::numeric::mean(&xs);
            let v = crate::numeric::variance(&xs);
            let se = (mean / n as f64).sqrt();
            assert!((m - mean).abs() < 5.0 * se, "mean {m} vs {mean}");
            assert!((v / mean - 1.0).abs() < 0.06, "var {v} vs {mean}");
        }
    }

    #[test]
    fn poisson_rejects_bad_means() {
        let mut s = RandomStream::new(1).sampler();
        assert!(s.poisson(2e6).is_err());
        assert!(s.poisson(-1.0).is_err());
        assert_eq!(s.poisson(0.0).unwrap(), 0);
    }

    #[test]
    fn normal_moments() {
        let mut s = RandomStream::new(5).sampler();
        let xs: Vec<f64> = (0..50_000).map(|_| s.normal()).collect();
        assert!(crate::numeric::mean(&xs).abs() < 0.02);
        assert!((crate::numeric::variance(&xs) - 1.0).abs() < 0.03);
    }
}
