//! Haar-random pure states and the typical-entanglement baseline.
//!
//! All randomness goes through [`SeededSampler`], a ChaCha20 generator with
//! an explicit `(seed, stream)` pair. Parallel work is split into fixed-size
//! chunks with their own ChaCha stream, so results do not depend on how rayon
//! schedules the chunks.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chain::DEFAULT_BRUTE_FORCE_CAP;
use crate::error::{Error, Result};
use crate::oracle::meyer_wallach;
use crate::state::StateVector;

/// Identifier recorded in run manifests.
pub const GENERATOR: &str = "ChaCha20 (rand_chacha 0.9), seed_from_u64 + 64-bit stream";

/// Samples drawn per chunk in parallel sampling.
pub const CHUNK: usize = 64;

/// A reproducible source of random streams.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeededSampler {
    pub seed: u64,
    pub stream: u32,
}

impl SeededSampler {
    pub fn new(seed: u64) -> Self {
        Self { seed, stream: 0 }
    }

    pub fn with_stream(seed: u64, stream: u32) -> Self {
        Self { seed, stream }
    }

    /// The generator for this `(seed, stream)`.
    pub fn rng(&self) -> ChaCha20Rng {
        self.rng_for(0)
    }

    /// Generator for sub-task `task` of this stream.
    pub fn rng_for(&self, task: u32) -> ChaCha20Rng {
        let mut rng = ChaCha20Rng::seed_from_u64(self.seed);
        rng.set_stream((u64::from(self.stream) << 32) | u64::from(task));
        rng
    }

    /// A different stream with the same seed.
    pub fn fork(&self, stream: u32) -> Self {
        Self {
            seed: self.seed,
            stream,
        }
    }
}

/// A Haar-random pure state: i.i.d. complex Gaussian amplitudes, normalized.
pub fn haar_state<R: rand::Rng + ?Sized>(spins: usize, rng: &mut R) -> Result<StateVector> {
    if spins == 0 || spins > DEFAULT_BRUTE_FORCE_CAP {
        return Err(Error::Resource {
            what: "Haar state",
            spins,
            cap: DEFAULT_BRUTE_FORCE_CAP,
        });
    }
    let amps = (0..1usize << spins)
        .map(|_| {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            Complex64::new(re, im)
        })
        .collect();
    StateVector::normalized(spins, amps)
}

/// `⟨E_MW⟩_rand = 1 - 3/(2^N + 1)`.
pub fn typical_avg(spins: usize) -> f64 {
    let d = 2f64.powi(spins as i32);
    1.0 - 3.0 / (d + 1.0)
}

/// `2^{-N}`, the order of magnitude of the typical standard deviation.
pub fn typical_std_order(spins: usize) -> f64 {
    2f64.powi(-(spins as i32))
}

/// `count` Meyer-Wallach values of independent Haar states.
pub fn sample_typical(spins: usize, count: usize, sampler: &SeededSampler) -> Result<Vec<f64>> {
    if count == 0 {
        return Err(Error::input("sample count must be at least 1"));
    }
    let chunks = count.div_ceil(CHUNK);
    let per_chunk: Vec<Vec<f64>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = sampler.rng_for(c as u32);
            let len = CHUNK.min(count - c * CHUNK);
            (0..len)
                .map(|_| meyer_wallach(&haar_state(spins, &mut rng)?))
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;
    Ok(per_chunk.into_iter().flatten().collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn typical_average_values() {
        assert!((typical_avg(8) - (1.0 - 3.0 / 257.0)).abs() < 1e-15);
        assert!((typical_avg(8) - 0.988327).abs() < 1e-6);
        assert!((typical_avg(2) - 0.4).abs() < 1e-15);
        assert!(typical_avg(1).abs() < 1e-15);
        assert!((typical_std_order(8) - 0.00390625).abs() < 1e-15);
    }

    #[test]
    fn haar_draws_are_normalized() {
        let mut rng = SeededSampler::new(3).rng();
        for n in 1..=8 {
            let s = haar_state(n, &mut rng).unwrap();
            assert!((s.norm_sqr() - 1.0).abs() < 1e-10);
        }
        assert!(haar_state(20, &mut rng).is_err());
    }

    #[test]
    fn sampling_is_deterministic() {
        let s = SeededSampler::with_stream(11, 2);
        let a = sample_typical(5, 200, &s).unwrap();
        let b = sample_typical(5, 200, &s).unwrap();
        assert_eq!(a.len(), 200);
        assert!(a.iter().zip(&b).all(|(x, y)| x.to_bits() == y.to_bits()));
        assert!(a.iter().all(|&v| (0.0..=1.0).contains(&v)));
        let c = sample_typical(5, 200, &s.fork(3)).unwrap();
        assert_ne!(a, c);
        assert!(sample_typical(5, 0, &s).is_err());
    }
}
