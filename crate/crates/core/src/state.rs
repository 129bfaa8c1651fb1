//! Dense state vectors over the `2^N` computational basis.

use num_complex::Complex64;

use crate::chain::{site_bit, MAX_SPINS};
use crate::error::{Error, Result};

/// A pure state `Σ_a c_a |a⟩` of `N` spins, with the same bit convention as
/// [`crate::chain`]: site `i` lives at bit `i - 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    spins: usize,
    amps: Vec<Complex64>,
}

/// A 2×2 complex matrix acting on one spin, rows indexed by the output bit.
pub type SingleSiteOp = [[Complex64; 2]; 2];

impl StateVector {
    /// Wraps the amplitudes and checks `Σ|c_a|² = 1` to 1e-10.
    pub fn new(spins: usize, amps: Vec<Complex64>) -> Result<Self> {
        let state = Self::from_amplitudes_unchecked(spins, amps)?;
        let err = (state.norm_sqr() - 1.0).abs();
        if err > 1e-10 {
            return Err(Error::input(format!(
                "state is not normalized (|norm² - 1| = {err:e})"
            )));
        }
        Ok(state)
    }

    /// Wraps the amplitudes without a normalization check.
    pub fn from_amplitudes_unchecked(spins: usize, amps: Vec<Complex64>) -> Result<Self> {
        if spins == 0 || spins > MAX_SPINS {
            return Err(Error::input(format!("unsupported spin count {spins}")));
        }
        if amps.len() != 1usize << spins {
            return Err(Error::input(format!(
                "{} amplitudes for {spins} spins",
                amps.len()
            )));
        }
        Ok(Self { spins, amps })
    }

    /// Scales arbitrary nonzero amplitudes to unit norm.
    pub fn normalized(spins: usize, mut amps: Vec<Complex64>) -> Result<Self> {
        let norm: f64 = amps.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::input("cannot normalize a zero or non-finite vector"));
        }
        let inv = norm.recip();
        amps.iter_mut().for_each(|c| *c *= inv);
        Self::from_amplitudes_unchecked(spins, amps)
    }

    /// The computational basis state `|a⟩`.
    pub fn basis(spins: usize, a: usize) -> Result<Self> {
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << spins];
        *amps
            .get_mut(a)
            .ok_or_else(|| Error::input(format!("basis index {a} out of range")))? =
            Complex64::new(1.0, 0.0);
        Self::from_amplitudes_unchecked(spins, amps)
    }

    /// `|+⟩^⊗N`.
    pub fn plus(spins: usize) -> Result<Self> {
        let amp = (2f64).powf(-(spins as f64) / 2.0);
        Self::from_amplitudes_unchecked(spins, vec![Complex64::new(amp, 0.0); 1 << spins])
    }

    /// `(|0…0⟩ + |1…1⟩)/√2`.
    pub fn ghz(spins: usize) -> Result<Self> {
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << spins];
        let h = std::f64::consts::FRAC_1_SQRT_2;
        amps[0] = Complex64::new(h, 0.0);
        amps[(1 << spins) - 1] = Complex64::new(h, 0.0);
        Self::from_amplitudes_unchecked(spins, amps)
    }

    /// Tensor product of single-spin states `(c0, c1)`, site 1 first.
    pub fn product(sites: &[[Complex64; 2]]) -> Result<Self> {
        let spins = sites.len();
        let amps = (0..1usize << spins)
            .map(|a| {
                sites
                    .iter()
                    .enumerate()
                    .map(|(i, s)| s[(a >> i) & 1])
                    .product()
            })
            .collect();
        Self::normalized(spins, amps)
    }

    #[inline]
    pub fn spins(&self) -> usize {
        self.spins
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    #[inline]
    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|c| c.norm_sqr()).sum()
    }

    /// Applies a 2×2 operator to spin `site` (1-based).
    pub fn apply_single_site(&mut self, site: usize, op: &SingleSiteOp) -> Result<()> {
        if site == 0 || site > self.spins {
            return Err(Error::input(format!(
                "site {site} outside 1..={}",
                self.spins
            )));
        }
        let bit = site_bit(site) as usize;
        for a in 0..self.amps.len() {
            if a & bit == 0 {
                let (c0, c1) = (self.amps[a], self.amps[a | bit]);
                self.amps[a] = op[0][0] * c0 + op[0][1] * c1;
                self.amps[a | bit] = op[1][0] * c0 + op[1][1] * c1;
            }
        }
        Ok(())
    }

    /// Pointwise multiplication by phases `exp(i φ_a)`.
    pub fn with_phases(&self, phases: &[f64]) -> Result<Self> {
        if phases.len() != self.amps.len() {
            return Err(Error::input("phase vector length mismatch"));
        }
        let amps = self
            .amps
            .iter()
            .zip(phases)
            .map(|(c, &p)| c * Complex64::from_polar(1.0, p))
            .collect();
        Self::from_amplitudes_unchecked(self.spins, amps)
    }

    /// Amplitude-wise distance `max_a |c_a - d_a|`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}
