//! Brute-force reduced density matrices, linear entropy, Meyer-Wallach
//! entanglement and two-point correlators computed directly from a
//! [`StateVector`].
//!
//! Nothing here knows about Hamiltonians: partial traces are plain index
//! contractions over bit masks, `O(2^N)` per reduction. This module is the
//! reference the analytic formulas in [`crate::closed_form`] are checked
//! against.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chain::site_bit;
use crate::error::{Error, Result};
use crate::state::StateVector;

/// Pauli axis of a correlation function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    /// The Pauli matrix in the `σᶻ` basis, `|0⟩` first.
    pub fn pauli(self) -> [[Complex64; 2]; 2] {
        let o = Complex64::new(0.0, 0.0);
        let one = Complex64::new(1.0, 0.0);
        let i = Complex64::new(0.0, 1.0);
        match self {
            Axis::X => [[o, one], [one, o]],
            Axis::Y => [[o, -i], [i, o]],
            Axis::Z => [[one, o], [o, -one]],
        }
    }
}

/// Anything with a purity `tr ρ²`.
pub trait Purity {
    fn purity(&self) -> f64;
}

/// One-spin reduced density matrix, basis `|0⟩, |1⟩` of the kept spin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedDensity1(pub [[Complex64; 2]; 2]);

/// Two-spin reduced density matrix for sites `(l, l2)`; row index is
/// `2·a_l + a_l2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedDensity2(pub [[Complex64; 4]; 4]);

impl ReducedDensity1 {
    pub fn trace(&self) -> Complex64 {
        self.0[0][0] + self.0[1][1]
    }

    /// Largest deviation from Hermiticity.
    pub fn hermiticity_error(&self) -> f64 {
        let m = &self.0;
        (m[0][1] - m[1][0].conj())
            .norm()
            .max(m[0][0].im.abs())
            .max(m[1][1].im.abs())
    }

    /// Eigenvalues, ascending.
    pub fn eigenvalues(&self) -> [f64; 2] {
        let a = self.0[0][0].re;
        let d = self.0[1][1].re;
        let b = self.0[0][1].norm();
        let mean = 0.5 * (a + d);
        let r = (0.25 * (a - d) * (a - d) + b * b).sqrt();
        [mean - r, mean + r]
    }

    /// `tr ρ σ^W`.
    pub fn expectation(&self, axis: Axis) -> f64 {
        let p = axis.pauli();
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..2 {
            for k in 0..2 {
                acc += self.0[i][k] * p[k][i];
            }
        }
        acc.re
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let mut d: f64 = 0.0;
        for i in 0..2 {
            for k in 0..2 {
                d = d.max((self.0[i][k] - other.0[i][k]).norm());
            }
        }
        d
    }
}

impl Purity for ReducedDensity1 {
    fn purity(&self) -> f64 {
        let m = &self.0;
        m[0][0].norm_sqr() + m[1][1].norm_sqr() + m[0][1].norm_sqr() + m[1][0].norm_sqr()
    }
}

impl ReducedDensity2 {
    pub fn trace(&self) -> Complex64 {
        (0..4).map(|i| self.0[i][i]).sum()
    }

    pub fn hermiticity_error(&self) -> f64 {
        let mut e: f64 = 0.0;
        for i in 0..4 {
            for k in 0..4 {
                e = e.max((self.0[i][k] - self.0[k][i].conj()).norm());
            }
        }
        e
    }

    /// Smallest value of `⟨v|ρ|v⟩` found by a few power iterations on
    /// `λ_max I - ρ`; enough to detect negative eigenvalues.
    pub fn min_eigenvalue(&self) -> f64 {
        // ρ is at most 4×4 with unit trace: shift by 1 makes I - ρ positive.
        let mut v = [
            Complex64::new(0.5, 0.1),
            Complex64::new(-0.3, 0.4),
            Complex64::new(0.2, -0.6),
            Complex64::new(0.7, 0.05),
        ];
        let mut mu = 0.0;
        for _ in 0..500 {
            let mut w = [Complex64::new(0.0, 0.0); 4];
            for (i, wi) in w.iter_mut().enumerate() {
                *wi = v[i];
                for (k, vk) in v.iter().enumerate() {
                    *wi -= self.0[i][k] * vk;
                }
            }
            let norm = w.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
            if norm == 0.0 {
                return 1.0;
            }
            let mut rayleigh = Complex64::new(0.0, 0.0);
            for i in 0..4 {
                rayleigh += v[i].conj() * w[i];
            }
            mu = rayleigh.re / v.iter().map(|c| c.norm_sqr()).sum::<f64>();
            w.iter_mut().for_each(|c| *c /= norm);
            v = w;
        }
        1.0 - mu
    }

    /// `tr ρ (σ^W ⊗ σ^W)`.
    pub fn expectation_pair(&self, axis: Axis) -> f64 {
        let p = axis.pauli();
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..4 {
            for k in 0..4 {
                let op_ki = p[k >> 1][i >> 1] * p[k & 1][i & 1];
                acc += self.0[i][k] * op_ki;
            }
        }
        acc.re
    }

    /// Traces out the second spin, leaving site `l`.
    pub fn trace_second(&self) -> ReducedDensity1 {
        let mut out = [[Complex64::new(0.0, 0.0); 2]; 2];
        for (x, row) in out.iter_mut().enumerate() {
            for (y, cell) in row.iter_mut().enumerate() {
                *cell = self.0[2 * x][2 * y] + self.0[2 * x + 1][2 * y + 1];
            }
        }
        ReducedDensity1(out)
    }

    /// Traces out the first spin, leaving site `l2`.
    pub fn trace_first(&self) -> ReducedDensity1 {
        let mut out = [[Complex64::new(0.0, 0.0); 2]; 2];
        for (x, row) in out.iter_mut().enumerate() {
            for (y, cell) in row.iter_mut().enumerate() {
                *cell = self.0[x][y] + self.0[2 + x][2 + y];
            }
        }
        ReducedDensity1(out)
    }
}

impl Purity for ReducedDensity2 {
    fn purity(&self) -> f64 {
        self.0.iter().flatten().map(|c| c.norm_sqr()).sum()
    }
}

fn check_site(state: &StateVector, site: usize) -> Result<()> {
    if site == 0 || site > state.spins() {
        Err(Error::input(format!(
            "site {site} outside 1..={}",
            state.spins()
        )))
    } else {
        Ok(())
    }
}

/// `ρ_l = tr_{¬l} |Φ⟩⟨Φ|`.
pub fn reduce_one(state: &StateVector, l: usize) -> Result<ReducedDensity1> {
    check_site(state, l)?;
    let bit = site_bit(l) as usize;
    let amps = state.amplitudes();
    let (mut p0, mut p1, mut c01) = (0.0, 0.0, Complex64::new(0.0, 0.0));
    for a in (0..amps.len()).filter(|a| a & bit == 0) {
        let (x, y) = (amps[a], amps[a | bit]);
        p0 += x.norm_sqr();
        p1 += y.norm_sqr();
        c01 += x * y.conj();
    }
    Ok(ReducedDensity1([
        [Complex64::new(p0, 0.0), c01],
        [c01.conj(), Complex64::new(p1, 0.0)],
    ]))
}

/// `ρ_{l,l2} = tr_{¬{l,l2}} |Φ⟩⟨Φ|`.
pub fn reduce_two(state: &StateVector, l: usize, l2: usize) -> Result<ReducedDensity2> {
    check_site(state, l)?;
    check_site(state, l2)?;
    if l == l2 {
        return Err(Error::input(format!(
            "two-site reduction needs distinct sites, got {l} twice"
        )));
    }
    let (b1, b2) = (site_bit(l) as usize, site_bit(l2) as usize);
    let amps = state.amplitudes();
    let offsets = [0, b2, b1, b1 | b2];
    let mut out = [[Complex64::new(0.0, 0.0); 4]; 4];
    for base in (0..amps.len()).filter(|a| a & (b1 | b2) == 0) {
        let v: [Complex64; 4] = std::array::from_fn(|i| amps[base | offsets[i]]);
        for i in 0..4 {
            for k in 0..4 {
                out[i][k] += v[i] * v[k].conj();
            }
        }
    }
    Ok(ReducedDensity2(out))
}

/// `S_L(ρ) = 1 - tr ρ²`.
pub fn linear_entropy<R: Purity>(rho: &R) -> f64 {
    1.0 - rho.purity()
}

/// `E_MW = (2/N) Σ_i S_L(ρ_i)`. Rejects states whose squared norm is off by
/// more than 1e-8.
pub fn meyer_wallach(state: &StateVector) -> Result<f64> {
    let err = (state.norm_sqr() - 1.0).abs();
    if err > 1e-8 {
        return Err(Error::input(format!(
            "Meyer-Wallach needs a normalized state (|norm² - 1| = {err:e})"
        )));
    }
    let n = state.spins();
    let entropies: Vec<f64> = (1..=n)
        .into_par_iter()
        .map(|l| reduce_one(state, l).map(|rho| linear_entropy(&rho)))
        .collect::<Result<_>>()?;
    Ok(2.0 / n as f64 * entropies.iter().sum::<f64>())
}

/// `C^W(r) = tr ρ_{1,r+1} σ^W σ^W - (tr ρ_1 σ^W)(tr ρ_{r+1} σ^W)` for
/// `1 <= r <= N/2 - 1`.
pub fn correlation(state: &StateVector, axis: Axis, r: usize) -> Result<f64> {
    let n = state.spins();
    if r == 0 || r + 1 > n / 2 {
        return Err(Error::input(format!(
            "distance r = {r} outside 1..={} for N = {n}",
            (n / 2).saturating_sub(1)
        )));
    }
    let pair = reduce_two(state, 1, r + 1)?;
    let first = pair.trace_second();
    let second = pair.trace_first();
    Ok(pair.expectation_pair(axis) - first.expectation(axis) * second.expectation(axis))
}
