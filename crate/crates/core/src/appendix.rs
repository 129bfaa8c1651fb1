//! Phase-random averages, the optimal separable initial state, and the
//! window-pair count behind the infinite-time average of `H̄ₙ`.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chain::DEFAULT_BRUTE_FORCE_CAP;
use crate::error::{Error, Result};
use crate::oracle::meyer_wallach;
use crate::random::{SeededSampler, CHUNK};
use crate::state::StateVector;

/// Largest order accepted by [`count_xi`].
pub const MAX_XI_ORDER: usize = 8;

/// Amplitudes `r_a >= 0` and phases `ω_a` of an initial state in the
/// computational basis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AmplitudeProfile {
    spins: usize,
    r: Vec<f64>,
    omega: Vec<f64>,
}

impl AmplitudeProfile {
    pub fn new(spins: usize, r: Vec<f64>, omega: Vec<f64>) -> Result<Self> {
        if spins == 0 || spins > DEFAULT_BRUTE_FORCE_CAP {
            return Err(Error::Resource {
                what: "amplitude profile",
                spins,
                cap: DEFAULT_BRUTE_FORCE_CAP,
            });
        }
        let dim = 1usize << spins;
        if r.len() != dim || omega.len() != dim {
            return Err(Error::input(format!(
                "profile needs {dim} amplitudes and phases"
            )));
        }
        if r.iter().chain(&omega).any(|v| !v.is_finite()) || r.iter().any(|&v| v < 0.0) {
            return Err(Error::input(
                "amplitudes must be finite and nonnegative, phases finite",
            ));
        }
        let norm: f64 = r.iter().map(|v| v * v).sum();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::input(format!("Σ r² = {norm}, expected 1")));
        }
        Ok(Self { spins, r, omega })
    }

    /// `r_a = 2^{-N/2}`, zero phases.
    pub fn uniform(spins: usize) -> Result<Self> {
        let dim = 1usize.checked_shl(spins as u32).unwrap_or(0);
        let v = (dim as f64).sqrt().recip();
        Self::new(spins, vec![v; dim], vec![0.0; dim])
    }

    /// All weight on basis string `a`.
    pub fn concentrated(spins: usize, a: usize) -> Result<Self> {
        let dim = 1usize.checked_shl(spins as u32).unwrap_or(0);
        if a >= dim {
            return Err(Error::input(format!("basis index {a} out of range")));
        }
        let mut r = vec![0.0; dim];
        r[a] = 1.0;
        Self::new(spins, r, vec![0.0; dim])
    }

    /// Product state `⊗ (cos θ_i |0⟩ + sin θ_i |1⟩)` with `θ_i ∈ [0, π/2]`,
    /// so that `r_a = Π_i |⟨a_i|φ_i⟩|`.
    pub fn product(angles: &[f64]) -> Result<Self> {
        let spins = angles.len();
        if spins == 0 || spins > DEFAULT_BRUTE_FORCE_CAP {
            return Err(Error::Resource {
                what: "amplitude profile",
                spins,
                cap: DEFAULT_BRUTE_FORCE_CAP,
            });
        }
        let dim = 1usize << spins;
        let mut r: Vec<f64> = (0..dim)
            .map(|a| {
                angles
                    .iter()
                    .enumerate()
                    .map(|(i, th)| {
                        if a >> i & 1 == 1 {
                            th.sin().abs()
                        } else {
                            th.cos().abs()
                        }
                    })
                    .product()
            })
            .collect();
        let norm = r.iter().map(|v| v * v).sum::<f64>().sqrt();
        r.iter_mut().for_each(|v| *v /= norm);
        Self::new(spins, r, vec![0.0; dim])
    }

    /// Random amplitudes with random phases (not a product state in general).
    pub fn random<R: Rng + ?Sized>(spins: usize, rng: &mut R) -> Result<Self> {
        if spins == 0 || spins > DEFAULT_BRUTE_FORCE_CAP {
            return Err(Error::Resource {
                what: "amplitude profile",
                spins,
                cap: DEFAULT_BRUTE_FORCE_CAP,
            });
        }
        let dim = 1usize << spins;
        let mut r: Vec<f64> = (0..dim).map(|_| rng.random::<f64>()).collect();
        let norm = r.iter().map(|v| v * v).sum::<f64>().sqrt();
        r.iter_mut().for_each(|v| *v /= norm);
        let omega = (0..dim).map(|_| 2.0 * PI * rng.random::<f64>()).collect();
        Self::new(spins, r, omega)
    }

    pub fn spins(&self) -> usize {
        self.spins
    }

    pub fn amplitudes(&self) -> &[f64] {
        &self.r
    }

    pub fn phases(&self) -> &[f64] {
        &self.omega
    }

    /// Basis weights `p_a = r_a²`, the diagonal of the dephased state.
    pub fn weights(&self) -> Vec<f64> {
        self.r.iter().map(|v| v * v).collect()
    }

    /// `Σ_a r_a e^{iω_a} |a⟩`.
    pub fn to_state(&self) -> Result<StateVector> {
        let amps = self
            .r
            .iter()
            .zip(&self.omega)
            .map(|(&r, &w)| Complex64::from_polar(r, w))
            .collect();
        StateVector::new(self.spins, amps)
    }
}

/// `1 - Σ p²` for a probability vector.
fn diagonal_linear_entropy(p: impl Iterator<Item = f64>) -> f64 {
    1.0 - p.map(|v| v * v).sum::<f64>()
}

/// Phase-random average of `E_MW` through linear entropies of the dephased
/// state: `(2/N) Σ_k [S_L(ρ_k) + S_L(ρ_{¬k}) - S_L(ρ_av)]`, where `ρ_k` keeps
/// site `k` and `ρ_{¬k}` traces it out. All three are diagonal.
pub fn phase_random_avg(profile: &AmplitudeProfile) -> f64 {
    let p = profile.weights();
    let n = profile.spins;
    let whole = diagonal_linear_entropy(p.iter().copied());
    let total: f64 = (0..n)
        .map(|k| {
            let bit = 1usize << k;
            let up: f64 = p
                .iter()
                .enumerate()
                .filter(|(a, _)| a & bit != 0)
                .map(|(_, v)| v)
                .sum();
            let down: f64 = p
                .iter()
                .enumerate()
                .filter(|(a, _)| a & bit == 0)
                .map(|(_, v)| v)
                .sum();
            let kept = diagonal_linear_entropy([down, up].into_iter());
            let rest = diagonal_linear_entropy(
                (0..p.len())
                    .filter(|a| a & bit == 0)
                    .map(|a| p[a] + p[a | bit]),
            );
            kept + rest - whole
        })
        .sum();
    2.0 / n as f64 * total
}

/// The same average written directly in the weights:
/// `(4/N) Σ_k [P_k(0) P_k(1) - Σ_b p_{b,0} p_{b,1}]`, with `b` running over
/// the other spins.
pub fn phase_random_avg_indexed(profile: &AmplitudeProfile) -> f64 {
    let p = profile.weights();
    let n = profile.spins;
    let total: f64 = (0..n)
        .map(|k| {
            let bit = 1usize << k;
            let mut down = 0.0;
            let mut up = 0.0;
            let mut paired = 0.0;
            for a in (0..p.len()).filter(|a| a & bit == 0) {
                down += p[a];
                up += p[a | bit];
                paired += p[a] * p[a | bit];
            }
            down * up - paired
        })
        .sum();
    4.0 / n as f64 * total
}

/// `1 - 2^{1-N}`, the phase-random average of the uniform profile.
pub fn optimal_phase_random_avg(spins: usize) -> f64 {
    1.0 - 2f64.powi(1 - spins as i32)
}

/// Mean and standard error of `E_MW` over uniformly random phase vectors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub draws: usize,
}

pub fn monte_carlo_phase_avg(
    profile: &AmplitudeProfile,
    draws: usize,
    sampler: &SeededSampler,
) -> Result<MonteCarloEstimate> {
    if draws < 2 {
        return Err(Error::input("Monte-Carlo average needs at least 2 draws"));
    }
    let chunks = draws.div_ceil(CHUNK);
    let dim = profile.r.len();
    let parts: Vec<(f64, f64)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = sampler.rng_for(c as u32);
            let len = CHUNK.min(draws - c * CHUNK);
            let (mut s, mut s2) = (0.0, 0.0);
            for _ in 0..len {
                let amps = profile
                    .r
                    .iter()
                    .map(|&r| Complex64::from_polar(r, 2.0 * PI * rng.random::<f64>()))
                    .collect::<Vec<_>>();
                debug_assert_eq!(amps.len(), dim);
                let v = meyer_wallach(&StateVector::from_amplitudes_unchecked(
                    profile.spins,
                    amps,
                )?)?;
                s += v;
                s2 += v * v;
            }
            Ok((s, s2))
        })
        .collect::<Result<_>>()?;
    let (s, s2) = parts
        .iter()
        .fold((0.0, 0.0), |acc, p| (acc.0 + p.0, acc.1 + p.1));
    let k = draws as f64;
    let mean = s / k;
    let var = ((s2 / k - mean * mean) * k / (k - 1.0)).max(0.0);
    Ok(MonteCarloEstimate {
        mean,
        std_error: (var / k).sqrt(),
        draws,
    })
}

/// Result of the separable-state maximization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimalSearch {
    pub best_value: f64,
    /// Product-state angles `θ_i` of the best profile.
    pub best_angles: Vec<f64>,
    pub best_profile: AmplitudeProfile,
    /// `1 - 2^{1-N}`.
    pub bound: f64,
    pub restarts: usize,
}

fn product_value(angles: &[f64]) -> f64 {
    AmplitudeProfile::product(angles)
        .map(|p| phase_random_avg(&p))
        .unwrap_or(f64::NEG_INFINITY)
}

/// Gradient ascent with backtracking from one starting point.
fn climb(mut x: Vec<f64>) -> (f64, Vec<f64>) {
    let h = 1e-6;
    let mut f = product_value(&x);
    let mut step = 0.5;
    for _ in 0..500 {
        let grad: Vec<f64> = (0..x.len())
            .map(|i| {
                let mut a = x.clone();
                let mut b = x.clone();
                a[i] += h;
                b[i] -= h;
                (product_value(&a) - product_value(&b)) / (2.0 * h)
            })
            .collect();
        let gnorm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
        if gnorm < 1e-10 {
            break;
        }
        loop {
            let trial: Vec<f64> = x
                .iter()
                .zip(&grad)
                .map(|(xi, gi)| (xi + step * gi).clamp(0.0, FRAC_PI_2))
                .collect();
            let ft = product_value(&trial);
            if ft > f {
                x = trial;
                f = ft;
                step *= 1.5;
                break;
            }
            step *= 0.5;
            if step < 1e-12 {
                return (f, x);
            }
        }
    }
    (f, x)
}

/// Maximizes the phase-random average over product-state profiles with
/// `restarts` seeded random starts. `N` is limited to 2..=4.
pub fn verify_optimal_initial(
    spins: usize,
    restarts: usize,
    sampler: &SeededSampler,
) -> Result<OptimalSearch> {
    if !(2..=4).contains(&spins) {
        return Err(Error::input(format!(
            "optimal-state search supports N in 2..=4, got {spins}"
        )));
    }
    if restarts < 10 {
        return Err(Error::input(format!(
            "need at least 10 restarts, got {restarts}"
        )));
    }
    let runs: Vec<(f64, Vec<f64>)> = (0..restarts)
        .into_par_iter()
        .map(|k| {
            let mut rng = sampler.rng_for(k as u32);
            let start = (0..spins)
                .map(|_| FRAC_PI_2 * rng.random::<f64>())
                .collect();
            climb(start)
        })
        .collect();
    // First strict maximum in restart order.
    let (best_value, best_angles) = runs
        .into_iter()
        .reduce(|a, b| if b.0 > a.0 { b } else { a })
        .expect("restarts >= 10");
    Ok(OptimalSearch {
        best_profile: AmplitudeProfile::product(&best_angles)?,
        best_value,
        best_angles,
        bound: optimal_phase_random_avg(spins),
        restarts,
    })
}

/// Count of degenerate configuration pairs in the neighbourhood of one site.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct XiCount {
    pub n: usize,
    pub xi: u64,
}

impl XiCount {
    /// `2^{2(n-1)}` configurations of the spins sharing a window with the
    /// site; `ξ` counts ordered pairs of them.
    pub fn configurations(&self) -> u64 {
        1 << (2 * (self.n - 1))
    }

    /// Degenerate pairs over the `2^{N-1}` full strings with the site spin
    /// fixed: `ξ · 2^{2(N-2n+1)}`. Needs `N >= 2n - 1`.
    pub fn chain_pairs(&self, spins: usize) -> Option<u128> {
        let outside = spins.checked_sub(2 * self.n - 1)?;
        Some(u128::from(self.xi) << (2 * outside))
    }
}

/// Symbolic degeneracy count for `H̄ₙ`: for every configuration of the
/// `2(n-1)` spins at offsets `±1..±(n-1)` around a site, the phase key is the
/// vector over orders `m` of `Σ_{windows of length m through the site}`
/// (product of the other spins in the window). `ξ = Σ_key mult²`.
pub fn count_xi(n: usize) -> Result<XiCount> {
    if !(2..=MAX_XI_ORDER).contains(&n) {
        return Err(Error::input(format!(
            "count_xi supports n in 2..={MAX_XI_ORDER}, got {n}"
        )));
    }
    let side = n - 1;
    let configs = 1u64 << (2 * side);
    // Offset o in -(n-1)..=-1 maps to bit o + n - 1; o in 1..=n-1 to bit o + n - 2.
    let spin = |x: u64, offset: i64| -> i32 {
        let bit = if offset < 0 {
            offset + side as i64
        } else {
            offset + side as i64 - 1
        };
        if x >> bit & 1 == 1 {
            1
        } else {
            -1
        }
    };
    let key = |x: u64| -> Vec<i32> {
        (2..=n)
            .map(|m| {
                (0..m as i64)
                    .map(|back| {
                        let start = -back;
                        (start..start + m as i64)
                            .filter(|&o| o != 0)
                            .map(|o| spin(x, o))
                            .product::<i32>()
                    })
                    .sum()
            })
            .collect()
    };
    let chunk = 1u64 << 10.min(2 * side);
    let maps: Vec<BTreeMap<Vec<i32>, u64>> = (0..configs.div_ceil(chunk))
        .into_par_iter()
        .map(|c| {
            let mut m = BTreeMap::new();
            for x in c * chunk..((c + 1) * chunk).min(configs) {
                *m.entry(key(x)).or_insert(0u64) += 1;
            }
            m
        })
        .collect();
    let mut merged: BTreeMap<Vec<i32>, u64> = BTreeMap::new();
    for m in maps {
        for (k, v) in m {
            *merged.entry(k).or_insert(0) += v;
        }
    }
    let xi = merged.values().map(|v| v * v).sum();
    Ok(XiCount { n, xi })
}

/// `1 - ξ / 2^{4n-6}`, the normalization as published.
pub fn xi_to_avg(xi: u64, n: usize) -> f64 {
    1.0 - xi as f64 / 2f64.powi(4 * n as i32 - 6)
}

/// `1 - ξ / 2^{4(n-1)}`: `ξ` divided by the number of configuration pairs.
pub fn xi_to_exact_avg(xi: u64, n: usize) -> f64 {
    1.0 - xi as f64 / 2f64.powi(4 * (n as i32 - 1))
}
