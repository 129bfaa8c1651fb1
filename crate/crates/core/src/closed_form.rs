//! Analytic entanglement evolution, infinite-time averages, bounds and the
//! `C^X` correlation formula for the four Ising-type families.
//!
//! The initial state is always `|+⟩^⊗N`, whose one-spin marginals stay of the
//! form `½[[1, B_l], [B_l*, 1]]` under any diagonal Hamiltonian, so
//! `E_MW = 1 - (1/N) Σ_l |B_l(t)|²`.
//!
//! * Single-order kinds: `B_l = A_l = Π_{k=l-n+1}^{l} cos 2J_k t`, valid when
//!   the `n` window parities touching site `l` are independent (always true
//!   for `N >= 2n - 1`). [`product_form_exact`] decides this.
//! * Everything else: `B_l` is the average of `exp(-iθ t)` over the phase
//!   differences `θ = E_a - E_{a⊕l}`, which only depend on the spins sharing
//!   a window with `l`. [`ReducedPhaseSums`] enumerates that neighbourhood.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chain::{gf2_rank, mask_parity, site_bit, ChainGeometry};
use crate::error::{Error, Result};
use crate::hamiltonian::{eigenphase_table, HamiltonianKind, HamiltonianSpec};
use crate::oracle::{correlation, Axis};

/// Neighbourhoods larger than this many spins are not enumerated.
pub const MAX_REDUCED_WINDOW: usize = 26;

// ---------------------------------------------------------------------------
// Double factorials

/// `ln k!`, exact summation up to 256 and a Stirling series beyond.
pub fn ln_factorial(k: u64) -> f64 {
    if k < 2 {
        return 0.0;
    }
    if k <= 256 {
        return (2..=k).map(|i| (i as f64).ln()).sum();
    }
    let x = k as f64;
    let x2 = x * x;
    x * x.ln() - x + 0.5 * (2.0 * PI * x).ln() + 1.0 / (12.0 * x) - 1.0 / (360.0 * x * x2)
        + 1.0 / (1260.0 * x2 * x2 * x)
        - 1.0 / (1680.0 * x2 * x2 * x2 * x)
}

/// `ln k!!` with `k!! = k (k-2) (k-4) ⋯`.
pub fn ln_double_factorial(k: u64) -> f64 {
    if k < 2 {
        return 0.0;
    }
    if k.is_multiple_of(2) {
        let h = k / 2;
        h as f64 * std::f64::consts::LN_2 + ln_factorial(h)
    } else {
        // k!! = k! / (k-1)!!
        ln_factorial(k) - ln_double_factorial(k - 1)
    }
}

/// `(2k-1)!! / (2k)!!`, evaluated in log space.
pub fn double_factorial_ratio(k: u64) -> f64 {
    if k == 0 {
        return 1.0;
    }
    (ln_double_factorial(2 * k - 1) - ln_double_factorial(2 * k)).exp()
}

// ---------------------------------------------------------------------------
// Uniform single order, h̄ₙ

/// `E_MW(t) = 1 - cos^{2n}(2Jt)`.
pub fn emw_uniform_single(n: usize, j: f64, t: f64) -> f64 {
    1.0 - (2.0 * j * t).cos().powi(2 * n as i32)
}

/// Infinite-time average of `h̄ₙ` and its large-`n` asymptote.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UniformAverage {
    /// `1 - (2n-1)!!/(2n)!!`.
    pub exact: f64,
    /// `1 - 1/√(nπ)`.
    pub asymptote: f64,
}

pub fn avg_uniform_single(n: usize) -> UniformAverage {
    UniformAverage {
        exact: 1.0 - double_factorial_ratio(n as u64),
        asymptote: 1.0 - 1.0 / (n as f64 * PI).sqrt(),
    }
}

/// `σ = sqrt((4n-1)!!/(4n)!! - ((2n-1)!!/(2n)!!)²)`.
pub fn std_uniform_single(n: usize) -> f64 {
    let r = double_factorial_ratio(n as u64);
    (double_factorial_ratio(2 * n as u64) - r * r)
        .max(0.0)
        .sqrt()
}

/// `sqrt(1/√(2nπ) - 1/(nπ))`.
pub fn std_uniform_single_asymptote(n: usize) -> f64 {
    let x = n as f64 * PI;
    (1.0 / (2.0 * x).sqrt() - 1.0 / x).max(0.0).sqrt()
}

// ---------------------------------------------------------------------------
// Site-dependent single order, hₙ

/// Whether the product-of-cosines forms are exact for order `n` on `N` spins.
///
/// They are exact iff, for a site `l`, the parities of the `n` windows that
/// contain `l` (with `l` itself removed) are linearly independent over GF(2).
/// This holds for every `N >= 2n - 1` and fails e.g. for `n = N`.
pub fn product_form_exact(spins: usize, n: usize) -> bool {
    let Ok(g) = ChainGeometry::with_cap(spins, spins) else {
        return false;
    };
    if n < 2 || n > spins {
        return false;
    }
    let masks: Vec<u64> = g
        .windows_containing(1, n)
        .into_iter()
        .map(|j| g.window_mask(j as i64, n) & !site_bit(1))
        .collect();
    gf2_rank(&masks) == n
}

/// `A_l(t) = Π_{k=l-n+1}^{l} cos 2J_k t` (sites wrap).
pub fn site_factor(couplings: &[f64], n: usize, l: usize, t: f64) -> f64 {
    let spins = couplings.len() as i64;
    (0..n as i64)
        .map(|k| {
            let site = (l as i64 - 1 - k).rem_euclid(spins) as usize;
            (2.0 * couplings[site] * t).cos()
        })
        .product()
}

/// `E_MW(t) = 1 - (1/N) Σ_l A_l(t)²`.
///
/// This is the product formula itself; see [`product_form_exact`] for where
/// it equals the true evolution.
pub fn emw_site_single(couplings: &[f64], n: usize, t: f64) -> Result<f64> {
    let spins = couplings.len();
    if n < 2 || n > spins {
        return Err(Error::input(format!("order n = {n} outside 2..={spins}")));
    }
    let sum: f64 = (1..=spins)
        .map(|l| site_factor(couplings, n, l, t).powi(2))
        .sum();
    Ok(1.0 - sum / spins as f64)
}

/// `1 - 2^{-n}`: upper bound on the infinite-time average of `hₙ`, attained
/// for generic site-dependent couplings.
pub fn bound_site_single(n: usize) -> f64 {
    1.0 - 0.5f64.powi(n as i32)
}

// ---------------------------------------------------------------------------
// Reduced phase sums (all kinds)

/// Distinct phase differences `θ` at one site with their weights
/// (multiplicity divided by the number of neighbourhood configurations).
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseSpectrum {
    pub phases: Vec<f64>,
    pub weights: Vec<f64>,
}

impl PhaseSpectrum {
    fn from_raw(mut thetas: Vec<f64>) -> Self {
        let total = thetas.len() as f64;
        thetas.sort_by(f64::total_cmp);
        let mut phases: Vec<f64> = Vec::new();
        let mut counts: Vec<u64> = Vec::new();
        for th in thetas {
            match phases.last() {
                Some(&last) if last.to_bits() == th.to_bits() => {
                    *counts.last_mut().expect("paired") += 1
                }
                _ => {
                    phases.push(th);
                    counts.push(1);
                }
            }
        }
        let weights = counts.into_iter().map(|c| c as f64 / total).collect();
        Self { phases, weights }
    }

    /// `B(t) = Σ_θ w_θ exp(-iθt)`.
    pub fn amplitude(&self, t: f64) -> Complex64 {
        self.phases
            .iter()
            .zip(&self.weights)
            .map(|(&th, &w)| Complex64::from_polar(w, -th * t))
            .sum()
    }
}

/// Per-site phase spectra of a Hamiltonian, built from the spins that share
/// at least one interaction window with the site.
#[derive(Debug, Clone)]
pub struct ReducedPhaseSums {
    spins: usize,
    /// Distinct spectra and how many sites share each one.
    spectra: Vec<(PhaseSpectrum, usize)>,
}

impl ReducedPhaseSums {
    pub fn new(spec: &HamiltonianSpec) -> Result<Self> {
        let spins = spec.spins();
        let terms = spec.terms();
        let per_site: Vec<PhaseSpectrum> = (1..=spins)
            .into_par_iter()
            .map(|l| {
                let bit = site_bit(l);
                let local: Vec<(u64, f64)> = terms
                    .iter()
                    .filter(|t| t.mask & bit != 0)
                    .map(|t| (t.mask, t.weight))
                    .collect();
                let neighbourhood = local.iter().fold(0u64, |acc, &(m, _)| acc | m) & !bit;
                let sites: Vec<u64> = (0..64)
                    .filter(|i| neighbourhood >> i & 1 == 1)
                    .map(|i| 1u64 << i)
                    .collect();
                if sites.len() > MAX_REDUCED_WINDOW {
                    return Err(Error::input(format!(
                        "site {l} couples to {} spins; reduced sums cap at {MAX_REDUCED_WINDOW}",
                        sites.len()
                    )));
                }
                // Field term: E_a - E_{a⊕l} = -2 b_l when a_l = 0.
                let field = -2.0 * spec.fields().0[l - 1];
                let thetas = (0..1u64 << sites.len())
                    .map(|x| {
                        let a = sites.iter().enumerate().fold(0u64, |a, (i, &b)| {
                            if x >> i & 1 == 1 {
                                a | b
                            } else {
                                a
                            }
                        });
                        let coupling: f64 = local
                            .iter()
                            .map(|&(mask, w)| w * f64::from(mask_parity(a, mask)))
                            .sum();
                        2.0 * coupling + field
                    })
                    .collect();
                Ok(PhaseSpectrum::from_raw(thetas))
            })
            .collect::<Result<_>>()?;
        let mut spectra: Vec<(PhaseSpectrum, usize)> = Vec::new();
        for s in per_site {
            match spectra.iter_mut().find(|(known, _)| *known == s) {
                Some((_, count)) => *count += 1,
                None => spectra.push((s, 1)),
            }
        }
        Ok(Self { spins, spectra })
    }

    /// `E_MW(t) = 1 - (1/N) Σ_l |B_l(t)|²`.
    pub fn emw(&self, t: f64) -> f64 {
        let sum: f64 = self
            .spectra
            .iter()
            .map(|(s, count)| *count as f64 * s.amplitude(t).norm_sqr())
            .sum();
        (1.0 - sum / self.spins as f64).clamp(0.0, 1.0)
    }

    /// Number of distinct `(site spectrum)` classes; 1 for uniform chains.
    pub fn distinct_sites(&self) -> usize {
        self.spectra.len()
    }

    pub fn spectra(&self) -> impl Iterator<Item = (&PhaseSpectrum, usize)> {
        self.spectra.iter().map(|(s, c)| (s, *c))
    }
}

/// `E_MW(t)` of the up-to families (or any spec) via reduced phase sums.
pub fn emw_up_to(spec: &HamiltonianSpec, t: f64) -> Result<f64> {
    Ok(ReducedPhaseSums::new(spec)?.emw(t))
}

/// The same phase sum over all `2^{N-1}` strings with `a_l = 0`, without the
/// neighbourhood reduction. Subject to the brute-force cap.
pub fn emw_up_to_direct(spec: &HamiltonianSpec, t: f64) -> Result<f64> {
    let table = eigenphase_table(spec)?;
    let spins = spec.spins();
    let e = table.energies();
    let sum: f64 = (1..=spins)
        .map(|l| {
            let bit = site_bit(l) as usize;
            let b: Complex64 = (0..e.len())
                .filter(|a| a & bit == 0)
                .map(|a| Complex64::from_polar(1.0, -(e[a] - e[a | bit]) * t))
                .sum::<Complex64>()
                / (e.len() / 2) as f64;
            b.norm_sqr()
        })
        .sum();
    Ok(1.0 - sum / spins as f64)
}

// ---------------------------------------------------------------------------
// Dispatch

/// How an [`EvolutionFormula`] evaluates `E_MW(t)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvolutionMethod {
    /// `1 - cos^{2n}(2Jt)`.
    CosPower,
    /// `1 - (1/N) Σ_l A_l(t)²`.
    SiteProduct,
    /// Reduced phase sums.
    ReducedPhaseSum,
}

/// Closed-form `E_MW(t)` for a spec, with the cheapest exact method.
#[derive(Debug, Clone)]
pub struct EvolutionFormula {
    method: EvolutionMethod,
    order: usize,
    couplings: Vec<f64>,
    sums: Option<ReducedPhaseSums>,
}

impl EvolutionFormula {
    pub fn for_spec(spec: &HamiltonianSpec) -> Result<Self> {
        let n = spec.order();
        let exact = product_form_exact(spec.spins(), n);
        let method = match spec.kind() {
            HamiltonianKind::UniformSingle if exact => EvolutionMethod::CosPower,
            HamiltonianKind::SiteSingle if exact => EvolutionMethod::SiteProduct,
            _ => EvolutionMethod::ReducedPhaseSum,
        };
        let sums = match method {
            EvolutionMethod::ReducedPhaseSum => Some(ReducedPhaseSums::new(spec)?),
            _ => None,
        };
        let couplings = if spec.kind().is_single() {
            spec.couplings().order(n).unwrap_or_default().to_vec()
        } else {
            Vec::new()
        };
        Ok(Self {
            method,
            order: n,
            couplings,
            sums,
        })
    }

    pub fn method(&self) -> EvolutionMethod {
        self.method
    }

    pub fn emw(&self, t: f64) -> f64 {
        match self.method {
            EvolutionMethod::CosPower => emw_uniform_single(self.order, self.couplings[0], t),
            EvolutionMethod::SiteProduct => {
                emw_site_single(&self.couplings, self.order, t).expect("validated spec")
            }
            EvolutionMethod::ReducedPhaseSum => self.sums.as_ref().expect("built").emw(t),
        }
    }
}

// ---------------------------------------------------------------------------
// Correlations of hₙ

/// Which branch produced a [`CorrelationValue`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorrelationBranch {
    /// `r > n`: exactly zero.
    Zero,
    /// The product-of-cosines expression for `r <= n`.
    Formula,
    /// Wrap-dominated or parity-dependent geometry: dense state vector.
    Oracle,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelationValue {
    pub value: f64,
    pub branch: CorrelationBranch,
}

/// `C^X(r, t)` for `hₙ` between sites 1 and `r + 1`.
///
/// For `r <= n` and `r < N - n + 1` this is
/// `Π_{l∈L} cos 2J_l t - Π_{l∈P(N), l'∈P(r)} cos 2J_l t cos 2J_{l'} t` with
/// `L = [N-n+2, N-n+r+1] ∪ [2, r+1]` and `P(k) = [k-n+2, k+1]`; for `r > n`
/// it vanishes. When the windows involved are not parity-independent, or in
/// the wrap-dominated range, the dense oracle is used instead.
pub fn corr_x_site_single(
    couplings: &[f64],
    n: usize,
    r: usize,
    t: f64,
) -> Result<CorrelationValue> {
    let spins = couplings.len();
    if n < 2 || n > spins {
        return Err(Error::input(format!("order n = {n} outside 2..={spins}")));
    }
    if r == 0 || r + 1 > spins / 2 {
        return Err(Error::input(format!(
            "distance r = {r} outside 1..={} for N = {spins}",
            (spins / 2).saturating_sub(1)
        )));
    }
    let g = ChainGeometry::with_cap(spins, spins)?;
    let window = |j: i64| g.window_mask(j, n);
    let cos = |l: i64| (2.0 * couplings[g.wrap(l) - 1] * t).cos();
    let (nn, ni, ri) = (spins as i64, n as i64, r as i64);
    let p_first: Vec<i64> = (nn - ni + 2..=nn + 1).collect();
    let p_second: Vec<i64> = (ri - ni + 2..=ri + 1).collect();

    let independent = |starts: &[i64], drop: u64| {
        let masks: Vec<u64> = starts.iter().map(|&j| window(j) & !drop).collect();
        gf2_rank(&masks) == masks.len()
    };
    let marginals_ok =
        independent(&p_first, site_bit(1)) && independent(&p_second, site_bit(r + 1));

    if r > n {
        let union: Vec<i64> = p_first.iter().chain(&p_second).copied().collect();
        let disjoint = {
            let a: Vec<usize> = p_first.iter().map(|&j| g.wrap(j)).collect();
            p_second.iter().all(|&j| !a.contains(&g.wrap(j)))
        };
        if disjoint && marginals_ok && independent(&union, 0) {
            return Ok(CorrelationValue {
                value: 0.0,
                branch: CorrelationBranch::Zero,
            });
        }
    } else if r < spins - n + 1 {
        let l_set: Vec<i64> = (nn - ni + 2..=nn - ni + ri + 1).chain(2..=ri + 1).collect();
        if marginals_ok && independent(&l_set, 0) {
            let first: f64 = l_set.iter().map(|&l| cos(l)).product();
            let second: f64 = p_first.iter().map(|&l| cos(l)).product::<f64>()
                * p_second.iter().map(|&l| cos(l)).product::<f64>();
            return Ok(CorrelationValue {
                value: first - second,
                branch: CorrelationBranch::Formula,
            });
        }
    }
    let spec = HamiltonianSpec::site_single(n, couplings.to_vec())?;
    let state = crate::hamiltonian::evolve(&spec, t)?;
    Ok(CorrelationValue {
        value: correlation(&state, Axis::X, r)?,
        branch: CorrelationBranch::Oracle,
    })
}

// ---------------------------------------------------------------------------
// Bounds for H̄ₙ

/// `α = log₂(8/3)`.
pub fn alpha_lower() -> f64 {
    (8.0f64 / 3.0).log2()
}

/// The published pair `(1 - 4·(3/8)^{n-1}, 1 - 4·(1/4)^{n-1})`.
pub fn bounds_uniform_up_to(n: usize) -> (f64, f64) {
    let k = n as i32 - 1;
    (
        1.0 - 4.0 * (3.0f64 / 8.0).powi(k),
        1.0 - 4.0 * 0.25f64.powi(k),
    )
}

/// Bounds implied by `4^{n-1} <= ξ <= 6^{n-1}` when the average is normalized
/// by the `4^{2(n-1)}` pairs of neighbourhood configurations:
/// `(1 - (3/8)^{n-1}, 1 - (1/4)^{n-1})`.
pub fn bounds_uniform_up_to_pair_normalized(n: usize) -> (f64, f64) {
    let k = n as i32 - 1;
    (1.0 - (3.0f64 / 8.0).powi(k), 1.0 - 0.25f64.powi(k))
}
