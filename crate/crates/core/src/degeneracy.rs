//! Exact infinite-time averages by counting degenerate phase differences.
//!
//! With `B_l(t) = 2^{-K} Σ_x exp(-iθ_x t)`, the long-time average of
//! `|B_l|²` keeps exactly the pairs `(x, y)` with `θ_x = θ_y`, because
//! `lim (1/T)∫cos θt dt` is 1 for `θ = 0` and 0 otherwise. So
//! `⟨|B_l|²⟩_∞ = Σ_classes mult² / 4^K`.
//!
//! Equality of phase differences is decided symbolically by default: every
//! `θ` is an integer combination of coupling symbols (one per order for
//! uniform kinds, one per `(m, j)` term for site-dependent kinds), and two
//! phases are degenerate iff their coefficient vectors agree. This is the
//! generic-parameter answer. [`DegeneracyMode::Numeric`] instead groups the
//! actual floating-point phases, which also catches accidental degeneracies
//! such as rational ratios between strengths.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chain::{mask_parity, site_bit};
use crate::closed_form::MAX_REDUCED_WINDOW;
use crate::error::{Error, Result};
use crate::hamiltonian::{HamiltonianSpec, Term};

/// How phase equality is decided.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DegeneracyMode {
    /// Integer coefficient vectors over the coupling symbols.
    Symbolic,
    /// Actual phases equal within `tolerance × energy scale`.
    Numeric { tolerance: f64 },
}

/// Which strings are enumerated per site.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Enumeration {
    /// All `2^{N-1}` strings with `a_l = 0`; needs `N` within the cap.
    Full,
    /// Only the spins sharing a window with `l`.
    Reduced,
}

/// A degeneracy class key.
#[derive(Debug, Clone, PartialEq, PartialOrd, Serialize, Deserialize)]
pub enum PhaseKey {
    Symbolic(Vec<i32>),
    /// Smallest phase of a numerically merged cluster.
    Numeric(f64),
}

/// Degeneracy classes of one site.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SiteLedger {
    /// Number of enumerated strings (sum of multiplicities).
    pub strings: u64,
    pub classes: Vec<(PhaseKey, u64)>,
}

impl SiteLedger {
    /// Number of degenerate ordered pairs, `Σ mult²`.
    pub fn degenerate_pairs(&self) -> u128 {
        self.classes
            .iter()
            .map(|&(_, m)| u128::from(m) * u128::from(m))
            .sum()
    }

    /// `⟨|B_l|²⟩_∞ = Σ mult² / strings²`.
    pub fn coherence(&self) -> f64 {
        let s = self.strings as f64;
        self.degenerate_pairs() as f64 / (s * s)
    }
}

/// Per-site degeneracy classes of a Hamiltonian.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegeneracyLedger {
    pub mode: DegeneracyMode,
    pub enumeration: Enumeration,
    pub sites: Vec<SiteLedger>,
}

impl DegeneracyLedger {
    pub fn build(
        spec: &HamiltonianSpec,
        enumeration: Enumeration,
        mode: DegeneracyMode,
    ) -> Result<Self> {
        if enumeration == Enumeration::Full {
            spec.geometry().check_brute_force("full degeneracy count")?;
        }
        let terms = spec.terms();
        let scale = spec.energy_scale().max(f64::MIN_POSITIVE);
        let sites = (1..=spec.spins())
            .into_par_iter()
            .map(|l| site_ledger(spec, &terms, l, enumeration, mode, scale))
            .collect::<Result<_>>()?;
        Ok(Self {
            mode,
            enumeration,
            sites,
        })
    }

    /// `1 - (1/N) Σ_l ⟨|B_l|²⟩_∞`.
    pub fn infinite_avg(&self) -> f64 {
        let mean =
            self.sites.iter().map(SiteLedger::coherence).sum::<f64>() / self.sites.len() as f64;
        1.0 - mean
    }
}

fn site_ledger(
    spec: &HamiltonianSpec,
    terms: &[Term],
    l: usize,
    enumeration: Enumeration,
    mode: DegeneracyMode,
    scale: f64,
) -> Result<SiteLedger> {
    let bit = site_bit(l);
    let local: Vec<Term> = terms
        .iter()
        .filter(|t| t.mask & bit != 0 && t.weight != 0.0)
        .copied()
        .collect();

    let strings: Vec<u64> = match enumeration {
        Enumeration::Full => (0..1u64 << spec.spins()).filter(|a| a & bit == 0).collect(),
        Enumeration::Reduced => {
            let hood = local.iter().fold(0u64, |acc, t| acc | t.mask) & !bit;
            let sites: Vec<u64> = (0..64)
                .filter(|i| hood >> i & 1 == 1)
                .map(|i| 1u64 << i)
                .collect();
            if sites.len() > MAX_REDUCED_WINDOW {
                return Err(Error::input(format!(
                    "site {l} couples to {} spins; reduced counting caps at {MAX_REDUCED_WINDOW}",
                    sites.len()
                )));
            }
            (0..1u64 << sites.len())
                .map(|x| {
                    sites
                        .iter()
                        .enumerate()
                        .fold(0u64, |a, (i, &b)| if x >> i & 1 == 1 { a | b } else { a })
                })
                .collect()
        }
    };

    let classes = match mode {
        DegeneracyMode::Symbolic => {
            // Symbol slots: one per order for uniform kinds, one per term otherwise.
            let slot: Vec<usize> = if spec.kind().is_uniform() {
                let mut orders: Vec<usize> = local.iter().map(|t| t.order).collect();
                orders.dedup();
                local
                    .iter()
                    .map(|t| orders.iter().position(|&m| m == t.order).expect("present"))
                    .collect()
            } else {
                (0..local.len()).collect()
            };
            let width = slot.iter().max().map_or(0, |m| m + 1);
            let mut counts: BTreeMap<Vec<i32>, u64> = BTreeMap::new();
            for &a in &strings {
                let mut key = vec![0i32; width];
                for (t, &s) in local.iter().zip(&slot) {
                    key[s] += i32::from(mask_parity(a, t.mask));
                }
                *counts.entry(key).or_insert(0) += 1;
            }
            counts
                .into_iter()
                .map(|(k, m)| (PhaseKey::Symbolic(k), m))
                .collect()
        }
        DegeneracyMode::Numeric { tolerance } => {
            let mut thetas: Vec<f64> = strings
                .iter()
                .map(|&a| {
                    2.0 * local
                        .iter()
                        .map(|t| t.weight * f64::from(mask_parity(a, t.mask)))
                        .sum::<f64>()
                })
                .collect();
            thetas.sort_by(f64::total_cmp);
            let tol = tolerance * scale;
            let mut classes: Vec<(PhaseKey, u64)> = Vec::new();
            let mut last = f64::NEG_INFINITY;
            for th in thetas {
                if th - last <= tol {
                    classes.last_mut().expect("open cluster").1 += 1;
                } else {
                    classes.push((PhaseKey::Numeric(th), 1));
                }
                last = th;
            }
            classes
        }
    };
    Ok(SiteLedger {
        strings: strings.len() as u64,
        classes,
    })
}

/// Exact infinite-time average of `E_MW` under the generic-parameter
/// assumption, enumerating all `2^{N-1}` strings per site.
pub fn exact_infinite_avg(spec: &HamiltonianSpec) -> Result<f64> {
    Ok(DegeneracyLedger::build(spec, Enumeration::Full, DegeneracyMode::Symbolic)?.infinite_avg())
}

/// Same as [`exact_infinite_avg`] with explicit enumeration and mode.
pub fn exact_infinite_avg_with(
    spec: &HamiltonianSpec,
    enumeration: Enumeration,
    mode: DegeneracyMode,
) -> Result<f64> {
    Ok(DegeneracyLedger::build(spec, enumeration, mode)?.infinite_avg())
}
