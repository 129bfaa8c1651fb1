//! The four Ising-type Hamiltonian families and their diagonal spectra.
//!
//! Every Hamiltonian here is a sum of `σᶻ…σᶻ` strings on consecutive sites of
//! a periodic chain, optionally plus single-site `σᶻ` fields:
//!
//! ```text
//! H = Σ_m Δ_m Σ_j J⁽ᵐ⁾_j σᶻ_j ⋯ σᶻ_{j+m-1} + Σ_j b_j σᶻ_j
//! ```
//!
//! Single-order kinds carry one order `n` with `Δ_n = 1`; up-to kinds carry
//! orders `2..=n` weighted by a [`StrengthSchedule`]. The Hamiltonian is
//! diagonal in the computational basis, so time evolution from `|+⟩^⊗N` is
//! pure phase accumulation.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chain::{mask_parity, ChainGeometry};
use crate::error::{Error, Result};
use crate::state::StateVector;

/// Which of the four Hamiltonian families a spec describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HamiltonianKind {
    /// `h̄ₙ`: a single order with one coupling `J` on every site.
    UniformSingle,
    /// `hₙ`: a single order with site-dependent couplings.
    SiteSingle,
    /// `H̄ₙ`: orders `2..=n`, uniform couplings per order.
    UniformUpTo,
    /// `Hₙ`: orders `2..=n`, site-dependent couplings per order.
    SiteUpTo,
}

impl HamiltonianKind {
    pub const ALL: [HamiltonianKind; 4] = [
        Self::UniformSingle,
        Self::SiteSingle,
        Self::UniformUpTo,
        Self::SiteUpTo,
    ];

    pub fn is_uniform(self) -> bool {
        matches!(self, Self::UniformSingle | Self::UniformUpTo)
    }

    pub fn is_single(self) -> bool {
        matches!(self, Self::UniformSingle | Self::SiteSingle)
    }

    pub fn label(self) -> &'static str {
        match self {
            Self::UniformSingle => "uniform_single",
            Self::SiteSingle => "site_single",
            Self::UniformUpTo => "uniform_up_to",
            Self::SiteUpTo => "site_up_to",
        }
    }
}

/// Coupling sequences `J⁽ᵐ⁾_1..J⁽ᵐ⁾_N` keyed by interaction order `m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplingProfile {
    spins: usize,
    by_order: BTreeMap<usize, Vec<f64>>,
}

impl CouplingProfile {
    pub fn new(spins: usize) -> Self {
        Self {
            spins,
            by_order: BTreeMap::new(),
        }
    }

    /// Constant coupling `j` on every site for each order in `orders`.
    pub fn uniform(spins: usize, orders: impl IntoIterator<Item = usize>, j: f64) -> Self {
        let mut profile = Self::new(spins);
        for m in orders {
            profile.by_order.insert(m, vec![j; spins]);
        }
        profile
    }

    /// Independent Gaussian couplings, mean `mean` and standard deviation `std`,
    /// drawn order by order and site by site. Draws are not truncated.
    pub fn gaussian<R: Rng + ?Sized>(
        spins: usize,
        orders: impl IntoIterator<Item = usize>,
        mean: f64,
        std: f64,
        rng: &mut R,
    ) -> Result<Self> {
        let normal = Normal::new(mean, std)
            .map_err(|e| Error::input(format!("bad coupling distribution: {e}")))?;
        let mut profile = Self::new(spins);
        for m in orders {
            let seq = (0..spins).map(|_| normal.sample(rng)).collect();
            profile.by_order.insert(m, seq);
        }
        Ok(profile)
    }

    /// Sets the coupling sequence of order `m`.
    pub fn with_order(mut self, m: usize, couplings: Vec<f64>) -> Result<Self> {
        if couplings.len() != self.spins {
            return Err(Error::input(format!(
                "order {m}: {} couplings for {} spins",
                couplings.len(),
                self.spins
            )));
        }
        self.by_order.insert(m, couplings);
        Ok(self)
    }

    pub fn spins(&self) -> usize {
        self.spins
    }

    pub fn order(&self, m: usize) -> Option<&[f64]> {
        self.by_order.get(&m).map(Vec::as_slice)
    }

    pub fn orders(&self) -> impl Iterator<Item = usize> + '_ {
        self.by_order.keys().copied()
    }

    /// Multiplies every coupling by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        let by_order = self
            .by_order
            .iter()
            .map(|(&m, seq)| (m, seq.iter().map(|j| j * c).collect()))
            .collect();
        Self {
            spins: self.spins,
            by_order,
        }
    }
}

/// Strengths `Δ_m` of the order-`m` terms of an up-to Hamiltonian.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "schedule", rename_all = "snake_case")]
pub enum StrengthSchedule {
    /// `Δ_m = 2ε / m`.
    Polynomial { epsilon: f64 },
    /// `Δ_m = 2ε · base^(-m)`; the usual choice is `base = 2`.
    Exponential { epsilon: f64, base: f64 },
    /// Explicit `Δ_2, Δ_3, …`.
    Custom { deltas: Vec<f64> },
}

impl StrengthSchedule {
    /// `ε = √3/10`, the value used for the reference up-to runs.
    pub fn reference_epsilon() -> f64 {
        3f64.sqrt() / 10.0
    }

    pub fn polynomial(epsilon: f64) -> Self {
        Self::Polynomial { epsilon }
    }

    pub fn exponential(epsilon: f64) -> Self {
        Self::Exponential { epsilon, base: 2.0 }
    }

    /// `Δ_m`, or `None` when a custom schedule is too short.
    pub fn delta(&self, m: usize) -> Option<f64> {
        match self {
            Self::Polynomial { epsilon } => Some(2.0 * epsilon / m as f64),
            Self::Exponential { epsilon, base } => Some(2.0 * epsilon * base.powi(-(m as i32))),
            Self::Custom { deltas } => m.checked_sub(2).and_then(|i| deltas.get(i)).copied(),
        }
    }

    fn validate(&self, n: usize) -> Result<()> {
        match self {
            Self::Polynomial { epsilon } | Self::Exponential { epsilon, .. }
                if !(epsilon.is_finite() && *epsilon > 0.0) =>
            {
                return Err(Error::input(format!(
                    "epsilon must be positive, got {epsilon}"
                )));
            }
            Self::Exponential { base, .. } if !(base.is_finite() && *base > 0.0) => {
                return Err(Error::input(format!(
                    "decay base must be positive, got {base}"
                )));
            }
            _ => {}
        }
        for m in 2..=n {
            match self.delta(m) {
                Some(d) if d.is_finite() && d >= 0.0 => {}
                Some(d) => {
                    return Err(Error::input(format!("Δ_{m} = {d} is not a valid strength")))
                }
                None => return Err(Error::input(format!("schedule has no Δ_{m}"))),
            }
        }
        Ok(())
    }
}

/// Single-site fields `b_1..b_N`. They commute with every coupling term and
/// only add local phases.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalFields(pub Vec<f64>);

impl LocalFields {
    pub fn zero(spins: usize) -> Self {
        Self(vec![0.0; spins])
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&b| b == 0.0)
    }

    pub fn energy(&self, a: u64) -> f64 {
        self.0
            .iter()
            .enumerate()
            .map(|(i, &b)| if a & (1 << i) != 0 { b } else { -b })
            .sum()
    }
}

/// One `Δ · J_j · σᶻ_j⋯σᶻ_{j+m-1}` term, stored with its window mask.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Term {
    pub order: usize,
    /// Starting site `j`, 1-based.
    pub start: usize,
    pub mask: u64,
    /// `Δ_m J⁽ᵐ⁾_j`.
    pub weight: f64,
}

/// A fully specified Ising-type Hamiltonian.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HamiltonianSpec {
    kind: HamiltonianKind,
    order: usize,
    geometry: ChainGeometry,
    couplings: CouplingProfile,
    strengths: Option<StrengthSchedule>,
    fields: LocalFields,
}

impl HamiltonianSpec {
    pub fn new(
        kind: HamiltonianKind,
        order: usize,
        geometry: ChainGeometry,
        couplings: CouplingProfile,
        strengths: Option<StrengthSchedule>,
    ) -> Result<Self> {
        let spec = Self {
            kind,
            order,
            geometry,
            fields: LocalFields::zero(geometry.spins()),
            couplings,
            strengths,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// `h̄ₙ = J Σ_j σᶻ_j⋯σᶻ_{j+n-1}`.
    pub fn uniform_single(spins: usize, n: usize, j: f64) -> Result<Self> {
        let geometry = ChainGeometry::new(spins)?;
        Self::new(
            HamiltonianKind::UniformSingle,
            n,
            geometry,
            CouplingProfile::uniform(spins, [n], j),
            None,
        )
    }

    /// `hₙ = Σ_j J_j σᶻ_j⋯σᶻ_{j+n-1}`.
    pub fn site_single(n: usize, couplings: Vec<f64>) -> Result<Self> {
        let geometry = ChainGeometry::new(couplings.len())?;
        let profile = CouplingProfile::new(couplings.len()).with_order(n, couplings)?;
        Self::new(HamiltonianKind::SiteSingle, n, geometry, profile, None)
    }

    /// `H̄ₙ = Σ_{m=2}^n Δ_m h̄_m` with the same `J` at every order.
    pub fn uniform_up_to(
        spins: usize,
        n: usize,
        j: f64,
        strengths: StrengthSchedule,
    ) -> Result<Self> {
        let geometry = ChainGeometry::new(spins)?;
        Self::new(
            HamiltonianKind::UniformUpTo,
            n,
            geometry,
            CouplingProfile::uniform(spins, 2..=n, j),
            Some(strengths),
        )
    }

    /// `Hₙ = Σ_{m=2}^n Δ_m h_m` with site-dependent couplings at every order.
    pub fn site_up_to(
        n: usize,
        couplings: CouplingProfile,
        strengths: StrengthSchedule,
    ) -> Result<Self> {
        let geometry = ChainGeometry::new(couplings.spins())?;
        Self::new(
            HamiltonianKind::SiteUpTo,
            n,
            geometry,
            couplings,
            Some(strengths),
        )
    }

    /// A spec of any kind: coupling `j` everywhere for uniform kinds,
    /// Gaussian couplings with mean `j` and standard deviation `|j|/2` for
    /// site-dependent kinds. Single kinds ignore `strengths`.
    pub fn family<R: Rng + ?Sized>(
        kind: HamiltonianKind,
        spins: usize,
        n: usize,
        j: f64,
        strengths: StrengthSchedule,
        rng: &mut R,
    ) -> Result<Self> {
        match kind {
            HamiltonianKind::UniformSingle => Self::uniform_single(spins, n, j),
            HamiltonianKind::UniformUpTo => Self::uniform_up_to(spins, n, j, strengths),
            HamiltonianKind::SiteSingle => {
                let profile = CouplingProfile::gaussian(spins, [n], j, 0.5 * j.abs(), rng)?;
                let couplings = profile.order(n).unwrap_or_default().to_vec();
                Self::site_single(n, couplings)
            }
            HamiltonianKind::SiteUpTo => {
                let profile = CouplingProfile::gaussian(spins, 2..=n, j, 0.5 * j.abs(), rng)?;
                Self::site_up_to(n, profile, strengths)
            }
        }
    }

    pub fn with_fields(mut self, fields: LocalFields) -> Result<Self> {
        if fields.0.len() != self.geometry.spins() {
            return Err(Error::input(format!(
                "{} fields for {} spins",
                fields.0.len(),
                self.geometry.spins()
            )));
        }
        if fields.0.iter().any(|b| !b.is_finite()) {
            return Err(Error::input("local fields must be finite"));
        }
        self.fields = fields;
        Ok(self)
    }

    /// Replaces the brute-force cap of the underlying geometry.
    pub fn with_cap(mut self, cap: usize) -> Result<Self> {
        self.geometry = ChainGeometry::with_cap(self.geometry.spins(), cap)?;
        Ok(self)
    }

    /// Multiplies every coupling constant by `c`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        let mut spec = self.clone();
        spec.couplings = self.couplings.scaled(c);
        spec.validate()?;
        Ok(spec)
    }

    fn validate(&self) -> Result<()> {
        let spins = self.geometry.spins();
        let n = self.order;
        if n < 2 || n > spins {
            return Err(Error::input(format!("order n = {n} outside 2..={spins}")));
        }
        if self.couplings.spins() != spins {
            return Err(Error::input(
                "coupling profile length does not match the chain",
            ));
        }
        let orders: Vec<usize> = if self.kind.is_single() {
            vec![n]
        } else {
            (2..=n).collect()
        };
        let stored: Vec<usize> = self.couplings.orders().collect();
        if stored != orders {
            return Err(Error::input(format!(
                "{} with n = {n} needs couplings for orders {orders:?}, got {stored:?}",
                self.kind.label()
            )));
        }
        for &m in &orders {
            let seq = self.couplings.order(m).unwrap_or_default();
            if seq.iter().any(|j| !j.is_finite()) {
                return Err(Error::input(format!("order {m} has a non-finite coupling")));
            }
            if self.kind.is_uniform() && seq.iter().any(|&j| j != seq[0]) {
                return Err(Error::input(format!(
                    "uniform kind with non-constant couplings at order {m}"
                )));
            }
        }
        match (&self.strengths, self.kind.is_single()) {
            (Some(_), true) => {
                return Err(Error::input("single-order kinds take no strength schedule"))
            }
            (None, false) => return Err(Error::input("up-to kinds need a strength schedule")),
            (Some(s), false) => s.validate(n)?,
            (None, true) => {}
        }
        Ok(())
    }

    pub fn kind(&self) -> HamiltonianKind {
        self.kind
    }

    /// Largest interaction order `n`.
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn geometry(&self) -> &ChainGeometry {
        &self.geometry
    }

    pub fn spins(&self) -> usize {
        self.geometry.spins()
    }

    pub fn couplings(&self) -> &CouplingProfile {
        &self.couplings
    }

    pub fn strengths(&self) -> Option<&StrengthSchedule> {
        self.strengths.as_ref()
    }

    pub fn fields(&self) -> &LocalFields {
        &self.fields
    }

    /// `(m, Δ_m)` for every order present; single kinds yield `(n, 1)`.
    pub fn strength_terms(&self) -> Vec<(usize, f64)> {
        match &self.strengths {
            None => vec![(self.order, 1.0)],
            Some(s) => (2..=self.order)
                .map(|m| (m, s.delta(m).expect("validated schedule")))
                .collect(),
        }
    }

    /// All coupling terms in the fixed summation order: ascending `m`, then `j`.
    pub fn terms(&self) -> Vec<Term> {
        let mut terms = Vec::new();
        for (m, delta) in self.strength_terms() {
            let seq = self.couplings.order(m).expect("validated profile");
            for (idx, &j) in seq.iter().enumerate() {
                let start = idx + 1;
                terms.push(Term {
                    order: m,
                    start,
                    mask: self.geometry.window_mask(start as i64, m),
                    weight: delta * j,
                });
            }
        }
        terms
    }

    /// Largest |coupling| times its strength, a natural frequency scale.
    pub fn energy_scale(&self) -> f64 {
        self.terms()
            .iter()
            .map(|t| t.weight.abs())
            .fold(0.0, f64::max)
    }
}

/// `E_a` for basis state `a`:
/// `Σ_m Δ_m Σ_j J⁽ᵐ⁾_j Π_{k=j}^{j+m-1} (2a_k - 1) + Σ_j b_j (2a_j - 1)`.
pub fn eigenenergy(spec: &HamiltonianSpec, a: u64) -> Result<f64> {
    let spins = spec.spins();
    if spins < 64 && a >> spins != 0 {
        return Err(Error::input(format!(
            "basis index {a} outside 0..2^{spins}"
        )));
    }
    Ok(energy_unchecked(spec, &spec.terms_by_order(), a))
}

impl HamiltonianSpec {
    /// Terms grouped per order, each group paired with its `Δ_m`.
    fn terms_by_order(&self) -> Vec<(f64, Vec<(u64, f64)>)> {
        self.strength_terms()
            .into_iter()
            .map(|(m, delta)| {
                let seq = self.couplings.order(m).expect("validated profile");
                let group = seq
                    .iter()
                    .enumerate()
                    .map(|(idx, &j)| (self.geometry.window_mask(idx as i64 + 1, m), j))
                    .collect();
                (delta, group)
            })
            .collect()
    }
}

fn energy_unchecked(spec: &HamiltonianSpec, groups: &[(f64, Vec<(u64, f64)>)], a: u64) -> f64 {
    let mut energy = 0.0;
    for (delta, group) in groups {
        let inner: f64 = group
            .iter()
            .map(|&(mask, j)| j * f64::from(mask_parity(a, mask)))
            .sum();
        energy += delta * inner;
    }
    if !spec.fields.is_zero() {
        energy += spec.fields.energy(a);
    }
    energy
}

/// Eigenenergies `E_a` for every basis index of the chain.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenphaseTable {
    spins: usize,
    energies: Vec<f64>,
}

impl EigenphaseTable {
    pub fn from_energies(spins: usize, energies: Vec<f64>) -> Result<Self> {
        if energies.len() != 1usize << spins {
            return Err(Error::input(format!(
                "{} energies for a {spins}-spin chain",
                energies.len()
            )));
        }
        Ok(Self { spins, energies })
    }

    pub fn spins(&self) -> usize {
        self.spins
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn get(&self, a: usize) -> f64 {
        self.energies[a]
    }

    pub fn len(&self) -> usize {
        self.energies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energies.is_empty()
    }

    /// Adds a constant to every eigenvalue.
    pub fn shifted(&self, shift: f64) -> Self {
        Self {
            spins: self.spins,
            energies: self.energies.iter().map(|e| e + shift).collect(),
        }
    }

    /// `exp(-i E_a t)` applied to the amplitudes of `initial`.
    pub fn evolve_state(&self, initial: &StateVector, t: f64) -> Result<StateVector> {
        if initial.spins() != self.spins {
            return Err(Error::input("state and table sizes differ"));
        }
        let amps = initial
            .amplitudes()
            .par_iter()
            .zip(self.energies.par_iter())
            .map(|(&c, &e)| c * Complex64::from_polar(1.0, -e * t))
            .collect();
        StateVector::from_amplitudes_unchecked(self.spins, amps)
    }

    /// `2^{-N/2} Σ_a exp(-i E_a t) |a⟩`, the evolved `|+⟩^⊗N`.
    pub fn evolve_plus(&self, t: f64) -> StateVector {
        let norm = (self.energies.len() as f64).sqrt().recip();
        let amps = self
            .energies
            .par_iter()
            .map(|&e| Complex64::from_polar(norm, -e * t))
            .collect();
        StateVector::from_amplitudes_unchecked(self.spins, amps).expect("length 2^N")
    }
}

/// Eigenenergies of every basis state; requires `N` within the brute-force cap.
pub fn eigenphase_table(spec: &HamiltonianSpec) -> Result<EigenphaseTable> {
    spec.geometry().check_brute_force("eigenphase table")?;
    let groups = spec.terms_by_order();
    let energies = (0..spec.geometry().dim() as u64)
        .into_par_iter()
        .map(|a| energy_unchecked(spec, &groups, a))
        .collect();
    Ok(EigenphaseTable {
        spins: spec.spins(),
        energies,
    })
}

/// `|Ψ(t)⟩ = e^{-iHt} |+⟩^⊗N`.
pub fn evolve(spec: &HamiltonianSpec, t: f64) -> Result<StateVector> {
    if !t.is_finite() {
        return Err(Error::input(format!("time {t} is not finite")));
    }
    Ok(eigenphase_table(spec)?.evolve_plus(t))
}
