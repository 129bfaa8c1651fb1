//! Time series of entanglement, finite-time statistics, settling times,
//! histograms, two-sample comparisons and exponent fits.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::closed_form::{EvolutionFormula, EvolutionMethod};
use crate::degeneracy::{exact_infinite_avg, exact_infinite_avg_with, DegeneracyMode, Enumeration};
use crate::error::{Error, Result};
use crate::hamiltonian::{eigenphase_table, HamiltonianKind, HamiltonianSpec};
use crate::oracle::meyer_wallach;
use crate::random::SeededSampler;

/// Sample times on `[0, t_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub t_max: f64,
    pub samples: usize,
    /// Stratified jitter: one uniform draw inside each of `samples` equal
    /// cells. `None` gives the evenly spaced grid including both endpoints.
    pub jitter_seed: Option<u64>,
}

impl TimeGrid {
    pub fn uniform(t_max: f64, samples: usize) -> Result<Self> {
        let grid = Self {
            t_max,
            samples,
            jitter_seed: None,
        };
        grid.validate()?;
        Ok(grid)
    }

    pub fn jittered(t_max: f64, samples: usize, seed: u64) -> Result<Self> {
        let grid = Self {
            t_max,
            samples,
            jitter_seed: Some(seed),
        };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<()> {
        if self.samples < 2 {
            return Err(Error::input(format!(
                "time grid needs >= 2 samples, got {}",
                self.samples
            )));
        }
        if !(self.t_max.is_finite() && self.t_max > 0.0) {
            return Err(Error::input(format!(
                "t_max must be positive, got {}",
                self.t_max
            )));
        }
        Ok(())
    }

    /// Times in ascending order.
    pub fn times(&self) -> Vec<f64> {
        let m = self.samples;
        match self.jitter_seed {
            None => (0..m)
                .map(|k| self.t_max * k as f64 / (m - 1) as f64)
                .collect(),
            Some(seed) => {
                let mut rng = SeededSampler::new(seed).rng();
                let cell = self.t_max / m as f64;
                (0..m)
                    .map(|k| (cell * (k as f64 + rng.random::<f64>())).min(self.t_max))
                    .collect()
            }
        }
    }
}

/// Which evaluation path produced a series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeriesPath {
    ClosedForm(EvolutionMethod),
    Oracle,
}

impl SeriesPath {
    pub fn label(&self) -> &'static str {
        match self {
            SeriesPath::ClosedForm(EvolutionMethod::CosPower) => "cos_power",
            SeriesPath::ClosedForm(EvolutionMethod::SiteProduct) => "site_product",
            SeriesPath::ClosedForm(EvolutionMethod::ReducedPhaseSum) => "reduced_phase_sum",
            SeriesPath::Oracle => "oracle",
        }
    }
}

/// `E_MW(t)` sampled on a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntanglementSeries {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub mean: f64,
    pub std: f64,
    pub kind: HamiltonianKind,
    pub spins: usize,
    pub order: usize,
    pub path: SeriesPath,
}

impl EntanglementSeries {
    fn new(
        spec: &HamiltonianSpec,
        times: Vec<f64>,
        values: Vec<f64>,
        path: SeriesPath,
    ) -> Result<Self> {
        let (mean, std) = finite_stats(&values)?;
        Ok(Self {
            times,
            values,
            mean,
            std,
            kind: spec.kind(),
            spins: spec.spins(),
            order: spec.order(),
            path,
        })
    }
}

/// `E_MW` on the grid via the closed forms.
pub fn series(spec: &HamiltonianSpec, grid: &TimeGrid) -> Result<EntanglementSeries> {
    grid.validate()?;
    let formula = EvolutionFormula::for_spec(spec)?;
    let times = grid.times();
    let values = times.par_iter().map(|&t| formula.emw(t)).collect();
    EntanglementSeries::new(
        spec,
        times,
        values,
        SeriesPath::ClosedForm(formula.method()),
    )
}

/// `E_MW` on the grid via dense state vectors; subject to the brute-force cap.
pub fn series_oracle(spec: &HamiltonianSpec, grid: &TimeGrid) -> Result<EntanglementSeries> {
    grid.validate()?;
    let table = eigenphase_table(spec)?;
    let times = grid.times();
    let values = times
        .par_iter()
        .map(|&t| meyer_wallach(&table.evolve_plus(t)))
        .collect::<Result<_>>()?;
    EntanglementSeries::new(spec, times, values, SeriesPath::Oracle)
}

/// Arithmetic mean and population standard deviation.
pub fn finite_stats(values: &[f64]) -> Result<(f64, f64)> {
    if values.is_empty() {
        return Err(Error::input("statistics of an empty series"));
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    Ok((mean, var.sqrt()))
}

/// Running means `(1/(k+1)) Σ_{i<=k} v_i`.
pub fn running_mean(values: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    values
        .iter()
        .enumerate()
        .map(|(k, v)| {
            acc += v;
            acc / (k + 1) as f64
        })
        .collect()
}

/// Outcome of a settling-time estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TauEstimate {
    Reached(f64),
    NotReached,
}

impl TauEstimate {
    pub fn time(&self) -> Option<f64> {
        match self {
            TauEstimate::Reached(t) => Some(*t),
            TauEstimate::NotReached => None,
        }
    }
}

/// Earliest grid time after which the running average stays within
/// `delta · (1 - target)` of `target`.
pub fn settling_time(
    times: &[f64],
    values: &[f64],
    target: f64,
    delta: f64,
) -> Result<TauEstimate> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::input(format!(
            "delta must lie in (0, 1), got {delta}"
        )));
    }
    if times.len() != values.len() || times.is_empty() {
        return Err(Error::input(
            "times and values must be non-empty and paired",
        ));
    }
    let band = delta * (1.0 - target).abs();
    let running = running_mean(values);
    // Walk backwards to the last point outside the band.
    let first_inside = match running.iter().rposition(|r| (r - target).abs() > band) {
        None => 0,
        Some(k) if k + 1 == running.len() => return Ok(TauEstimate::NotReached),
        Some(k) => k + 1,
    };
    Ok(TauEstimate::Reached(times[first_inside]))
}

/// Settling time of `E_MW` towards the exact infinite-time average.
pub fn estimate_tau_inf(
    spec: &HamiltonianSpec,
    grid: &TimeGrid,
    delta: f64,
) -> Result<TauEstimate> {
    let target = exact_infinite_avg(spec)?;
    let s = series(spec, grid)?;
    settling_time(&s.times, &s.values, target, delta)
}

/// [`estimate_tau_inf`] with the target counted in `mode`; numeric counting
/// is the right target when the strengths have rational ratios.
pub fn estimate_tau_inf_with(
    spec: &HamiltonianSpec,
    grid: &TimeGrid,
    delta: f64,
    mode: DegeneracyMode,
) -> Result<TauEstimate> {
    let target = exact_infinite_avg_with(spec, Enumeration::Reduced, mode)?;
    let s = series(spec, grid)?;
    settling_time(&s.times, &s.values, target, delta)
}

/// Histogram plus first two moments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistributionStats {
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
    pub mean: f64,
    pub std: f64,
    pub count: usize,
}

impl DistributionStats {
    pub fn occupied_bins(&self) -> usize {
        self.counts.iter().filter(|&&c| c > 0).count()
    }

    /// Index of the fullest bin.
    pub fn mode_bin(&self) -> usize {
        let mut best = 0;
        for (i, &c) in self.counts.iter().enumerate() {
            if c > self.counts[best] {
                best = i;
            }
        }
        best
    }
}

/// Equal-width histogram over `range`, or over `[min, max]` of the samples.
pub fn histogram(
    samples: &[f64],
    bins: usize,
    range: Option<(f64, f64)>,
) -> Result<DistributionStats> {
    if samples.is_empty() {
        return Err(Error::input("histogram of no samples"));
    }
    if bins < 2 {
        return Err(Error::input(format!(
            "histogram needs >= 2 bins, got {bins}"
        )));
    }
    let (lo, hi) = match range {
        Some((lo, hi)) if lo < hi => (lo, hi),
        Some((lo, hi)) => return Err(Error::input(format!("empty histogram range [{lo}, {hi}]"))),
        None => {
            let lo = samples.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = samples.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if lo < hi {
                (lo, hi)
            } else {
                let pad = (lo.abs() * 1e-9).max(1e-12);
                (lo - pad, hi + pad)
            }
        }
    };
    let width = (hi - lo) / bins as f64;
    let edges: Vec<f64> = (0..=bins).map(|k| lo + width * k as f64).collect();
    let mut counts = vec![0u64; bins];
    for &x in samples {
        if x < lo || x > hi {
            continue;
        }
        let k = (((x - lo) / width) as usize).min(bins - 1);
        counts[k] += 1;
    }
    let (mean, std) = finite_stats(samples)?;
    Ok(DistributionStats {
        edges,
        counts,
        mean,
        std,
        count: samples.len(),
    })
}

/// Kolmogorov-Smirnov statistic and asymptotic p-value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KsTest {
    pub statistic: f64,
    pub p_value: f64,
}

/// `Q_KS(λ) = 2 Σ_{k>=1} (-1)^{k-1} exp(-2k²λ²)`.
fn kolmogorov_q(lambda: f64) -> f64 {
    if lambda < 1e-3 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for k in 1..=200 {
        let term = (-2.0 * (k * k) as f64 * lambda * lambda).exp();
        sum += sign * term;
        if term < 1e-16 {
            break;
        }
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

fn ks_p_value(d: f64, effective_n: f64) -> f64 {
    let root = effective_n.sqrt();
    kolmogorov_q((root + 0.12 + 0.11 / root) * d)
}

/// Two-sample KS test.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<KsTest> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::input("KS test needs two non-empty samples"));
    }
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    x.sort_by(f64::total_cmp);
    y.sort_by(f64::total_cmp);
    let (na, nb) = (x.len() as f64, y.len() as f64);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < x.len() && j < y.len() {
        let v = x[i].min(y[j]);
        while i < x.len() && x[i] <= v {
            i += 1;
        }
        while j < y.len() && y[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    Ok(KsTest {
        statistic: d,
        p_value: ks_p_value(d, na * nb / (na + nb)),
    })
}

/// One-sample KS test against a continuous CDF.
pub fn ks_one_sample(samples: &[f64], cdf: impl Fn(f64) -> f64) -> Result<KsTest> {
    if samples.is_empty() {
        return Err(Error::input("KS test needs samples"));
    }
    let mut x = samples.to_vec();
    x.sort_by(f64::total_cmp);
    let n = x.len() as f64;
    let d = x
        .iter()
        .enumerate()
        .map(|(k, &v)| {
            let f = cdf(v);
            (f - k as f64 / n).abs().max(((k + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max);
    Ok(KsTest {
        statistic: d,
        p_value: ks_p_value(d, n),
    })
}

/// What the abscissa of an exponent fit is.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitAxis {
    /// `deficit = β / 2^{α n}`.
    Order,
    /// `deficit = β / 2^{α (n-1)}`.
    OrderMinusOne,
}

/// Least-squares fit of `log₂ deficit = log₂ β - α x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    /// `α`, the decay exponent (positive for decaying deficits).
    pub exponent: f64,
    /// `β`.
    pub prefactor: f64,
    /// Root-mean-square residual in `log₂` units.
    pub residual: f64,
    pub points: usize,
}

pub fn fit_exponent(points: &[(usize, f64)], axis: FitAxis) -> Result<ScalingFit> {
    if points.len() < 3 {
        return Err(Error::input(format!(
            "exponent fit needs >= 3 points, got {}",
            points.len()
        )));
    }
    if let Some(&(n, d)) = points.iter().find(|&&(_, d)| !(d > 0.0 && d.is_finite())) {
        return Err(Error::input(format!(
            "deficit at n = {n} must be positive, got {d}"
        )));
    }
    let xy: Vec<(f64, f64)> = points
        .iter()
        .map(|&(n, d)| {
            let x = match axis {
                FitAxis::Order => n as f64,
                FitAxis::OrderMinusOne => n as f64 - 1.0,
            };
            (x, d.log2())
        })
        .collect();
    let k = xy.len() as f64;
    let mx = xy.iter().map(|p| p.0).sum::<f64>() / k;
    let my = xy.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = xy.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::input(
            "exponent fit needs at least two distinct orders",
        ));
    }
    let sxy: f64 = xy.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = (xy
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).powi(2))
        .sum::<f64>()
        / k)
        .sqrt();
    Ok(ScalingFit {
        exponent: -slope,
        prefactor: intercept.exp2(),
        residual,
        points: points.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closed_form::{avg_uniform_single, emw_uniform_single, std_uniform_single};
    use std::f64::consts::PI;

    #[test]
    fn grid_shapes() {
        let g = TimeGrid::uniform(2.0, 5).unwrap();
        assert_eq!(g.times(), vec![0.0, 0.5, 1.0, 1.5, 2.0]);
        let j = TimeGrid::jittered(2.0, 100, 4).unwrap().times();
        assert!(j.windows(2).all(|w| w[0] <= w[1]));
        assert!(j.iter().all(|&t| (0.0..=2.0).contains(&t)));
        assert!(TimeGrid::uniform(1.0, 1).is_err());
        assert!(TimeGrid::uniform(0.0, 10).is_err());
    }

    #[test]
    fn series_of_uniform_pair() {
        let spec = HamiltonianSpec::uniform_single(6, 2, 1.0).unwrap();
        let grid = TimeGrid::uniform(PI / 2.0, 101).unwrap();
        let s = series(&spec, &grid).unwrap();
        for (t, v) in s.times.iter().zip(&s.values) {
            assert!((v - emw_uniform_single(2, 1.0, *t)).abs() < 1e-14);
            assert!((0.0..=1.0).contains(v));
        }
        let o = series_oracle(&spec, &grid).unwrap();
        for (a, b) in s.values.iter().zip(&o.values) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn zero_couplings_give_flat_series() {
        let spec = HamiltonianSpec::site_single(3, vec![0.0; 7]).unwrap();
        let s = series(&spec, &TimeGrid::uniform(10.0, 50).unwrap()).unwrap();
        assert!(s.values.iter().all(|&v| v.abs() < 1e-15));
        assert_eq!(s.std, 0.0);
    }

    #[test]
    fn one_period_quadrature() {
        // Endpoint-free uniform grid over one period π/2 of h̄₂.
        let m = 100_000;
        let values: Vec<f64> = (0..m)
            .map(|k| emw_uniform_single(2, 1.0, PI / 2.0 * k as f64 / m as f64))
            .collect();
        let (mean, std) = finite_stats(&values).unwrap();
        assert!((mean - avg_uniform_single(2).exact).abs() < 1e-4);
        assert!((std - std_uniform_single(2)).abs() < 1e-3);
        let spec = HamiltonianSpec::uniform_single(6, 2, 1.0).unwrap();
        let s = series(&spec, &TimeGrid::uniform(PI / 2.0, m).unwrap()).unwrap();
        assert!((s.mean - 0.625).abs() < 1e-4);
    }

    #[test]
    fn constant_series_settles_immediately() {
        let times = vec![0.0, 1.0, 2.0, 3.0];
        let values = vec![0.5; 4];
        assert_eq!(
            settling_time(&times, &values, 0.5, 0.05).unwrap(),
            TauEstimate::Reached(0.0)
        );
        let rising = vec![0.0, 0.0, 0.0, 0.0];
        assert_eq!(
            settling_time(&times, &rising, 0.5, 0.05).unwrap(),
            TauEstimate::NotReached
        );
        assert!(settling_time(&times, &values, 0.5, 1.5).is_err());
    }

    #[test]
    fn histogram_basics() {
        let h = histogram(&[0.3; 10], 5, None).unwrap();
        assert_eq!(h.occupied_bins(), 1);
        assert_eq!(h.counts.iter().sum::<u64>(), 10);
        assert!(h.edges.windows(2).all(|w| w[0] < w[1]));
        let h = histogram(&[0.0, 0.1, 0.5, 1.0], 4, Some((0.0, 1.0))).unwrap();
        assert_eq!(h.counts, vec![2, 0, 1, 1]);
        assert!(histogram(&[], 4, None).is_err());
        assert!(histogram(&[0.1], 1, None).is_err());
    }

    #[test]
    fn ks_identical_and_shifted() {
        let a: Vec<f64> = (0..500).map(|k| k as f64 / 500.0).collect();
        let same = ks_two_sample(&a, &a).unwrap();
        assert_eq!(same.statistic, 0.0);
        assert!(same.p_value > 0.99);
        let b: Vec<f64> = a.iter().map(|x| x + 0.3).collect();
        let far = ks_two_sample(&a, &b).unwrap();
        assert!((far.statistic - 0.3).abs() < 0.01);
        assert!(far.p_value < 1e-6);
        let u = ks_one_sample(&a, |x| x.clamp(0.0, 1.0)).unwrap();
        assert!(u.statistic <= 1.0 / 500.0 + 1e-12);
    }

    #[test]
    fn exact_synthetic_fit() {
        let pts: Vec<(usize, f64)> = (2..8)
            .map(|n| (n, 1.4 / 2f64.powf(2.0 * (n - 1) as f64)))
            .collect();
        let fit = fit_exponent(&pts, FitAxis::OrderMinusOne).unwrap();
        assert!((fit.exponent - 2.0).abs() < 1e-6);
        assert!((fit.prefactor - 1.4).abs() < 1e-6);
        assert!(fit.residual < 1e-9);
        assert!(fit_exponent(&pts[..2], FitAxis::Order).is_err());
        assert!(fit_exponent(&[(2, 0.1), (3, 0.0), (4, 0.01)], FitAxis::Order).is_err());
    }

    #[test]
    fn uniform_single_averages_decay_polynomially() {
        let pts: Vec<(usize, f64)> = (2..=8)
            .map(|n| (n, 1.0 - avg_uniform_single(n).exact))
            .collect();
        let fit = fit_exponent(&pts, FitAxis::Order).unwrap();
        assert!(fit.exponent < 0.5, "slope {}", fit.exponent);
    }
}
