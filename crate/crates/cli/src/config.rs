//! Experiment configuration, read from JSON. Every field has a default, so
//! `{}` is a valid config.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use mbent::{HamiltonianKind, StrengthSchedule};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

/// Which evaluation path `evolve` uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeriesMethod {
    ClosedForm,
    Oracle,
    Both,
}

/// Which ensemble `distribution` histograms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Ensemble {
    /// Haar-random states.
    Typical,
    /// `E_MW(t)` over jittered times for the configured Hamiltonian.
    Time,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub t_max: f64,
    pub samples: usize,
    pub jitter: bool,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            t_max: 10.0,
            samples: 1001,
            jitter: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
#[derive(Default)]
pub struct CorrelateConfig {
    /// Distances `r`; empty means `1..=N/2-1`.
    pub distances: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DistributionConfig {
    pub ensemble: Ensemble,
    pub samples: usize,
    pub bins: usize,
    /// Fixed histogram range; `None` spans the samples.
    pub range: Option<(f64, f64)>,
}

impl Default for DistributionConfig {
    fn default() -> Self {
        Self {
            ensemble: Ensemble::Typical,
            samples: 10_000,
            bins: 50,
            range: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TableConfig {
    pub families: Vec<HamiltonianKind>,
    /// Time samples per finite average.
    pub samples: usize,
    /// `t_max = 2πn⁴/(εJ)` for up-to kinds and `1000/J` for single kinds;
    /// when false, `grid.t_max` is used throughout.
    pub protocol_times: bool,
    /// Band for the settling time, relative to the deficit.
    pub tau_delta: f64,
}

impl Default for TableConfig {
    fn default() -> Self {
        Self {
            families: HamiltonianKind::ALL.to_vec(),
            samples: 100_000,
            protocol_times: true,
            tau_delta: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyConfig {
    /// Chain sizes for the separable-state search (each in 2..=4).
    pub search_spins: Vec<usize>,
    pub restarts: usize,
    /// Random product states checked against the bound per chain size.
    pub product_draws: usize,
    pub monte_carlo_spins: usize,
    pub monte_carlo_draws: usize,
    pub xi_orders: Vec<usize>,
    /// Treat the published `2^{4n-6}` normalization and its bounds as
    /// pass/fail checks instead of informational rows.
    pub strict_published: bool,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            search_spins: vec![2, 3, 4],
            restarts: 16,
            product_draws: 1000,
            monte_carlo_spins: 6,
            monte_carlo_draws: 100_000,
            xi_orders: (2..=6).collect(),
            strict_published: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: HamiltonianKind,
    pub spins: usize,
    /// Interaction orders `n`; commands run once per entry.
    pub orders: Vec<usize>,
    /// `J`: the uniform coupling, or the Gaussian mean for site kinds.
    pub coupling: f64,
    /// Gaussian standard deviation as a fraction of `|J|`.
    pub coupling_spread: f64,
    pub schedule: StrengthSchedule,
    pub seed: u64,
    pub brute_force_cap: usize,
    pub grid: GridConfig,
    pub method: SeriesMethod,
    pub correlate: CorrelateConfig,
    pub distribution: DistributionConfig,
    pub table: TableConfig,
    pub verify: VerifyConfig,
    pub format: Format,
    pub out: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            kind: HamiltonianKind::UniformSingle,
            spins: 8,
            orders: vec![3],
            coupling: 1.0,
            coupling_spread: 0.5,
            schedule: StrengthSchedule::polynomial(StrengthSchedule::reference_epsilon()),
            seed: 0,
            brute_force_cap: mbent::DEFAULT_BRUTE_FORCE_CAP,
            grid: GridConfig::default(),
            method: SeriesMethod::ClosedForm,
            correlate: CorrelateConfig::default(),
            distribution: DistributionConfig::default(),
            table: TableConfig::default(),
            verify: VerifyConfig::default(),
            format: Format::Csv,
            out: None,
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(format!("bad config: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    /// Checks that do not depend on the command.
    pub fn validate(&self) -> Result<(), CliError> {
        if self.orders.is_empty() {
            return Err(CliError::Config("orders must not be empty".into()));
        }
        if !(self.coupling.is_finite() && self.coupling != 0.0) {
            return Err(CliError::Config(format!(
                "coupling must be finite and nonzero, got {}",
                self.coupling
            )));
        }
        if !(self.coupling_spread.is_finite() && self.coupling_spread > 0.0) {
            return Err(CliError::Config(format!(
                "coupling_spread must be positive, got {}",
                self.coupling_spread
            )));
        }
        if self.grid.samples < 2 {
            return Err(CliError::Config(format!(
                "grid needs at least 2 samples, got {}",
                self.grid.samples
            )));
        }
        if !(self.grid.t_max.is_finite() && self.grid.t_max > 0.0) {
            return Err(CliError::Config(format!(
                "grid t_max must be positive, got {}",
                self.grid.t_max
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_object_is_default() {
        assert_eq!(
            ExperimentConfig::from_json("{}").unwrap(),
            ExperimentConfig::default()
        );
    }

    #[test]
    fn round_trip() {
        let mut c = ExperimentConfig::default();
        c.kind = HamiltonianKind::SiteUpTo;
        c.orders = vec![3, 4, 5];
        c.schedule = StrengthSchedule::Custom {
            deltas: vec![0.1, 0.2, 0.30000000000000004],
        };
        c.grid.t_max = 1.0 / 3.0;
        c.distribution.range = Some((0.0, 1.0));
        c.out = Some("x/y.csv".into());
        assert_eq!(ExperimentConfig::from_json(&c.to_json()).unwrap(), c);
    }

    #[test]
    fn unknown_fields_rejected() {
        assert!(ExperimentConfig::from_json(r#"{"spinz": 4}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"grid": {"tmax": 4}}"#).is_err());
    }

    #[test]
    fn validation() {
        let mut c = ExperimentConfig::default();
        c.grid.samples = 0;
        assert!(c.validate().is_err());
        let mut c = ExperimentConfig::default();
        c.orders.clear();
        assert!(c.validate().is_err());
    }
}
