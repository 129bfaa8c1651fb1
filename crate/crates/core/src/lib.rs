//! Entanglement dynamics of periodic spin-1/2 chains under diagonal
//! Ising-type Hamiltonians with many-body interactions.
//!
//! Basis strings are `u64` indices; site `i` (1-based) lives in bit `i - 1`
//! and carries spin `2a_i - 1`. Every Hamiltonian here is diagonal, so time
//! evolution is phase accumulation on the eigenphase table.

pub mod appendix;
pub mod chain;
pub mod closed_form;
pub mod degeneracy;
pub mod error;
pub mod hamiltonian;
pub mod oracle;
pub mod random;
pub mod state;
pub mod stats;

pub use appendix::{AmplitudeProfile, MonteCarloEstimate, OptimalSearch, XiCount};
pub use chain::{ChainGeometry, DEFAULT_BRUTE_FORCE_CAP};
pub use closed_form::{CorrelationBranch, CorrelationValue, EvolutionFormula, EvolutionMethod};
pub use degeneracy::{DegeneracyLedger, DegeneracyMode, Enumeration};
pub use error::{Error, Result};
pub use hamiltonian::{
    CouplingProfile, EigenphaseTable, HamiltonianKind, HamiltonianSpec, LocalFields,
    StrengthSchedule,
};
pub use oracle::Axis;
pub use random::SeededSampler;
pub use state::StateVector;
pub use stats::{
    DistributionStats, EntanglementSeries, FitAxis, ScalingFit, TauEstimate, TimeGrid,
};
