//! Atom–field interaction models.

use serde::{Deserialize, Serialize};

pub mod analytic;
pub mod ladder;
pub mod raman;
pub mod selective;

pub use analytic::{analytic_probabilities, ValidationPreset};
pub use ladder::{build_engineered_hamiltonian, ladder_from_conditions, LadderMode, LadderSpec};
pub use raman::{
    build_full_hamiltonian, check_regime, derive_couplings, solve_resonance, BranchRates, DerivedCouplings,
    PhaseSign, RamanBranch, RamanLadderParams, RegimeEntry, RegimeReport, ResonanceConfig, ResonanceSolution,
};
pub use selective::{build_selective_full_hamiltonian, derive_selective, selective_regime, SelectiveRamanParams};

/// JC pumps `σ_ge ⊗ A†`; AJC pumps `σ_eg ⊗ A†`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CouplingKind {
    #[serde(rename = "JC")]
    Jc,
    #[serde(rename = "AJC")]
    Ajc,
}
