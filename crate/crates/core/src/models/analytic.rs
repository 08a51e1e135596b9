//! Closed-form Fock populations of the engineered Rabi validation runs.

use serde::{Deserialize, Serialize};

use crate::models::ladder::LadderSpec;
use crate::models::CouplingKind;
use crate::operators::C64;

/// Fock indices 0..=7 are tabulated.
pub const ANALYTIC_LEVELS: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ValidationPreset {
    Fig2a,
    Fig2b,
    Fig3a,
    Fig3b,
}

impl ValidationPreset {
    pub const ALL: [ValidationPreset; 4] = [Self::Fig2a, Self::Fig2b, Self::Fig3a, Self::Fig3b];

    pub fn name(self) -> &'static str {
        match self {
            Self::Fig2a => "fig2a",
            Self::Fig2b => "fig2b",
            Self::Fig3a => "fig3a",
            Self::Fig3b => "fig3b",
        }
    }

    pub fn base(self) -> usize {
        match self {
            Self::Fig2a | Self::Fig3a => 0,
            Self::Fig2b | Self::Fig3b => 3,
        }
    }

    pub fn steps(self) -> usize {
        match self {
            Self::Fig2a | Self::Fig2b => 2,
            Self::Fig3a | Self::Fig3b => 3,
        }
    }

    /// Fock components of the field part of `(|a⟩ + |b⟩)(|g⟩ + |e⟩)/2`.
    pub fn initial_fock(self) -> [usize; 2] {
        match self {
            Self::Fig2a => [0, 2],
            Self::Fig2b => [3, 5],
            Self::Fig3a => [1, 3],
            Self::Fig3b => [3, 6],
        }
    }

    /// Fock levels a ladder of this preset can reach.
    pub fn subspace(self) -> std::ops::RangeInclusive<usize> {
        self.base()..=self.base() + self.steps()
    }

    /// Levels just outside the ladder window that the full model leaks into.
    pub fn leak_levels(self) -> Vec<usize> {
        let top = self.base() + self.steps() + 1;
        match self.base() {
            0 => vec![top],
            m => vec![m - 1, top],
        }
    }

    /// Unit-weight ladder with `ζ_ref = 1`, so that time is measured in `ζ_ref t`.
    pub fn unit_ladder(self) -> LadderSpec {
        LadderSpec::unit(self.base(), self.steps(), C64::new(1.0, 0.0), CouplingKind::Jc)
            .expect("preset ladders are valid")
    }
}

/// `P_n(τ)` for `n = 0..8`, with `τ = ζ_ref t`.
pub fn analytic_probabilities(preset: ValidationPreset, times: &[f64]) -> Vec<[f64; ANALYTIC_LEVELS]> {
    times
        .iter()
        .map(|&t| {
            let s2 = t.sin().powi(2);
            let c2 = t.cos().powi(2);
            let mut p = [0.0; ANALYTIC_LEVELS];
            match preset {
                ValidationPreset::Fig2a => {
                    p[0] = (1.0 + c2) / 4.0;
                    p[2] = p[0];
                    p[1] = s2 / 2.0;
                }
                ValidationPreset::Fig2b => {
                    p[3] = (1.0 + c2) / 4.0;
                    p[5] = p[3];
                    p[4] = s2 / 2.0;
                }
                ValidationPreset::Fig3a => {
                    p[0] = s2 / 4.0;
                    p[2] = 2.0 * p[0];
                    p[1] = c2 / 2.0;
                    p[3] = (p[1] + 0.5) / 2.0;
                }
                ValidationPreset::Fig3b => {
                    p[3] = (1.0 + c2) / 4.0;
                    p[6] = p[3];
                    p[4] = s2 / 4.0;
                    p[5] = p[4];
                }
            }
            p
        })
        .collect()
}
