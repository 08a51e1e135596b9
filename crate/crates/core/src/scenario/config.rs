//! Strict JSON scenario schema.

use serde::{Deserialize, Serialize};

use crate::dynamics::{IntegratorConfig, TimeGrid};
use crate::error::{Error, Result};
use crate::models::{BranchRates, CouplingKind, LadderSpec, ResonanceConfig, ValidationPreset};
use crate::operators::C64;
use crate::reservoir::ThermalBathParams;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    /// Multi-branch Raman scheme against its engineered ladder.
    FullRaman,
    /// Three-level selective scheme against its one-step ladder.
    SelectiveRaman,
    EngineeredLadder,
    UbLiouvillian,
    SelectiveLiouvillian,
    CollisionModel,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::FullRaman => "full-raman",
            Self::SelectiveRaman => "selective-raman",
            Self::EngineeredLadder => "engineered-ladder",
            Self::UbLiouvillian => "ub-liouvillian",
            Self::SelectiveLiouvillian => "selective-liouvillian",
            Self::CollisionModel => "collision-model",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum RateUnit {
    #[serde(rename = "lambda1")]
    Lambda1,
    #[serde(rename = "gamma")]
    Gamma,
    #[serde(rename = "Hz")]
    Hz,
}

/// Unit of every rate in `parameters`. With `Hz`, rates are divided by
/// `hz` on load; otherwise `hz` is only the reference rate's value in Hz,
/// used to report couplings in Hz.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReferenceRate {
    pub unit: RateUnit,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hz: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum InitialState {
    /// `(Σ c_n |n⟩) ⊗ (Σ c_l |l⟩)`, normalized; entries are `[n, re, im]`
    /// and `[level, re, im]`.
    Product {
        field: Vec<(usize, f64, f64)>,
        atom: Vec<(String, f64, f64)>,
    },
    Fock {
        n: usize,
    },
    Thermal {
        n_bar: f64,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputKind {
    /// Every `P_n` column.
    Fock,
    Fidelity,
    MandelQ,
    MeanN,
    Purity,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Action {
    #[default]
    Evolve,
    Regime,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnchorTarget {
    /// Key into the run summary's metrics.
    pub metric: String,
    pub value: f64,
    /// Absent for values recorded for reference only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Anchor {
    pub figure: String,
    pub targets: Vec<AnchorTarget>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub schema_version: u32,
    pub name: String,
    #[serde(default)]
    pub description: String,
    pub model: ModelKind,
    pub reference_rate: ReferenceRate,
    pub parameters: serde_json::Value,
    pub initial_state: InitialState,
    pub grid: TimeGrid,
    pub cutoff: usize,
    #[serde(default = "default_outputs")]
    pub outputs: Vec<OutputKind>,
    #[serde(default)]
    pub integrator: IntegratorConfig,
    #[serde(default)]
    pub action: Action,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub anchor: Option<Anchor>,
}

fn default_outputs() -> Vec<OutputKind> {
    vec![OutputKind::Fock]
}

fn default_true() -> bool {
    true
}

fn default_threshold() -> f64 {
    10.0
}

fn default_atom() -> String {
    "e".to_string()
}

fn default_eps() -> f64 {
    1e-3
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeightsMode {
    /// Unit weights with the derived `ζ_ref`: the ladder the drive ratios target.
    #[default]
    Unit,
    /// Weights `ζ_{M+i}^{(i+1)}/ζ_M^{(1)}` as the derived couplings give them.
    Derived,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FullRamanConfig {
    pub kind: CouplingKind,
    pub base: usize,
    pub branches: Vec<BranchRates>,
    #[serde(default = "default_true")]
    pub solve_resonance: bool,
    #[serde(default)]
    pub resonance: ResonanceConfig,
    #[serde(default)]
    pub engineered_weights: WeightsMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub analytic: Option<ValidationPreset>,
    #[serde(default)]
    pub n_bar: f64,
    #[serde(default = "default_threshold")]
    pub regime_threshold: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub levels: Option<Vec<usize>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SelectiveRamanConfig {
    pub k: usize,
    pub lambda: f64,
    pub delta: f64,
    pub delta1: f64,
    pub omega2: f64,
    /// Used as given when `derive` is off; otherwise only its phase matters.
    #[serde(default)]
    pub omega1: Option<f64>,
    #[serde(default)]
    pub delta2: Option<f64>,
    #[serde(default = "default_true")]
    pub derive: bool,
    #[serde(default)]
    pub n_bar: f64,
    #[serde(default = "default_threshold")]
    pub regime_threshold: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub levels: Option<Vec<usize>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LadderConfig {
    pub base: usize,
    pub steps: usize,
    /// `[re, im]` per step; unit weights when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<(f64, f64)>>,
    #[serde(default = "default_zeta_ref")]
    pub zeta_ref: (f64, f64),
    #[serde(default = "default_kind")]
    pub kind: CouplingKind,
}

fn default_zeta_ref() -> (f64, f64) {
    (1.0, 0.0)
}

fn default_kind() -> CouplingKind {
    CouplingKind::Jc
}

impl LadderConfig {
    pub fn to_spec(&self) -> Result<LadderSpec> {
        let zeta = C64::new(self.zeta_ref.0, self.zeta_ref.1);
        let spec = match &self.weights {
            None => LadderSpec::unit(self.base, self.steps, zeta, self.kind),
            Some(w) => {
                if w.len() != self.steps {
                    return Err(Error::validation(
                        "parameters.ladder.weights",
                        format!("{} weights for {} steps", w.len(), self.steps),
                    ));
                }
                LadderSpec::new(self.base, w.iter().map(|&(re, im)| C64::new(re, im)).collect(), zeta, self.kind)
            }
        };
        spec.map_err(|e| Error::validation("parameters.ladder", e.to_string()))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EngineeredLadderConfig {
    pub ladder: LadderConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub analytic: Option<ValidationPreset>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub levels: Option<Vec<usize>>,
}

/// Steady-state detection settings for dissipative runs.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SteadyDetection {
    pub window: f64,
    #[serde(default = "default_eps")]
    pub eps: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UbLiouvillianConfig {
    pub ladder: LadderConfig,
    pub gamma_engineered: f64,
    pub bath: ThermalBathParams,
    pub target: usize,
    #[serde(default = "default_true")]
    pub steady_state: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detect: Option<SteadyDetection>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SelectiveLiouvillianConfig {
    /// `[k, Γ_k]` per channel.
    pub channels: Vec<(usize, f64)>,
    pub bath: ThermalBathParams,
    pub target: usize,
    #[serde(default = "default_true")]
    pub steady_state: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detect: Option<SteadyDetection>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CollisionConfig {
    pub ladder: LadderConfig,
    /// Coarse-grained rate `Γ = r(ζτ)²` held fixed.
    pub gamma_engineered: f64,
    /// `ζ_ref τ`; with back-to-back transits `ζ = Γ/(ζτ)` and `τ = (ζτ)²/Γ`.
    pub zeta_tau: f64,
    pub bath: ThermalBathParams,
    pub target: usize,
    #[serde(default = "default_atom")]
    pub atom: String,
}

pub(crate) fn parse_params<T: serde::de::DeserializeOwned>(value: &serde_json::Value) -> Result<T> {
    serde_json::from_value(value.clone()).map_err(|e| Error::validation("parameters", e.to_string()))
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::validation("config", e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::validation(
                "schema_version",
                format!("expected {SCHEMA_VERSION}, got {}", self.schema_version),
            ));
        }
        if self.name.trim().is_empty() {
            return Err(Error::validation("name", "must not be empty"));
        }
        if self.reference_rate.unit == RateUnit::Hz && self.reference_rate.hz.is_none() {
            return Err(Error::validation("reference_rate.hz", "required when unit is Hz"));
        }
        if let Some(hz) = self.reference_rate.hz {
            if !(hz > 0.0 && hz.is_finite()) {
                return Err(Error::validation("reference_rate.hz", "must be > 0"));
            }
        }
        self.grid.validate()?;
        if self.cutoff < 1 {
            return Err(Error::validation("cutoff", "must be ≥ 1"));
        }
        self.integrator.validate()?;
        if let InitialState::Thermal { n_bar } = self.initial_state {
            if !(n_bar >= 0.0) {
                return Err(Error::validation("initial_state.n_bar", "must be ≥ 0"));
            }
        }
        match self.model {
            ModelKind::FullRaman => {
                let p: FullRamanConfig = parse_params(&self.parameters)?;
                if !(2..=4).contains(&p.branches.len()) {
                    return Err(Error::validation("parameters.branches", "2, 3 or 4 branches required"));
                }
            }
            ModelKind::SelectiveRaman => {
                parse_params::<SelectiveRamanConfig>(&self.parameters)?;
            }
            ModelKind::EngineeredLadder => {
                parse_params::<EngineeredLadderConfig>(&self.parameters)?.ladder.to_spec()?;
            }
            ModelKind::UbLiouvillian => {
                let p: UbLiouvillianConfig = parse_params(&self.parameters)?;
                p.ladder.to_spec()?;
                check_target(p.target, self.cutoff)?;
            }
            ModelKind::SelectiveLiouvillian => {
                let p: SelectiveLiouvillianConfig = parse_params(&self.parameters)?;
                if p.channels.is_empty() {
                    return Err(Error::validation("parameters.channels", "at least one channel required"));
                }
                check_target(p.target, self.cutoff)?;
            }
            ModelKind::CollisionModel => {
                let p: CollisionConfig = parse_params(&self.parameters)?;
                p.ladder.to_spec()?;
                check_target(p.target, self.cutoff)?;
                if !(p.zeta_tau > 0.0) || !(p.gamma_engineered > 0.0) {
                    return Err(Error::validation("parameters", "zeta_tau and gamma_engineered must be > 0"));
                }
                if self.grid.t_start != 0.0 {
                    return Err(Error::validation("grid.t_start", "collision runs start at 0"));
                }
            }
        }
        if self.action == Action::Regime && !matches!(self.model, ModelKind::FullRaman | ModelKind::SelectiveRaman) {
            return Err(Error::validation("action", "regime checks need a full-raman or selective-raman model"));
        }
        Ok(())
    }

    /// Multiplier that brings every rate in `parameters` to reference units.
    pub fn rate_scale(&self) -> f64 {
        match self.reference_rate.unit {
            RateUnit::Hz => 1.0 / self.reference_rate.hz.expect("validated"),
            _ => 1.0,
        }
    }
}

fn check_target(target: usize, cutoff: usize) -> Result<()> {
    if target > cutoff {
        return Err(Error::validation("parameters.target", format!("{target} above cutoff {cutoff}")));
    }
    Ok(())
}
