//! JSON scenarios: schema, built-in presets, execution and sweeps.

pub mod config;
pub mod presets;
pub mod run;
pub mod sweep;

pub use config::{ModelKind, ScenarioConfig, SCHEMA_VERSION};
pub use presets::{list_presets, load_scenario, preset, preset_json, preset_names, PresetInfo};
pub use run::{run_scenario, CheckResult, RunOptions, RunOutput, RunSummary};
pub use sweep::{set_path, sweep, sweep_configs, SweepResult};
