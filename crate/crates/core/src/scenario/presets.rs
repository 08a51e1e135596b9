//! Built-in scenarios, embedded from `presets/*.json`.

use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};

use super::config::{ModelKind, ScenarioConfig};

const PRESETS: [(&str, &str); 13] = [
    ("fig2a", include_str!("../../presets/fig2a.json")),
    ("fig2b", include_str!("../../presets/fig2b.json")),
    ("fig3a", include_str!("../../presets/fig3a.json")),
    ("fig3b", include_str!("../../presets/fig3b.json")),
    ("fig4", include_str!("../../presets/fig4.json")),
    ("fig6a", include_str!("../../presets/fig6a.json")),
    ("fig6b", include_str!("../../presets/fig6b.json")),
    ("regime-check-fig2a", include_str!("../../presets/regime-check-fig2a.json")),
    ("regime-check-fig2b", include_str!("../../presets/regime-check-fig2b.json")),
    ("regime-check-fig3a", include_str!("../../presets/regime-check-fig3a.json")),
    ("regime-check-fig3b", include_str!("../../presets/regime-check-fig3b.json")),
    ("regime-check-fig6a", include_str!("../../presets/regime-check-fig6a.json")),
    ("regime-check-fig6b", include_str!("../../presets/regime-check-fig6b.json")),
];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PresetInfo {
    pub name: String,
    pub model: ModelKind,
    pub description: String,
}

pub fn preset_names() -> Vec<&'static str> {
    PRESETS.iter().map(|(n, _)| *n).collect()
}

/// Raw JSON of a preset, as shipped.
pub fn preset_json(name: &str) -> Result<&'static str> {
    PRESETS
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, j)| *j)
        .ok_or_else(|| Error::UnknownLabel(name.to_string()))
}

pub fn preset(name: &str) -> Result<ScenarioConfig> {
    ScenarioConfig::from_json(preset_json(name)?)
}

pub fn list_presets() -> Result<Vec<PresetInfo>> {
    PRESETS
        .iter()
        .map(|(name, _)| {
            let cfg = preset(name)?;
            Ok(PresetInfo {
                name: cfg.name,
                model: cfg.model,
                description: cfg.description,
            })
        })
        .collect()
}

/// A file path if one exists, otherwise a preset name.
pub fn load_scenario(arg: &str) -> Result<ScenarioConfig> {
    let path = Path::new(arg);
    if path.is_file() {
        return ScenarioConfig::from_json(&std::fs::read_to_string(path)?);
    }
    preset(arg).map_err(|_| {
        Error::validation(
            "scenario",
            format!("`{arg}` is neither a file nor a preset ({})", preset_names().join(", ")),
        )
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_parse_and_match_their_names() {
        for (name, _) in PRESETS {
            assert_eq!(preset(name).unwrap().name, name);
        }
        assert!(matches!(preset("fig5"), Err(Error::UnknownLabel(_))));
    }

    #[test]
    fn sliced_three_step_description() {
        let info = list_presets().unwrap();
        let fig3b = info.iter().find(|p| p.name == "fig3b").unwrap();
        assert!(fig3b.description.contains("M=3"));
        assert!(fig3b.description.contains("four-state"));
    }
}
