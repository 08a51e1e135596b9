//! One-parameter sweeps over a scenario.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::Value;

use crate::error::{Error, Result};

use super::config::ScenarioConfig;
use super::run::{run_scenario, RunSummary};

#[derive(Clone, Debug, Serialize)]
pub struct SweepResult {
    pub param: String,
    pub values: Vec<f64>,
    pub summaries: Vec<RunSummary>,
}

/// Replace the number at dotted `path` (array entries by index) with `x`.
/// Integer fields only accept integral values.
pub fn set_path(root: &mut Value, path: &str, x: f64) -> Result<()> {
    let bad = |msg: &str| Error::validation(path, msg.to_string());
    let mut node = root;
    for seg in path.split('.') {
        node = match node {
            Value::Object(map) => map.get_mut(seg).ok_or_else(|| bad("no such field"))?,
            Value::Array(items) => {
                let i: usize = seg.parse().map_err(|_| bad("array segment must be an index"))?;
                items.get_mut(i).ok_or_else(|| bad("index out of range"))?
            }
            _ => return Err(bad("path descends into a scalar")),
        };
    }
    let Value::Number(n) = node else {
        return Err(bad("target is not a number"));
    };
    *node = if n.is_u64() {
        if x < 0.0 || x.fract() != 0.0 {
            return Err(bad("integer field needs a non-negative integral value"));
        }
        Value::from(x as u64)
    } else {
        serde_json::Number::from_f64(x).map(Value::Number).ok_or_else(|| bad("value must be finite"))?
    };
    Ok(())
}

/// Configs for every value, validated before anything runs.
pub fn sweep_configs(cfg: &ScenarioConfig, path: &str, values: &[f64]) -> Result<Vec<ScenarioConfig>> {
    if values.is_empty() {
        return Err(Error::validation("values", "empty sweep"));
    }
    let base = serde_json::to_value(cfg)?;
    values
        .iter()
        .map(|&x| {
            let mut v = base.clone();
            set_path(&mut v, path, x)?;
            let c: ScenarioConfig = serde_json::from_value(v).map_err(|e| Error::validation(path, e.to_string()))?;
            c.validate()?;
            Ok(c)
        })
        .collect()
}

/// Runs are independent and execute in parallel; rows keep the order of `values`.
pub fn sweep(cfg: &ScenarioConfig, path: &str, values: &[f64]) -> Result<SweepResult> {
    let configs = sweep_configs(cfg, path, values)?;
    let summaries = configs
        .par_iter()
        .map(|c| run_scenario(c).map(|o| o.summary))
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult {
        param: path.to_string(),
        values: values.to_vec(),
        summaries,
    })
}

impl SweepResult {
    /// One row per value; columns are the union of summary metrics.
    pub fn to_csv(&self) -> String {
        let keys: BTreeSet<&str> = self
            .summaries
            .iter()
            .flat_map(|s| s.metrics.keys().map(String::as_str))
            .collect();
        let mut out = self.param.clone();
        for k in &keys {
            out.push(',');
            out.push_str(k);
        }
        out.push('\n');
        for (x, s) in self.values.iter().zip(&self.summaries) {
            let _ = write!(out, "{x:.16e}");
            for k in &keys {
                match s.metrics.get(*k) {
                    Some(v) => {
                        let _ = write!(out, ",{v:.16e}");
                    }
                    None => out.push(','),
                }
            }
            out.push('\n');
        }
        out
    }
}
