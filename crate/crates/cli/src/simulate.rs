//! Scenario files and the metrics CSV.
//!
//! A config holds an optional base `seed` and a `scenarios` list. Inside a
//! scenario `delta` may be a list, which expands into one scenario per value
//! sharing the same seed (common random numbers across the sweep). Scenarios
//! without a seed get `base + index`.

use std::io::Write;
use std::path::Path;

use dynborrow::exec::Execution;
use dynborrow::sim::{run_scenario, MetricsRow, ScenarioConfig};
use serde_json::{Map, Value};

use crate::error::{CliError, Result};

pub fn read_config(path: &Path) -> Result<Value> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(vec![format!("{}: {e}", path.display())]))?;
    let is_toml = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("toml"));
    if is_toml {
        let v: toml::Value =
            toml::from_str(&text).map_err(|e| CliError::Config(vec![format!("toml: {e}")]))?;
        serde_json::to_value(v).map_err(|e| CliError::Config(vec![e.to_string()]))
    } else {
        serde_json::from_str(&text).map_err(|e| CliError::Config(vec![format!("json: {e}")]))
    }
}

/// Seed from the config file, if any.
pub fn config_seed(config: &Value) -> Option<u64> {
    config.get("seed").and_then(Value::as_u64)
}

/// True when some scenario leaves its seed to the base seed.
pub fn needs_base_seed(config: &Value) -> bool {
    config
        .get("scenarios")
        .and_then(Value::as_array)
        .is_some_and(|s| s.iter().any(|sc| sc.get("seed").is_none()))
}

/// Decodes, expands and validates every scenario, collecting all problems.
pub fn parse_scenarios(config: &Value, base_seed: u64) -> Result<Vec<ScenarioConfig>> {
    let mut problems = Vec::new();
    let Some(top) = config.as_object() else {
        return Err(CliError::Config(vec!["config: expected a table/object".into()]));
    };
    for key in top.keys() {
        if key != "seed" && key != "scenarios" {
            problems.push(format!("{key}: unknown top-level field"));
        }
    }
    if top.contains_key("seed") && config_seed(config).is_none() {
        problems.push("seed: expected a non-negative integer".into());
    }
    let list = match top.get("scenarios") {
        Some(Value::Array(list)) if !list.is_empty() => list,
        Some(Value::Array(_)) => {
            problems.push("scenarios: list is empty".into());
            return Err(CliError::Config(problems));
        }
        Some(_) => {
            problems.push("scenarios: expected a list".into());
            return Err(CliError::Config(problems));
        }
        None => {
            problems.push("scenarios: missing".into());
            return Err(CliError::Config(problems));
        }
    };

    let mut out = Vec::new();
    for (i, raw) in list.iter().enumerate() {
        let at = format!("scenarios[{i}]");
        let Some(obj) = raw.as_object() else {
            problems.push(format!("{at}: expected a table/object"));
            continue;
        };
        let mut obj: Map<String, Value> = obj.clone();
        obj.entry("seed").or_insert_with(|| Value::from(base_seed.wrapping_add(i as u64)));
        obj.entry("id").or_insert_with(|| Value::from(format!("s{i}")));
        let deltas = match obj.remove("delta") {
            Some(Value::Array(d)) if d.is_empty() => {
                problems.push(format!("{at}.delta: list is empty"));
                continue;
            }
            Some(Value::Array(d)) => d,
            Some(d) => vec![d],
            None => {
                problems.push(format!("{at}.delta: missing"));
                continue;
            }
        };
        for (k, d) in deltas.into_iter().enumerate() {
            let here = if list.len() == 1 && k == 0 { at.clone() } else { format!("{at}.delta[{k}]") };
            let mut one = obj.clone();
            one.insert("delta".into(), d);
            match serde_json::from_value::<ScenarioConfig>(Value::Object(one)) {
                Ok(cfg) => {
                    let p = cfg.problems();
                    if p.is_empty() {
                        out.push(cfg);
                    } else {
                        problems.extend(p.into_iter().map(|m| format!("{here}.{m}")));
                    }
                }
                Err(e) => problems.push(format!("{here}: {e}")),
            }
        }
    }
    if problems.is_empty() {
        Ok(out)
    } else {
        Err(CliError::Config(problems))
    }
}

pub fn write_metrics<W: Write>(rows: &[MetricsRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn simulate(scenarios: &[ScenarioConfig], execution: Execution) -> Result<Vec<MetricsRow>> {
    let mut rows = Vec::new();
    for cfg in scenarios {
        rows.extend(run_scenario(cfg, execution)?.rows);
    }
    Ok(rows)
}
