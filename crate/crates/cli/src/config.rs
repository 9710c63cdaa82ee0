//! Scenario documents: parsing, sweep expansion and up-front validation.

use std::path::{Path, PathBuf};

use serde::Deserialize;
use serde_json::Value;

use crate::error::CliError;
use crate::scenarios::{Kind, Parameters};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    /// Dotted path into `parameters`, e.g. `cavity.g`.
    pub parameter: String,
    pub values: Vec<Value>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    schema_version: u32,
    scenario_kind: Kind,
    parameters: Value,
    #[serde(default)]
    sweep: Option<Sweep>,
    #[serde(default)]
    output_dir: Option<PathBuf>,
    #[serde(default)]
    seed: u64,
}

/// A parsed scenario. Every sweep point has already been deserialized and
/// validated.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub kind: Kind,
    pub seed: u64,
    pub output_dir: Option<PathBuf>,
    /// Directory of the config file; relative paths resolve against it.
    pub base_dir: PathBuf,
    pub sweep: Option<Sweep>,
    pub points: Vec<Parameters>,
    /// Raw config bytes, hashed into the manifest.
    pub source: Vec<u8>,
}

pub fn load(path: &Path) -> Result<Scenario, CliError> {
    let source = std::fs::read(path).map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
    parse(&source, base_dir)
}

pub fn parse(source: &[u8], base_dir: PathBuf) -> Result<Scenario, CliError> {
    let raw: RawConfig = serde_json::from_slice(source).map_err(|e| CliError::Config(e.to_string()))?;
    if raw.schema_version != SCHEMA_VERSION {
        return Err(CliError::Config(format!(
            "schema_version {} is not supported (expected {SCHEMA_VERSION})",
            raw.schema_version
        )));
    }
    let points = match &raw.sweep {
        None => vec![Parameters::parse(raw.scenario_kind, raw.parameters.clone())?],
        Some(sweep) => {
            if sweep.values.is_empty() {
                return Err(CliError::Config("sweep.values must not be empty".into()));
            }
            sweep
                .values
                .iter()
                .enumerate()
                .map(|(i, v)| {
                    let mut params = raw.parameters.clone();
                    set_path(&mut params, &sweep.parameter, v.clone())?;
                    Parameters::parse(raw.scenario_kind, params)
                        .map_err(|e| CliError::Config(format!("sweep point {i}: {e}")))
                })
                .collect::<Result<_, _>>()?
        }
    };
    Ok(Scenario {
        kind: raw.scenario_kind,
        seed: raw.seed,
        output_dir: raw.output_dir,
        base_dir,
        sweep: raw.sweep,
        points,
        source: source.to_vec(),
    })
}

/// Replaces the value at an existing dotted path. Array elements are
/// addressed by index (`nuclei.0.spin`).
fn set_path(root: &mut Value, path: &str, value: Value) -> Result<(), CliError> {
    let mut node = root;
    for key in path.split('.') {
        node = match node {
            Value::Object(map) => map.get_mut(key),
            Value::Array(items) => key.parse::<usize>().ok().and_then(|i| items.get_mut(i)),
            _ => None,
        }
        .ok_or_else(|| CliError::Config(format!("sweep parameter '{path}' does not exist (at '{key}')")))?;
    }
    *node = value;
    Ok(())
}
