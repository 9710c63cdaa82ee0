//! Runs a parsed scenario and writes its artifacts plus a manifest.
//!
//! Every point is computed before anything touches the disk, so a failing
//! run leaves no partial output. Files are written through a temporary file
//! in the target directory and renamed into place.

use std::io::Write;
use std::path::{Path, PathBuf};

use hostguest::export::fmt_num;
use rayon::prelude::*;
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use crate::config::Scenario;
use crate::error::CliError;
use crate::scenarios::{self, Context, Output};

#[derive(Debug, Clone)]
pub struct RunReport {
    pub output_dir: PathBuf,
    /// Relative artifact paths, sorted, including `manifest.json`.
    pub files: Vec<String>,
    pub summaries: Vec<Map<String, Value>>,
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn pretty(v: &Value) -> Vec<u8> {
    let mut s = serde_json::to_vec_pretty(v).expect("JSON value serializes");
    s.push(b'\n');
    s
}

fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::Number(n) => n.as_f64().map_or_else(|| n.to_string(), fmt_num),
        Value::String(s) => s.clone(),
        Value::Object(m) if m.len() == 2 && m.contains_key("value") && m.contains_key("unit") => {
            format!("{} {}", cell(&m["value"]), cell(&m["unit"]))
        }
        other => other.to_string(),
    }
}

fn sweep_csv(parameter: &str, values: &[Value], summaries: &[Map<String, Value>]) -> Result<Vec<u8>, CliError> {
    let mut keys: Vec<&String> = summaries.iter().flat_map(|m| m.keys()).collect();
    keys.sort();
    keys.dedup();
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec![parameter.to_string()];
    header.extend(keys.iter().map(|k| k.to_string()));
    w.write_record(&header).map_err(CliError::runtime)?;
    for (v, m) in values.iter().zip(summaries) {
        let mut row = vec![cell(v)];
        row.extend(keys.iter().map(|k| m.get(*k).map(cell).unwrap_or_default()));
        w.write_record(&row).map_err(CliError::runtime)?;
    }
    w.into_inner().map_err(CliError::runtime)
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = path.parent().unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir).map_err(|e| CliError::Runtime(format!("cannot create {}: {e}", dir.display())))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(CliError::runtime)?;
    tmp.write_all(bytes).map_err(CliError::runtime)?;
    tmp.as_file().sync_all().map_err(CliError::runtime)?;
    tmp.persist(path)
        .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display())))?;
    Ok(())
}

/// Resolves the output directory: an explicit override wins, otherwise the
/// config's `output_dir` relative to the config file.
pub fn resolve_output_dir(scenario: &Scenario, explicit: Option<&Path>) -> Result<PathBuf, CliError> {
    match (explicit, &scenario.output_dir) {
        (Some(p), _) => Ok(p.to_path_buf()),
        (None, Some(p)) => Ok(scenario.base_dir.join(p)),
        (None, None) => Err(CliError::Config(
            "no output_dir in config and none given on the command line".into(),
        )),
    }
}

pub fn execute(scenario: &Scenario, output_dir: &Path, threads: usize) -> Result<RunReport, CliError> {
    let ctx = Context {
        base_dir: &scenario.base_dir,
        seed: scenario.seed,
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(CliError::runtime)?;
    let results: Vec<Result<Output, CliError>> =
        pool.install(|| scenario.points.par_iter().map(|p| scenarios::run(p, &ctx)).collect());
    let outputs = results.into_iter().collect::<Result<Vec<_>, _>>()?;
    log::info!("{} point(s) computed", outputs.len());

    let mut files: Vec<(String, Vec<u8>)> = Vec::new();
    let summaries: Vec<Map<String, Value>> = outputs.iter().map(|o| o.summary.clone()).collect();
    match &scenario.sweep {
        None => {
            let out = outputs.into_iter().next().expect("one point");
            files.push(("summary.json".into(), pretty(&Value::Object(out.summary))));
            files.extend(out.artifacts);
        }
        Some(sweep) => {
            let points: Vec<Value> = sweep
                .values
                .iter()
                .zip(&summaries)
                .map(|(v, m)| json!({ "value": v, "summary": m }))
                .collect();
            files.push((
                "sweep.json".into(),
                pretty(&json!({ "parameter": sweep.parameter, "points": points })),
            ));
            files.push((
                "sweep.csv".into(),
                sweep_csv(&sweep.parameter, &sweep.values, &summaries)?,
            ));
            for (i, out) in outputs.into_iter().enumerate() {
                for (name, bytes) in out.artifacts {
                    files.push((format!("point_{i:03}/{name}"), bytes));
                }
            }
        }
    }
    files.sort_by(|a, b| a.0.cmp(&b.0));

    let artifacts: Vec<Value> = files
        .iter()
        .map(|(name, bytes)| json!({ "path": name, "sha256": sha256_hex(bytes), "bytes": bytes.len() }))
        .collect();
    let manifest = json!({
        "schema_version": crate::config::SCHEMA_VERSION,
        "scenario_kind": scenario.kind.name(),
        "seed": scenario.seed,
        "config_sha256": sha256_hex(&scenario.source),
        "points": scenario.points.len(),
        "artifacts": artifacts,
    });

    for (name, bytes) in &files {
        write_atomic(&output_dir.join(name), bytes)?;
    }
    write_atomic(&output_dir.join("manifest.json"), &pretty(&manifest))?;

    let mut names: Vec<String> = files.into_iter().map(|(n, _)| n).collect();
    names.push("manifest.json".into());
    names.sort();
    Ok(RunReport {
        output_dir: output_dir.to_path_buf(),
        files: names,
        summaries,
    })
}
