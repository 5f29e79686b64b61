//! JSON reports, atomic output and replay.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::config::ExperimentConfig;
use crate::error::CliError;
use crate::tasks::{run_task, Status, TaskOutput};

pub const TOOL: &str = "rst";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Absolute tolerance for non-integer numbers on replay.
pub const REPLAY_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub tool: String,
    pub version: String,
    pub config: ExperimentConfig,
    /// SHA-256 of the compact JSON encoding of `config`.
    pub config_digest: String,
    pub status: Status,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagnostic: Option<String>,
    pub results: Value,
}

pub fn config_digest(cfg: &ExperimentConfig) -> String {
    let bytes = serde_json::to_vec(cfg).expect("config serializes");
    Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
}

impl Report {
    pub fn new(cfg: &ExperimentConfig, out: &TaskOutput) -> Self {
        Self {
            tool: TOOL.into(),
            version: VERSION.into(),
            config: cfg.clone(),
            config_digest: config_digest(cfg),
            status: out.status,
            diagnostic: out.diagnostic.clone(),
            results: out.results.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

/// Writes through a sibling temporary file and a rename.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    let name = path.file_name().ok_or_else(|| CliError::io(format!("{} is not a file path", path.display())))?;
    let mut tmp_name = std::ffi::OsString::from(".");
    tmp_name.push(name);
    tmp_name.push(format!(".{}.tmp", std::process::id()));
    let tmp = path.with_file_name(tmp_name);
    fs::write(&tmp, contents).map_err(|e| CliError::io(format!("{}: {e}", tmp.display())))?;
    fs::rename(&tmp, path).map_err(|e| {
        let _ = fs::remove_file(&tmp);
        CliError::io(format!("{}: {e}", path.display()))
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReplayOutcome {
    pub matches: bool,
    pub mismatches: Vec<String>,
    /// The regenerated report.
    pub fresh: Report,
}

/// Reruns the experiment from the echoed config and compares every result.
pub fn replay(path: &Path) -> Result<ReplayOutcome, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(format!("{}: {e}", path.display())))?;
    let old: Report = serde_json::from_str(&text).map_err(|e| CliError::validation(format!("{}: {e}", path.display())))?;
    replay_report(&old)
}

pub fn replay_report(old: &Report) -> Result<ReplayOutcome, CliError> {
    if old.tool != TOOL || old.version != VERSION {
        return Err(CliError::validation(format!(
            "report from {} {} cannot be replayed by {TOOL} {VERSION}",
            old.tool, old.version
        )));
    }
    let mut mismatches = Vec::new();
    if config_digest(&old.config) != old.config_digest {
        mismatches.push("config does not match its digest".to_owned());
    }
    let cfg = old.config.clone().resolve()?;
    let fresh = Report::new(&cfg, &run_task(&cfg)?);
    if fresh.status != old.status {
        mismatches.push(format!("status {:?} vs {:?}", old.status, fresh.status));
    }
    compare(&old.results, &fresh.results, "results", &mut mismatches);
    Ok(ReplayOutcome { matches: mismatches.is_empty(), mismatches, fresh })
}

fn compare(a: &Value, b: &Value, path: &str, out: &mut Vec<String>) {
    match (a, b) {
        (Value::Number(x), Value::Number(y)) => {
            let same = if x.is_f64() || y.is_f64() {
                let (x, y) = (x.as_f64().unwrap_or(f64::NAN), y.as_f64().unwrap_or(f64::NAN));
                (x - y).abs() <= REPLAY_TOL
            } else {
                x == y
            };
            if !same {
                out.push(format!("{path}: {x} vs {y}"));
            }
        }
        (Value::Array(x), Value::Array(y)) => {
            if x.len() != y.len() {
                out.push(format!("{path}: length {} vs {}", x.len(), y.len()));
            } else {
                for (i, (u, v)) in x.iter().zip(y).enumerate() {
                    compare(u, v, &format!("{path}[{i}]"), out);
                }
            }
        }
        (Value::Object(x), Value::Object(y)) => {
            for k in x.keys().chain(y.keys().filter(|k| !x.contains_key(*k))) {
                match (x.get(k), y.get(k)) {
                    (Some(u), Some(v)) => compare(u, v, &format!("{path}.{k}"), out),
                    _ => out.push(format!("{path}.{k}: present in only one report")),
                }
            }
        }
        _ if a == b => {}
        _ => out.push(format!("{path}: {a} vs {b}")),
    }
}
