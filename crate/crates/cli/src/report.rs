//! Versioned JSON report envelope and atomic artifact writers.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::config::RunConfig;

pub const SCHEMA: &str = "slipcontact.report/1";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Comparison {
    #[serde(rename = "<=")]
    AtMost,
    #[serde(rename = ">=")]
    AtLeast,
    #[serde(rename = "<")]
    Below,
    #[serde(rename = ">")]
    Above,
}

impl Comparison {
    fn holds(self, measured: f64, threshold: f64) -> bool {
        match self {
            Comparison::AtMost => measured <= threshold,
            Comparison::AtLeast => measured >= threshold,
            Comparison::Below => measured < threshold,
            Comparison::Above => measured > threshold,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    /// The estimate or identity this check exercises.
    pub anchor: String,
    pub measured: Option<f64>,
    pub threshold: f64,
    pub comparison: Comparison,
    pub pass: bool,
}

impl Check {
    /// A NaN measurement never passes.
    pub fn new(name: &str, anchor: &str, measured: f64, comparison: Comparison, threshold: f64) -> Self {
        Check {
            name: name.into(),
            anchor: anchor.into(),
            measured: measured.is_finite().then_some(measured),
            threshold,
            comparison,
            pass: comparison.holds(measured, threshold),
        }
    }

    pub fn at_most(name: &str, anchor: &str, measured: f64, threshold: f64) -> Self {
        Self::new(name, anchor, measured, Comparison::AtMost, threshold)
    }

    pub fn at_least(name: &str, anchor: &str, measured: f64, threshold: f64) -> Self {
        Self::new(name, anchor, measured, Comparison::AtLeast, threshold)
    }

    /// Boolean condition encoded as `measured = 0 or 1`, required `>= 1`.
    pub fn holds(name: &str, anchor: &str, ok: bool) -> Self {
        Self::at_least(name, anchor, if ok { 1.0 } else { 0.0 }, 1.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: String,
    pub tool_version: String,
    pub command: String,
    /// Seconds since the epoch; `SOURCE_DATE_EPOCH` wins when set.
    pub timestamp: u64,
    pub config: RunConfig,
    pub checks: Vec<Check>,
    pub data: serde_json::Value,
    pub pass: bool,
}

impl Report {
    pub fn new(command: &str, config: &RunConfig, checks: Vec<Check>, data: serde_json::Value) -> Self {
        let pass = checks.iter().all(|c| c.pass);
        Report {
            schema: SCHEMA.into(),
            tool_version: TOOL_VERSION.into(),
            command: command.into(),
            timestamp: timestamp(),
            config: config.clone(),
            checks,
            data,
            pass,
        }
    }
}

fn timestamp() -> u64 {
    if let Some(t) = std::env::var("SOURCE_DATE_EPOCH").ok().and_then(|v| v.trim().parse().ok()) {
        return t;
    }
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

/// Writes `bytes` next to `path` and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> std::io::Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value).map_err(std::io::Error::other)?;
    bytes.push(b'\n');
    write_atomic(path, &bytes)
}

/// CSV with a header row; floats use Rust's shortest round-trip formatting.
pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    let bytes = w.into_inner().map_err(|e| std::io::Error::other(e.to_string()))?;
    write_atomic(path, &bytes)
}

pub fn num(v: f64) -> String {
    if v.is_finite() {
        format!("{v:e}")
    } else {
        String::new()
    }
}
