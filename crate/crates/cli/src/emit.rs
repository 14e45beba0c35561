//! Deterministic emission: the payload carries data only (bit-identical
//! across reruns of the same config on the same build); everything dated
//! or environmental goes to the metadata sidecar.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::{OutputFormat, RunConfig};
use crate::Failure;

pub const UNITS: &str = "rates in units of γ13, distance in units of 1/κ12";

/// A rectangular all-numeric result: every workflow emits one of these.
#[derive(Debug, Serialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

/// 17 significant digits: enough to reproduce every f64 exactly.
fn cell(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn render_csv(table: &Table) -> String {
    let mut out = table.columns.join(",");
    out.push('\n');
    for row in &table.rows {
        let mut first = true;
        for &v in row {
            if !first {
                out.push(',');
            }
            out.push_str(&cell(v));
            first = false;
        }
        out.push('\n');
    }
    out
}

pub fn render_json(table: &Table) -> String {
    let mut out = serde_json::to_string(table).expect("tables serialize");
    out.push('\n');
    out
}

#[derive(Serialize)]
pub struct Sidecar<'a> {
    pub tool: &'static str,
    pub version: &'static str,
    pub created: String,
    pub units: &'static str,
    pub workflow: &'static str,
    pub format: &'static str,
    pub payload: String,
    pub config: &'a RunConfig,
    pub summary: &'a serde_json::Value,
}

pub fn sidecar_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_os_string();
    name.push(".meta.json");
    PathBuf::from(name)
}

fn write(path: &Path, bytes: &str) -> Result<(), Failure> {
    fs::write(path, bytes)
        .map_err(|e| Failure::config(format!("cannot write {}: {e}", path.display())))
}

pub fn emit(
    out: &Path,
    format: OutputFormat,
    table: &Table,
    sidecar: &Sidecar,
) -> Result<(), Failure> {
    let payload = match format {
        OutputFormat::Csv => render_csv(table),
        OutputFormat::Json => render_json(table),
    };
    write(out, &payload)?;
    let meta = serde_json::to_string_pretty(sidecar).expect("sidecars serialize");
    write(&sidecar_path(out), &format!("{meta}\n"))
}
