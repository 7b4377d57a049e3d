//! One run per value of a single configuration key.

use std::fs;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use toml::Value;

use crate::config::{parse_assignment, parse_config};
use crate::report::{summary_row, CellReport, SUMMARY_FILE, SUMMARY_HEADER};
use crate::runner::{run_experiment, RunSummary};

#[derive(Clone, Debug, PartialEq)]
pub struct Axis {
    pub key: String,
    /// Values as written, each a TOML literal or a bare string.
    pub values: Vec<String>,
}

/// Parses `key=v1,v2,...`.
pub fn parse_axis(text: &str) -> Result<Axis> {
    let (key, values) = parse_assignment(text)?;
    let values: Vec<String> = match values {
        Value::Array(items) => items.iter().map(|v| v.to_string()).collect(),
        _ => {
            let raw = text.split_once('=').expect("checked by parse_assignment").1;
            raw.split(',').map(|v| v.trim().to_string()).collect()
        }
    };
    if values.iter().any(String::is_empty) {
        bail!("axis '{text}' has an empty value");
    }
    Ok(Axis { key, values })
}

/// Directory name of one cell: last key segment and value.
pub fn cell_name(key: &str, value: &str) -> String {
    let leaf = key.rsplit('.').next().unwrap_or(key);
    let clean: String = value
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '.' || c == '-' { c } else { '_' })
        .collect();
    format!("{leaf}_{clean}")
}

pub struct SweepResult {
    pub dir: PathBuf,
    pub cells: Vec<(String, RunSummary)>,
    pub summary: PathBuf,
}

impl SweepResult {
    /// 0 if every cell converged, 2 otherwise.
    pub fn exit_code(&self) -> i32 {
        self.cells.iter().map(|(_, s)| s.exit_code()).max().unwrap_or(0)
    }
}

/// Runs every cell under `output.dir` in turn, then aggregates the cell
/// directories into the summary table.
pub fn run_sweep(base_text: &str, overrides: &[String], axis: &Axis) -> Result<SweepResult> {
    let root = parse_config(base_text, overrides)?.config.output.dir;
    let mut cells = Vec::new();
    for value in &axis.values {
        let name = cell_name(&axis.key, value);
        let mut sets = overrides.to_vec();
        sets.push(format!("{}={value}", axis.key));
        let dir = Value::String(root.join(&name).to_string_lossy().into_owned());
        sets.push(format!("output.dir={dir}"));
        let cfg = parse_config(base_text, &sets).with_context(|| format!("sweep cell {name}"))?.config;
        let summary = run_experiment(&cfg).with_context(|| format!("sweep cell {name}"))?;
        cells.push((name, summary));
    }
    let mut text = format!("{SUMMARY_HEADER}\n");
    for (name, _) in &cells {
        let report = CellReport::load(&root.join(name))?;
        text.push_str(&summary_row(name, &report));
        text.push('\n');
    }
    let summary = root.join(SUMMARY_FILE);
    fs::write(&summary, text).with_context(|| format!("writing {}", summary.display()))?;
    Ok(SweepResult { dir: root, cells, summary })
}
