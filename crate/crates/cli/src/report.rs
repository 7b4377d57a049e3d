//! Reads run directories back: single runs and sweep summaries.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use fourier_topo::post::{FEATURE_FILE, HISTORY_FILE};

use crate::config::{RunConfig, Solver, CONFIG_FILE};

pub const SUMMARY_FILE: &str = "summary.csv";

/// Final state of one run directory, recovered from its files.
#[derive(Clone, Debug, PartialEq)]
pub struct CellReport {
    pub solver: String,
    pub problem: String,
    pub converged: bool,
    pub iterations: usize,
    pub compliance: f64,
    pub fraction: f64,
    pub gray_fraction: f64,
    pub feature_status: String,
    pub median_thickness: f64,
}

fn read(dir: &Path, name: &str) -> Result<String> {
    let path = dir.join(name);
    fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))
}

/// Header-indexed rows of a comma-delimited table.
fn table(text: &str, what: &str) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header: Vec<String> = lines
        .next()
        .with_context(|| format!("{what} is empty"))?
        .split(',')
        .map(|s| s.trim().to_string())
        .collect();
    let rows: Vec<Vec<String>> = lines.map(|l| l.split(',').map(|s| s.trim().to_string()).collect()).collect();
    if let Some(bad) = rows.iter().position(|r| r.len() != header.len()) {
        bail!("{what} row {} has {} fields, expected {}", bad + 1, rows[bad].len(), header.len());
    }
    Ok((header, rows))
}

fn field<'a>(header: &[String], row: &'a [String], name: &str, what: &str) -> Result<&'a str> {
    let i = header
        .iter()
        .position(|h| h == name)
        .with_context(|| format!("{what} has no '{name}' column"))?;
    Ok(&row[i])
}

fn number(header: &[String], row: &[String], name: &str, what: &str) -> Result<f64> {
    let v = field(header, row, name, what)?;
    v.parse().with_context(|| format!("{what}: '{name}' value '{v}' is not a number"))
}

impl CellReport {
    pub fn load(dir: &Path) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(&read(dir, CONFIG_FILE)?)
            .with_context(|| format!("parsing {}", dir.join(CONFIG_FILE).display()))?;

        let (h, rows) = table(&read(dir, HISTORY_FILE)?, HISTORY_FILE)?;
        let last = rows.last().with_context(|| format!("{HISTORY_FILE} has no rows"))?;
        let gray = number(&h, last, "gray_fraction", HISTORY_FILE)?;
        let iterations = rows.len();
        // the neural stopping rule is exact; a SIMP run that used its whole
        // budget is counted as not converged
        let converged = match cfg.solver {
            Solver::Simp => iterations < cfg.simp.max_iters,
            _ => iterations >= cfg.opt.min_epochs && gray < cfg.opt.eps_g_star,
        };

        let (fh, frows) = table(&read(dir, FEATURE_FILE)?, FEATURE_FILE)?;
        let f = frows.first().with_context(|| format!("{FEATURE_FILE} has no rows"))?;
        Ok(Self {
            solver: cfg.solver.as_str().to_string(),
            problem: cfg.problem.name.clone(),
            converged,
            iterations,
            compliance: number(&h, last, "compliance", HISTORY_FILE)?,
            fraction: number(&h, last, "volume_or_mass_fraction", HISTORY_FILE)?,
            gray_fraction: gray,
            feature_status: field(&fh, f, "status", FEATURE_FILE)?.to_string(),
            median_thickness: number(&fh, f, "median_thickness", FEATURE_FILE)?,
        })
    }
}

pub const SUMMARY_HEADER: &str = "cell,converged,iterations,compliance,fraction,gray_fraction,median_thickness";

pub fn summary_row(cell: &str, r: &CellReport) -> String {
    let thickness = if r.feature_status == "measured" {
        format!("{:.6e}", r.median_thickness)
    } else {
        "nan".into()
    };
    format!(
        "{cell},{},{},{:.6e},{:.6e},{:.6e},{thickness}",
        r.converged, r.iterations, r.compliance, r.fraction, r.gray_fraction
    )
}

/// Fixed-width rendering of a comma-delimited table.
pub fn align(text: &str) -> String {
    let rows: Vec<Vec<&str>> = text.lines().filter(|l| !l.is_empty()).map(|l| l.split(',').collect()).collect();
    let cols = rows.iter().map(Vec::len).max().unwrap_or(0);
    let widths: Vec<usize> = (0..cols)
        .map(|c| rows.iter().filter_map(|r| r.get(c)).map(|s| s.len()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for r in rows {
        let line: Vec<String> = r.iter().enumerate().map(|(c, s)| format!("{s:>w$}", w = widths[c])).collect();
        out.push_str(line.join("  ").trim_end());
        out.push('\n');
    }
    out
}

/// Human-readable report of a run directory or a sweep directory.
pub fn report(dir: &Path) -> Result<String> {
    if dir.join(SUMMARY_FILE).exists() {
        return Ok(align(&read(dir, SUMMARY_FILE)?));
    }
    if !dir.join(CONFIG_FILE).exists() {
        bail!("{} holds neither a run ({CONFIG_FILE}) nor a sweep ({SUMMARY_FILE})", dir.display());
    }
    let r = CellReport::load(dir)?;
    let thickness = if r.feature_status == "measured" {
        format!("{:.4}", r.median_thickness)
    } else {
        format!("n/a ({})", r.feature_status)
    };
    Ok(format!(
        "solver            {}\nproblem           {}\nconverged         {}\niterations        {}\ncompliance        {:.6}\nfraction          {:.4}\ngray fraction     {:.4}\nmedian thickness  {thickness}\n",
        r.solver, r.problem, r.converged, r.iterations, r.compliance, r.fraction, r.gray_fraction
    ))
}
