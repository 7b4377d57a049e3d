//! Run configuration: a TOML file with dotted sections, `--set key=value`
//! overrides on top, defaults for everything else.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use fourier_topo::material::{Material, MaterialCatalog};
use fourier_topo::net::FrequencySampling;
use fourier_topo::opt::OptConfig;
use fourier_topo::problems::{ProblemOverrides, ProblemSpec};
use serde::{Deserialize, Serialize};
use toml::{Table, Value};

/// File name of the echoed effective configuration in a run directory.
pub const CONFIG_FILE: &str = "config.toml";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Solver {
    #[default]
    FourierTounn,
    /// Raw coordinates into a deeper network, no projection.
    TounnAblation,
    Simp,
}

impl Solver {
    pub fn as_str(self) -> &'static str {
        match self {
            Solver::FourierTounn => "fourier_tounn",
            Solver::TounnAblation => "tounn_ablation",
            Solver::Simp => "simp",
        }
    }

    pub fn uses_network(self) -> bool {
        self != Solver::Simp
    }

    pub fn uses_projection(self) -> bool {
        self == Solver::FourierTounn
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProblemSection {
    pub name: String,
    pub nelx: Option<usize>,
    pub nely: Option<usize>,
    pub h: Option<f64>,
    /// Volume fraction, or mass fraction with more than one solid.
    pub target_fraction: Option<f64>,
}

impl Default for ProblemSection {
    fn default() -> Self {
        Self {
            name: "mid_cantilever".into(),
            nelx: None,
            nely: None,
            h: None,
            target_fraction: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProjectionSection {
    pub l_min: Option<f64>,
    pub l_max: Option<f64>,
    pub n_f: usize,
    /// `random` or `grid`.
    pub sampling: String,
}

impl Default for ProjectionSection {
    fn default() -> Self {
        Self {
            l_min: None,
            l_max: None,
            n_f: 150,
            sampling: "random".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NetSection {
    pub n_hidden: usize,
    /// One hidden layer behind the projection, four for the ablation.
    pub n_layers: Option<usize>,
    pub batch_norm: bool,
}

impl Default for NetSection {
    fn default() -> Self {
        Self {
            n_hidden: 20,
            n_layers: None,
            batch_norm: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MaterialEntry {
    pub label: String,
    pub youngs: f64,
    pub density: f64,
}

impl Default for MaterialEntry {
    fn default() -> Self {
        Self {
            label: String::new(),
            youngs: 1.0,
            density: 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MaterialsSection {
    /// Labels picked from the standard catalog (`black`, `red`, `blue`).
    pub solids: Vec<String>,
    /// Additional candidates with explicit properties.
    pub custom: Vec<MaterialEntry>,
}

impl Default for MaterialsSection {
    fn default() -> Self {
        Self {
            solids: vec!["black".into()],
            custom: Vec::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OptSection {
    pub alpha0: f64,
    pub d_alpha: f64,
    pub alpha_max: f64,
    pub p0: f64,
    pub d_p: f64,
    pub p_max: f64,
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps_adam: f64,
    pub eps_g_star: f64,
    pub min_epochs: usize,
    pub max_epochs: usize,
}

impl Default for OptSection {
    fn default() -> Self {
        let d = OptConfig::default();
        Self {
            alpha0: d.alpha0,
            d_alpha: d.d_alpha,
            alpha_max: d.alpha_max,
            p0: d.p0,
            d_p: d.d_p,
            p_max: d.p_max,
            lr: d.lr,
            beta1: d.beta1,
            beta2: d.beta2,
            eps_adam: d.eps_adam,
            eps_g_star: d.eps_g_star,
            min_epochs: d.min_epochs,
            max_epochs: d.max_epochs,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimpSection {
    pub p: f64,
    pub r_min: f64,
    pub max_iters: usize,
    pub change_tol: f64,
}

impl Default for SimpSection {
    fn default() -> Self {
        Self {
            p: 3.0,
            r_min: 1.4,
            max_iters: 500,
            change_tol: 0.01,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub dir: PathBuf,
    /// Samples per element and axis for the high resolution field.
    pub samples_per_element: usize,
    pub threshold: f64,
    /// Also save the trained weights and frequency bank.
    pub checkpoint: bool,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("runs/default"),
            samples_per_element: 15,
            threshold: 0.5,
            checkpoint: false,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub solver: Solver,
    pub seed: u64,
    pub problem: ProblemSection,
    pub projection: ProjectionSection,
    pub net: NetSection,
    pub materials: MaterialsSection,
    pub opt: OptSection,
    pub simp: SimpSection,
    pub output: OutputSection,
}

/// A parsed configuration plus anything worth telling the user about it.
#[derive(Clone, Debug, PartialEq)]
pub struct Loaded {
    pub config: RunConfig,
    pub warnings: Vec<String>,
}

/// Parses `key=value`; the value is read as a TOML literal when possible and
/// as a bare string otherwise.
pub fn parse_assignment(text: &str) -> Result<(String, Value)> {
    let (key, raw) = text
        .split_once('=')
        .with_context(|| format!("override '{text}' is not of the form key=value"))?;
    let key = key.trim();
    if key.is_empty() || key.split('.').any(str::is_empty) {
        bail!("override '{text}' has an empty key segment");
    }
    let raw = raw.trim();
    let value = match toml::from_str::<Table>(&format!("v = {raw}")) {
        Ok(mut t) => t.remove("v").expect("parsed table has the key"),
        Err(_) => Value::String(raw.to_string()),
    };
    Ok((key.to_string(), value))
}

/// Sets a dotted key in `table`, creating intermediate sections.
pub fn set_dotted(table: &mut Table, key: &str, value: Value) -> Result<()> {
    let mut parts: Vec<&str> = key.split('.').collect();
    let last = parts.pop().expect("split yields at least one part");
    let mut cur = table;
    let mut path = String::new();
    for part in parts {
        if !path.is_empty() {
            path.push('.');
        }
        path.push_str(part);
        let entry = cur.entry(part.to_string()).or_insert_with(|| Value::Table(Table::new()));
        cur = match entry {
            Value::Table(t) => t,
            _ => bail!("cannot set '{key}': '{path}' is not a section"),
        };
    }
    cur.insert(last.to_string(), value);
    Ok(())
}

/// Builds a configuration from TOML text and overrides.
pub fn parse_config(text: &str, overrides: &[String]) -> Result<Loaded> {
    let mut table: Table = toml::from_str(text).context("config is not valid TOML")?;
    for o in overrides {
        let (key, value) = parse_assignment(o)?;
        set_dotted(&mut table, &key, value)?;
    }
    let config: RunConfig = Value::Table(table.clone())
        .try_into()
        .map_err(|e: toml::de::Error| anyhow::anyhow!("invalid config: {}", e.message().trim()))?;
    let mut warnings = Vec::new();
    if config.solver == Solver::Simp {
        let d = RunConfig::default();
        let changed: Vec<&str> = [
            ("projection", config.projection != d.projection),
            ("net", config.net != d.net),
            ("materials", config.materials != d.materials),
            ("opt", config.opt != d.opt),
        ]
        .into_iter()
        .filter_map(|(name, differs)| differs.then_some(name))
        .collect();
        if !changed.is_empty() {
            warnings.push(format!("solver simp ignores the [{}] settings", changed.join("], [")));
        }
    }
    let config = config.resolve()?;
    Ok(Loaded { config, warnings })
}

pub fn load_config(path: &Path, overrides: &[String]) -> Result<Loaded> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_config(&text, overrides).with_context(|| format!("in {}", path.display()))
}

impl RunConfig {
    /// Fills problem-dependent defaults and checks invariants. The result
    /// echoes to a file that reproduces the run on its own.
    pub fn resolve(mut self) -> Result<Self> {
        let spec = ProblemSpec::named(&self.problem.name)?;
        let p = &mut self.problem;
        p.nelx.get_or_insert(spec.nelx);
        p.nely.get_or_insert(spec.nely);
        p.h.get_or_insert(spec.h);
        p.target_fraction.get_or_insert(spec.target_fraction);
        if self.solver.uses_projection() {
            self.projection.l_min.get_or_insert(spec.l_min);
            self.projection.l_max.get_or_insert(spec.l_max);
        }
        if self.solver.uses_network() {
            let default_layers = if self.solver == Solver::TounnAblation { 4 } else { 1 };
            self.net.n_layers.get_or_insert(default_layers);
        }
        self.validate()?;
        Ok(self)
    }

    fn validate(&self) -> Result<()> {
        let target = self.target_fraction();
        if !(target > 0.0 && target <= 1.0) {
            bail!("problem.target_fraction must be in (0, 1], got {target}");
        }
        if self.solver.uses_projection() {
            let (lo, hi) = (self.l_min(), self.l_max());
            if !(lo > 0.0) {
                bail!("projection.l_min must be positive, got {lo}");
            }
            if lo > hi {
                bail!("projection.l_min ({lo}) must not exceed projection.l_max ({hi})");
            }
            if self.projection.n_f == 0 {
                bail!("projection.n_f must be at least 1");
            }
            self.sampling()?;
        }
        if self.solver.uses_network() {
            if self.net.n_hidden == 0 {
                bail!("net.n_hidden must be at least 1");
            }
            if self.n_layers() == 0 {
                bail!("net.n_layers must be at least 1");
            }
            self.catalog()?;
        }
        if self.output.samples_per_element == 0 {
            bail!("output.samples_per_element must be at least 1");
        }
        let t = self.output.threshold;
        if !(t > 0.0 && t < 1.0) {
            bail!("output.threshold must be in (0, 1), got {t}");
        }
        Ok(())
    }

    pub fn target_fraction(&self) -> f64 {
        self.problem.target_fraction.expect("resolved config")
    }

    pub fn l_min(&self) -> f64 {
        self.projection.l_min.expect("resolved config")
    }

    pub fn l_max(&self) -> f64 {
        self.projection.l_max.expect("resolved config")
    }

    pub fn n_layers(&self) -> usize {
        self.net.n_layers.expect("resolved config")
    }

    pub fn problem_overrides(&self) -> ProblemOverrides {
        ProblemOverrides {
            nelx: self.problem.nelx,
            nely: self.problem.nely,
            h: self.problem.h,
            target_fraction: self.problem.target_fraction,
            l_min: self.projection.l_min,
            l_max: self.projection.l_max,
        }
    }

    pub fn sampling(&self) -> Result<FrequencySampling> {
        match self.projection.sampling.as_str() {
            "random" => Ok(FrequencySampling::Random),
            "grid" => Ok(FrequencySampling::Grid),
            other => bail!("projection.sampling must be 'random' or 'grid', got '{other}'"),
        }
    }

    /// Void first, then the listed standard solids, then custom entries.
    /// `None` for a single solid: plain volume constraint.
    pub fn catalog(&self) -> Result<Option<MaterialCatalog>> {
        let standard = MaterialCatalog::standard();
        let mut entries = vec![standard.entries()[0].clone()];
        for label in &self.materials.solids {
            let m = standard.entries()[1..]
                .iter()
                .find(|m| &m.label == label)
                .with_context(|| format!("materials.solids: unknown standard material '{label}' (black, red, blue)"))?;
            entries.push(m.clone());
        }
        for c in &self.materials.custom {
            entries.push(Material::new(c.label.clone(), c.youngs, c.density));
        }
        match entries.len() {
            1 => bail!("materials: at least one solid material is required"),
            2 if self.materials.custom.is_empty() && self.materials.solids == ["black"] => Ok(None),
            _ => Ok(Some(MaterialCatalog::new(entries).context("materials")?)),
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}
