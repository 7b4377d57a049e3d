//! Runs one configuration end to end and writes its run directory.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use fourier_topo::fea::GridMesh;
use fourier_topo::net::{save_checkpoint, FieldInput, FrequencyBank, NetArch, Network};
use fourier_topo::opt::{run, Constraint, History, OptConfig, RunStatus};
use fourier_topo::post::{
    density_spectrum_2d, export_outputs, extract_highres, feature_size, FeatureSizeReport, FeatureStatus, FineField,
};
use fourier_topo::problems::make_problem;
use fourier_topo::simp::{run_simp, SimpConfig};
use ndarray::Array2;

use crate::config::{RunConfig, Solver, CONFIG_FILE};

pub const CHECKPOINT_FILE: &str = "weights.ckpt";

#[derive(Clone, Debug, PartialEq)]
pub struct RunSummary {
    pub status: RunStatus,
    pub epochs: usize,
    pub compliance: f64,
    pub fraction: f64,
    pub gray_fraction: f64,
    pub features: FeatureSizeReport,
    pub dir: PathBuf,
    pub files: Vec<PathBuf>,
}

impl RunSummary {
    /// Process exit code: 0 converged, 2 stopped at the iteration limit.
    pub fn exit_code(&self) -> i32 {
        match self.status {
            RunStatus::Converged => 0,
            RunStatus::MaxEpochs => 2,
        }
    }
}

struct Solved {
    status: RunStatus,
    history: History,
    field: FineField,
}

fn opt_config(cfg: &RunConfig) -> OptConfig {
    let o = &cfg.opt;
    OptConfig {
        target_fraction: cfg.target_fraction(),
        alpha0: o.alpha0,
        d_alpha: o.d_alpha,
        alpha_max: o.alpha_max,
        p0: o.p0,
        d_p: o.d_p,
        p_max: o.p_max,
        lr: o.lr,
        beta1: o.beta1,
        beta2: o.beta2,
        eps_adam: o.eps_adam,
        eps_g_star: o.eps_g_star,
        min_epochs: o.min_epochs,
        max_epochs: o.max_epochs,
        seed: cfg.seed,
    }
}

fn solve_neural(cfg: &RunConfig, mesh: &GridMesh, extrude: fourier_topo::net::Extrude, dir: &Path) -> Result<Solved> {
    let catalog = cfg.catalog()?;
    let n_outputs = catalog.as_ref().map_or(1, |c| c.len());
    let constraint = match catalog {
        None => Constraint::Volume {
            fraction: cfg.target_fraction(),
        },
        Some(catalog) => Constraint::Mass {
            fraction: cfg.target_fraction(),
            catalog,
        },
    };
    let (mut arch, input) = match cfg.solver {
        Solver::FourierTounn => {
            let bank = FrequencyBank::build(
                cfg.l_min(),
                cfg.l_max(),
                mesh.h(),
                cfg.projection.n_f,
                2,
                cfg.seed,
                cfg.sampling()?,
            )?;
            (
                NetArch::fourier(cfg.projection.n_f, cfg.net.n_hidden, cfg.n_layers(), n_outputs),
                FieldInput::fourier(bank),
            )
        }
        _ => (
            NetArch::coordinate(2, cfg.net.n_hidden, cfg.n_layers(), n_outputs),
            FieldInput::coordinates(),
        ),
    };
    arch.batch_norm = cfg.net.batch_norm;
    let net = Network::init(arch, cfg.seed)?;
    let out = run(mesh.clone(), net, input.with_extrude(extrude), constraint, opt_config(cfg)).map_err(|abort| {
        match abort.history.len() {
            0 => anyhow::anyhow!("{}", abort.error),
            n => anyhow::anyhow!("{} (after {n} epochs)", abort.error),
        }
    })?;
    let field = extract_highres(&out.net, &out.input, mesh, cfg.output.samples_per_element)?;
    if cfg.output.checkpoint {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        save_checkpoint(&dir.join(CHECKPOINT_FILE), &out.net, out.input.projection.as_ref())?;
    }
    Ok(Solved {
        status: out.status,
        history: out.history,
        field,
    })
}

fn solve_simp(cfg: &RunConfig, mesh: &GridMesh) -> Result<Solved> {
    let s = &cfg.simp;
    let simp = SimpConfig {
        target_fraction: cfg.target_fraction(),
        p: s.p,
        r_min: s.r_min,
        max_iters: s.max_iters,
        change_tol: s.change_tol,
        ..SimpConfig::default()
    };
    let out = run_simp(mesh, &simp)?;
    let rows = Array2::from_shape_vec((out.physical.len(), 1), out.physical).expect("one column per element");
    Ok(Solved {
        status: out.status,
        history: out.history,
        field: FineField::from_elements(mesh, &rows, cfg.output.samples_per_element)?,
    })
}

/// Radial amplitude profile of the solid indicator, bins one frequency
/// step wide.
pub fn radial_spectrum(field: &FineField, h: f64) -> Result<Vec<(f64, f64)>> {
    let spec = density_spectrum_2d(field.solid().view(), field.spacing, h)?;
    Ok(spec.radial_profile(spec.resolution()))
}

/// Solves, extracts and exports into `cfg.output.dir`, echoing the
/// configuration alongside.
pub fn run_experiment(cfg: &RunConfig) -> Result<RunSummary> {
    let dir = cfg.output.dir.clone();
    let (spec, mesh) = make_problem(&cfg.problem.name, &cfg.problem_overrides())?;
    let solved = match cfg.solver {
        Solver::Simp => solve_simp(cfg, &mesh)?,
        _ => solve_neural(cfg, &mesh, spec.extrude, &dir)?,
    };
    let spectrum = radial_spectrum(&solved.field, mesh.h())?;
    let features = feature_size(&solved.field, cfg.output.threshold)?;
    let exported = export_outputs(&dir, &solved.field, &solved.history, &spectrum, &features)?;
    let config_path = dir.join(CONFIG_FILE);
    fs::write(&config_path, cfg.to_toml()).with_context(|| format!("writing {}", config_path.display()))?;

    let last = solved.history.last().context("the solver recorded no iterations")?;
    let mut files = vec![
        exported.image,
        exported.density,
        exported.history,
        exported.spectrum,
        exported.features,
        config_path,
    ];
    if cfg.output.checkpoint && cfg.solver.uses_network() {
        files.push(dir.join(CHECKPOINT_FILE));
    }
    Ok(RunSummary {
        status: solved.status,
        epochs: solved.history.len(),
        compliance: last.compliance,
        fraction: last.fraction,
        gray_fraction: last.gray_fraction,
        features,
        dir,
        files,
    })
}

pub fn describe(summary: &RunSummary) -> String {
    let thickness = match summary.features.status {
        FeatureStatus::Measured => format!("{:.3}", summary.features.median_thickness),
        FeatureStatus::Empty => "n/a (no solid)".into(),
    };
    format!(
        "{:?} after {} iterations: compliance {:.6}, fraction {:.4}, gray fraction {:.4}, median thickness {thickness}\noutputs in {}",
        summary.status,
        summary.epochs,
        summary.compliance,
        summary.fraction,
        summary.gray_fraction,
        summary.dir.display()
    )
}
