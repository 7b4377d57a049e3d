//! Mesh-based SIMP with a linear hat density filter and optimality-criteria
//! updates, sharing the finite-element code with the neural path.

use crate::error::{invalid, Result, TopoError};
use crate::fea::{assemble_and_solve, GridMesh, Passive, E_MIN_RATIO};
use crate::material::simp_modulus;
use crate::opt::{gray_fraction, History, HistoryRow, RunStatus, PASSIVE_SOLID_DENSITY, PASSIVE_VOID_DENSITY};

/// Normalized hat weights `w_ej ∝ max(0, r_min - dist(e, j))`, distances in
/// element widths.
#[derive(Clone, Debug, PartialEq)]
pub struct FilterKernel {
    radius: f64,
    rows: Vec<Vec<(usize, f64)>>,
}

impl FilterKernel {
    pub fn new(nelx: usize, nely: usize, r_min: f64) -> Result<Self> {
        if !(r_min > 0.0 && r_min.is_finite()) {
            return Err(invalid(format!("filter radius must be positive, got {r_min}")));
        }
        let reach = (r_min.ceil() as usize).saturating_sub(1);
        let mut rows = Vec::with_capacity(nelx * nely);
        for i in 0..nelx {
            for j in 0..nely {
                let mut row = Vec::new();
                for k in i.saturating_sub(reach)..(i + reach + 1).min(nelx) {
                    for l in j.saturating_sub(reach)..(j + reach + 1).min(nely) {
                        let di = k as f64 - i as f64;
                        let dj = l as f64 - j as f64;
                        let w = r_min - (di * di + dj * dj).sqrt();
                        if w > 0.0 {
                            row.push((k * nely + l, w));
                        }
                    }
                }
                let total: f64 = row.iter().map(|(_, w)| w).sum();
                for entry in &mut row {
                    entry.1 /= total;
                }
                rows.push(row);
            }
        }
        Ok(Self { radius: r_min, rows })
    }

    pub fn for_mesh(mesh: &GridMesh, r_min: f64) -> Result<Self> {
        Self::new(mesh.nelx(), mesh.nely(), r_min)
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Neighbor indices and weights of element `e`.
    pub fn row(&self, e: usize) -> &[(usize, f64)] {
        &self.rows[e]
    }

    /// Chain rule through the filter: `d/drho_j = sum_e w_ej d/drho~_e`.
    pub fn transpose_apply(&self, grad: &[f64]) -> Result<Vec<f64>> {
        self.check_len(grad.len())?;
        let mut out = vec![0.0; grad.len()];
        for (e, row) in self.rows.iter().enumerate() {
            for &(j, w) in row {
                out[j] += w * grad[e];
            }
        }
        Ok(out)
    }

    fn check_len(&self, n: usize) -> Result<()> {
        if n != self.rows.len() {
            return Err(invalid(format!("field has {n} entries, filter expects {}", self.rows.len())));
        }
        Ok(())
    }
}

pub fn density_filter(rho: &[f64], kernel: &FilterKernel) -> Result<Vec<f64>> {
    kernel.check_len(rho.len())?;
    Ok(kernel
        .rows
        .iter()
        .map(|row| row.iter().map(|&(j, w)| w * rho[j]).sum())
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OcSettings {
    pub move_limit: f64,
    pub damping: f64,
    pub rho_min: f64,
}

impl Default for OcSettings {
    fn default() -> Self {
        Self {
            move_limit: 0.2,
            damping: 0.5,
            rho_min: 1e-3,
        }
    }
}

/// Design variables and the filtered (physical) field after one update.
#[derive(Clone, Debug, PartialEq)]
pub struct OcStep {
    pub design: Vec<f64>,
    pub physical: Vec<f64>,
    pub multiplier: f64,
}

const OC_MAX_BISECTIONS: usize = 100;
const OC_VOLUME_TOL: f64 = 1e-4;

/// One optimality-criteria update. `sensitivities` are compliance gradients
/// with respect to the design variables; `fixed` pins entries (passive
/// elements) in both the design and physical fields. The multiplier is found
/// by bisection in log space so the mean physical density equals `target`.
pub fn oc_update(
    rho: &[f64],
    sensitivities: &[f64],
    target: f64,
    kernel: &FilterKernel,
    fixed: &[Option<f64>],
    settings: &OcSettings,
) -> Result<OcStep> {
    let n = rho.len();
    kernel.check_len(n)?;
    if sensitivities.len() != n || fixed.len() != n {
        return Err(invalid("density, sensitivity and fixed-mask lengths differ"));
    }
    if !(settings.move_limit > 0.0 && settings.move_limit <= 1.0) {
        return Err(invalid(format!("move limit must lie in (0, 1], got {}", settings.move_limit)));
    }
    if !(target > 0.0 && target <= 1.0) {
        return Err(invalid(format!("target fraction must lie in (0, 1], got {target}")));
    }
    if let Some(e) = sensitivities.iter().position(|s| !s.is_finite() || *s > 0.0) {
        return Err(invalid(format!(
            "compliance sensitivity of element {e} is {}, expected a finite value <= 0",
            sensitivities[e]
        )));
    }

    let candidate = |lambda: f64| -> (Vec<f64>, Vec<f64>, f64) {
        let design: Vec<f64> = (0..n)
            .map(|e| match fixed[e] {
                Some(v) => v,
                None => {
                    let b = (-sensitivities[e]).max(1e-30) / lambda;
                    let lo = (rho[e] - settings.move_limit).max(settings.rho_min);
                    let hi = (rho[e] + settings.move_limit).min(1.0);
                    (rho[e] * b.powf(settings.damping)).clamp(lo, hi)
                }
            })
            .collect();
        let mut physical = density_filter(&design, kernel).expect("length checked above");
        for (p, f) in physical.iter_mut().zip(fixed) {
            if let Some(v) = f {
                *p = *v;
            }
        }
        let frac = physical.iter().sum::<f64>() / n as f64;
        (design, physical, frac)
    };

    let (mut lo, mut hi) = (1e-60f64.ln(), 1e60f64.ln());
    for _ in 0..OC_MAX_BISECTIONS {
        let mid = 0.5 * (lo + hi);
        let (design, physical, frac) = candidate(mid.exp());
        if (frac - target).abs() <= OC_VOLUME_TOL * target {
            return Ok(OcStep {
                design,
                physical,
                multiplier: mid.exp(),
            });
        }
        if frac > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (_, _, reached) = candidate((0.5 * (lo + hi)).exp());
    Err(TopoError::Numeric(format!(
        "optimality-criteria bisection did not meet volume {target} after {OC_MAX_BISECTIONS} iterations \
         (closest {reached:.6}); the target may be unreachable within the move limit"
    )))
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimpConfig {
    pub target_fraction: f64,
    pub p: f64,
    pub r_min: f64,
    pub max_iters: usize,
    /// Stop once the largest design change drops below this.
    pub change_tol: f64,
    pub oc: OcSettings,
}

impl Default for SimpConfig {
    fn default() -> Self {
        Self {
            target_fraction: 0.5,
            p: 3.0,
            r_min: 1.4,
            max_iters: 500,
            change_tol: 0.01,
            oc: OcSettings::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimpOutcome {
    pub status: RunStatus,
    pub design: Vec<f64>,
    /// Filtered densities, the field the FE model sees.
    pub physical: Vec<f64>,
    /// `loss` holds the compliance, `alpha` is zero.
    pub history: History,
}

fn passive_values(mesh: &GridMesh) -> Vec<Option<f64>> {
    (0..mesh.n_elements())
        .map(|e| {
            mesh.passive(e).map(|k| match k {
                Passive::Solid => PASSIVE_SOLID_DENSITY,
                Passive::Void => PASSIVE_VOID_DENSITY,
            })
        })
        .collect()
}

pub fn run_simp(mesh: &GridMesh, config: &SimpConfig) -> Result<SimpOutcome> {
    if config.p < 1.0 {
        return Err(invalid(format!("penalty exponent must be >= 1, got {}", config.p)));
    }
    if config.max_iters == 0 {
        return Err(invalid("max_iters must be positive"));
    }
    let n = mesh.n_elements();
    let kernel = FilterKernel::for_mesh(mesh, config.r_min)?;
    let fixed = passive_values(mesh);
    let mut design: Vec<f64> = fixed.iter().map(|f| f.unwrap_or(config.target_fraction)).collect();
    let mut physical = density_filter(&design, &kernel)?;
    for (p, f) in physical.iter_mut().zip(&fixed) {
        if let Some(v) = f {
            *p = *v;
        }
    }

    let mut history = History::default();
    let mut status = RunStatus::MaxEpochs;
    for iter in 0..config.max_iters {
        let young = simp_modulus(&physical, config.p, 1.0, E_MIN_RATIO);
        let solved = assemble_and_solve(mesh, &young)?;
        let compliance = solved.total_stiffness_energy;
        let d_physical: Vec<f64> = physical
            .iter()
            .zip(&solved.element_compliance)
            .zip(&fixed)
            .map(|((r, j), f)| match f {
                Some(_) => 0.0,
                None => -config.p * r.powf(config.p - 1.0) * (1.0 - E_MIN_RATIO) * j.max(0.0),
            })
            .collect();
        let sens = kernel.transpose_apply(&d_physical)?;
        history.rows.push(HistoryRow {
            epoch: iter,
            loss: compliance,
            compliance,
            fraction: physical.iter().sum::<f64>() / n as f64,
            gray_fraction: gray_fraction(&physical),
            alpha: 0.0,
            p: config.p,
        });

        let step = oc_update(&design, &sens, config.target_fraction, &kernel, &fixed, &config.oc)?;
        let change = design
            .iter()
            .zip(&step.design)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        design = step.design;
        physical = step.physical;
        if change < config.change_tol {
            status = RunStatus::Converged;
            break;
        }
    }
    Ok(SimpOutcome {
        status,
        design,
        physical,
        history,
    })
}
