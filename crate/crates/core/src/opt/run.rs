use std::fmt;

use ndarray::Array2;

use super::adam::{adam_step, AdamConfig, AdamState};
use super::loss::{compute_j0, element_moduli, loss, loss_grad_wrt_density, Constraint, LossContext};
use crate::error::{invalid, Result, TopoError};
use crate::fea::{assemble_and_solve, GridMesh, Passive};
use crate::net::{solid_indicator, DensityField, FieldInput, Mode, Network};

/// Density written into passive-solid elements.
pub const PASSIVE_SOLID_DENSITY: f64 = 1.0;
/// Density written into passive-void elements.
pub const PASSIVE_VOID_DENSITY: f64 = 1e-3;

#[derive(Clone, Debug, PartialEq)]
pub struct OptConfig {
    /// Target volume fraction, or mass fraction with a material catalog.
    pub target_fraction: f64,
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
    pub seed: u64,
}

impl Default for OptConfig {
    fn default() -> Self {
        Self {
            target_fraction: 0.5,
            alpha0: 0.2,
            d_alpha: 0.2,
            alpha_max: 100.0,
            p0: 1.0,
            d_p: 0.02,
            p_max: 8.0,
            lr: 0.01,
            beta1: 0.9,
            beta2: 0.999,
            eps_adam: 1e-8,
            eps_g_star: 0.0025,
            min_epochs: 150,
            max_epochs: 500,
            seed: 0,
        }
    }
}

impl OptConfig {
    pub fn validate(&self) -> Result<()> {
        let checks: [(bool, &str); 9] = [
            (self.target_fraction > 0.0 && self.target_fraction <= 1.0, "target fraction must lie in (0, 1]"),
            (self.alpha0 >= 0.0 && self.d_alpha >= 0.0, "penalty start and increment must be non-negative"),
            (self.alpha_max >= self.alpha0, "alpha_max must be at least alpha0"),
            (self.p0 >= 1.0 && self.p_max >= self.p0 && self.d_p >= 0.0, "need 1 <= p0 <= p_max and d_p >= 0"),
            (self.lr > 0.0, "learning rate must be positive"),
            (
                (0.0..1.0).contains(&self.beta1) && (0.0..1.0).contains(&self.beta2) && self.eps_adam > 0.0,
                "Adam moments must lie in [0, 1) and eps must be positive",
            ),
            (self.eps_g_star > 0.0 && self.eps_g_star < 1.0, "gray-fraction threshold must lie in (0, 1)"),
            (self.min_epochs <= self.max_epochs, "min_epochs must not exceed max_epochs"),
            (self.max_epochs > 0, "max_epochs must be positive"),
        ];
        match checks.iter().find(|(ok, _)| !ok) {
            Some((_, msg)) => Err(invalid(*msg)),
            None => Ok(()),
        }
    }

    pub fn adam(&self) -> AdamConfig {
        AdamConfig {
            lr: self.lr,
            beta1: self.beta1,
            beta2: self.beta2,
            eps: self.eps_adam,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HistoryRow {
    pub epoch: usize,
    pub loss: f64,
    pub compliance: f64,
    pub fraction: f64,
    pub gray_fraction: f64,
    pub alpha: f64,
    pub p: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct History {
    pub rows: Vec<HistoryRow>,
}

pub const HISTORY_HEADER: &str = "epoch,loss,compliance,volume_or_mass_fraction,gray_fraction,alpha,p";

impl History {
    pub fn last(&self) -> Option<&HistoryRow> {
        self.rows.last()
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Comma-delimited table with a header row.
    pub fn to_table(&self) -> String {
        let mut out = String::from(HISTORY_HEADER);
        out.push('\n');
        for r in &self.rows {
            out.push_str(&format!(
                "{},{:.10e},{:.10e},{:.10e},{:.10e},{},{}\n",
                r.epoch, r.loss, r.compliance, r.fraction, r.gray_fraction, r.alpha, r.p
            ));
        }
        out
    }
}

/// Fraction of points with `0.05 < rho < 0.95`.
pub fn gray_fraction(rho: &[f64]) -> f64 {
    if rho.is_empty() {
        return 0.0;
    }
    rho.iter().filter(|&&r| r > 0.05 && r < 0.95).count() as f64 / rho.len() as f64
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RunStatus {
    Converged,
    MaxEpochs,
}

#[derive(Debug)]
pub struct RunOutcome {
    pub status: RunStatus,
    pub net: Network,
    pub input: FieldInput,
    /// Training-mode densities of the last epoch at the element centers,
    /// passive overrides applied.
    pub density: DensityField,
    pub history: History,
    pub j0: f64,
}

/// A run that stopped on an error; the history up to that point is kept.
#[derive(Debug)]
pub struct RunAbort {
    pub error: TopoError,
    pub history: History,
}

impl fmt::Display for RunAbort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "optimization aborted after {} epochs: {}", self.history.len(), self.error)
    }
}

impl std::error::Error for RunAbort {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        Some(&self.error)
    }
}

/// Overwrites passive rows and zeroes their sensitivities.
pub(crate) fn apply_passive(mesh: &GridMesh, rho: &mut Array2<f64>) {
    if !mesh.has_passive() {
        return;
    }
    let width = rho.ncols();
    for (e, mut row) in rho.outer_iter_mut().enumerate() {
        let Some(kind) = mesh.passive(e) else { continue };
        if width == 1 {
            row[0] = match kind {
                Passive::Solid => PASSIVE_SOLID_DENSITY,
                Passive::Void => PASSIVE_VOID_DENSITY,
            };
        } else {
            row.fill(0.0);
            row[if kind == Passive::Solid { 1 } else { 0 }] = 1.0;
        }
    }
}

/// Epoch-by-epoch driver for the neural density field.
pub struct NeuralOptimizer {
    mesh: GridMesh,
    net: Network,
    input: FieldInput,
    constraint: Constraint,
    config: OptConfig,
    centers: Array2<f64>,
    features: Array2<f64>,
    adam: AdamState,
    alpha: f64,
    p: f64,
    j0: f64,
    history: History,
    density: Option<Array2<f64>>,
}

impl NeuralOptimizer {
    pub fn new(mesh: GridMesh, net: Network, input: FieldInput, constraint: Constraint, config: OptConfig) -> Result<Self> {
        config.validate()?;
        if (constraint.fraction() - config.target_fraction).abs() > 0.0 {
            return Err(invalid("constraint fraction and config target disagree"));
        }
        if net.arch().n_outputs != constraint.n_outputs() {
            return Err(invalid(format!(
                "network has {} outputs, the constraint needs {}",
                net.arch().n_outputs,
                constraint.n_outputs()
            )));
        }
        let centers = mesh.element_centers();
        let features = input.features(centers.view())?;
        if features.ncols() != net.arch().n_inputs {
            return Err(invalid(format!(
                "input map produces {} features, network expects {}",
                features.ncols(),
                net.arch().n_inputs
            )));
        }
        let j0 = compute_j0(&mesh, &constraint, config.p0)?;
        Ok(Self {
            adam: AdamState::new(net.params()),
            alpha: config.alpha0,
            p: config.p0,
            mesh,
            net,
            input,
            constraint,
            centers,
            features,
            config,
            j0,
            history: History::default(),
            density: None,
        })
    }

    pub fn mesh(&self) -> &GridMesh {
        &self.mesh
    }

    pub fn net(&self) -> &Network {
        &self.net
    }

    pub fn history(&self) -> &History {
        &self.history
    }

    pub fn j0(&self) -> f64 {
        self.j0
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn penalty_exponent(&self) -> f64 {
        self.p
    }

    pub fn adam_steps(&self) -> u64 {
        self.adam.steps()
    }

    /// Densities from the most recent epoch.
    pub fn density(&self) -> Option<&Array2<f64>> {
        self.density.as_ref()
    }

    /// Forward, FE solve, loss, backward, Adam step, then the penalty and
    /// continuation updates.
    pub fn step(&mut self) -> Result<HistoryRow> {
        let mut rho = self.net.forward(self.features.view(), Mode::Train)?;
        apply_passive(&self.mesh, &mut rho);

        let young = element_moduli(rho.view(), self.p, &self.constraint)?;
        let solved = assemble_and_solve(&self.mesh, &young)?;
        let ctx = LossContext {
            p: self.p,
            alpha: self.alpha,
            j0: self.j0,
            element_volume: self.mesh.element_volume(),
            domain_volume: self.mesh.domain_volume(),
            constraint: &self.constraint,
        };
        let terms = loss(rho.view(), &solved.element_compliance, &ctx)?;
        let mut upstream = loss_grad_wrt_density(rho.view(), &solved.element_compliance, &ctx)?;
        if self.mesh.has_passive() {
            for (e, mut row) in upstream.outer_iter_mut().enumerate() {
                if self.mesh.passive(e).is_some() {
                    row.fill(0.0);
                }
            }
        }
        let grad = self.net.backward(self.features.view(), upstream.view())?;
        adam_step(self.net.params_mut(), &grad, &mut self.adam, &self.config.adam())?;

        let row = HistoryRow {
            epoch: self.history.len(),
            loss: terms.loss,
            compliance: terms.compliance,
            fraction: terms.fraction,
            gray_fraction: gray_fraction(&solid_indicator(&rho)),
            alpha: self.alpha,
            p: self.p,
        };
        self.history.rows.push(row);
        self.density = Some(rho);

        self.alpha = (self.alpha + self.config.d_alpha).min(self.config.alpha_max);
        self.p = (self.p + self.config.d_p).min(self.config.p_max);
        Ok(row)
    }

    pub fn is_converged(&self) -> bool {
        self.history.last().is_some_and(|r| {
            self.history.len() >= self.config.min_epochs && r.gray_fraction < self.config.eps_g_star
        })
    }

    pub fn is_finished(&self) -> bool {
        self.is_converged() || self.history.len() >= self.config.max_epochs
    }

    pub fn run(mut self) -> std::result::Result<RunOutcome, RunAbort> {
        while !self.is_finished() {
            if let Err(error) = self.step() {
                return Err(RunAbort {
                    error,
                    history: self.history,
                });
            }
        }
        let status = if self.is_converged() {
            RunStatus::Converged
        } else {
            RunStatus::MaxEpochs
        };
        Ok(self.into_outcome(status))
    }

    pub fn into_outcome(self, status: RunStatus) -> RunOutcome {
        let values = self
            .density
            .unwrap_or_else(|| Array2::zeros((self.mesh.n_elements(), self.constraint.n_outputs())));
        RunOutcome {
            status,
            net: self.net,
            input: self.input,
            density: DensityField {
                values,
                points: self.centers,
            },
            history: self.history,
            j0: self.j0,
        }
    }
}

/// Runs the optimization loop to convergence or `max_epochs`.
pub fn run(
    mesh: GridMesh,
    net: Network,
    input: FieldInput,
    constraint: Constraint,
    config: OptConfig,
) -> std::result::Result<RunOutcome, RunAbort> {
    let opt = NeuralOptimizer::new(mesh, net, input, constraint, config).map_err(|error| RunAbort {
        error,
        history: History::default(),
    })?;
    opt.run()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gray_fraction_examples() {
        assert_eq!(gray_fraction(&[0.04, 0.5, 0.96, 0.2]), 0.5);
        assert_eq!(gray_fraction(&[1.0; 7]), 0.0);
        assert_eq!(gray_fraction(&[0.5; 7]), 1.0);
        assert_eq!(gray_fraction(&[0.05, 0.95]), 0.0);
    }

    #[test]
    fn config_validation() {
        assert!(OptConfig::default().validate().is_ok());
        let bad = OptConfig {
            min_epochs: 600,
            ..OptConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = OptConfig {
            target_fraction: 0.0,
            ..OptConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = OptConfig {
            p0: 0.5,
            ..OptConfig::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn history_table_has_header_and_rows() {
        let h = History {
            rows: vec![HistoryRow {
                epoch: 0,
                loss: 1.0,
                compliance: 2.0,
                fraction: 0.5,
                gray_fraction: 1.0,
                alpha: 0.2,
                p: 1.0,
            }],
        };
        let t = h.to_table();
        let lines: Vec<&str> = t.lines().collect();
        assert_eq!(lines[0], HISTORY_HEADER);
        assert_eq!(lines[1].split(',').count(), 7);
    }
}
