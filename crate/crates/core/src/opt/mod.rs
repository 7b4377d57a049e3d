//! Penalty-formulated loss, density sensitivities, Adam and the training loop.

mod adam;
mod loss;
mod run;

pub use adam::{adam_step, AdamConfig, AdamState};
pub use loss::{
    compliance, compute_j0, element_moduli, loss, loss_grad_wrt_density, Constraint, LossContext, LossTerms,
};
pub use run::{
    gray_fraction, run, History, HistoryRow, NeuralOptimizer, OptConfig, RunAbort, RunOutcome, RunStatus,
    HISTORY_HEADER, PASSIVE_SOLID_DENSITY, PASSIVE_VOID_DENSITY,
};
pub(crate) use run::apply_passive;
