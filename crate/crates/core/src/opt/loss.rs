use ndarray::{Array2, ArrayView2};

use crate::error::{invalid, Result, TopoError};
use crate::fea::{assemble_and_solve, GridMesh, E_MIN_RATIO};
use crate::material::{mass, mm_modulus, mm_modulus_derivative, simp_modulus, MaterialCatalog};

/// The constraint folded into the loss as `alpha * (g / g* - 1)^2`.
#[derive(Clone, Debug, PartialEq)]
pub enum Constraint {
    /// Target volume fraction of the domain.
    Volume { fraction: f64 },
    /// Target mass as a fraction of the domain filled with the heaviest
    /// material.
    Mass { fraction: f64, catalog: MaterialCatalog },
}

impl Constraint {
    pub fn fraction(&self) -> f64 {
        match self {
            Constraint::Volume { fraction } | Constraint::Mass { fraction, .. } => *fraction,
        }
    }

    pub fn n_outputs(&self) -> usize {
        match self {
            Constraint::Volume { .. } => 1,
            Constraint::Mass { catalog, .. } => catalog.len(),
        }
    }
}

/// Everything the loss needs besides densities and element compliances.
#[derive(Clone, Debug)]
pub struct LossContext<'a> {
    pub p: f64,
    pub alpha: f64,
    pub j0: f64,
    pub element_volume: f64,
    pub domain_volume: f64,
    pub constraint: &'a Constraint,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LossTerms {
    pub loss: f64,
    pub compliance: f64,
    /// Volume or mass fraction of the domain.
    pub fraction: f64,
    /// `g / g* - 1`.
    pub residual: f64,
}

/// Stiffness per element for the current densities and penalty.
pub fn element_moduli(rho: ArrayView2<'_, f64>, p: f64, constraint: &Constraint) -> Result<Vec<f64>> {
    match constraint {
        Constraint::Volume { .. } => {
            let col: Vec<f64> = rho.column(0).to_vec();
            Ok(simp_modulus(&col, p, 1.0, E_MIN_RATIO))
        }
        Constraint::Mass { catalog, .. } => {
            let flat: Vec<f64> = rho.iter().copied().collect();
            mm_modulus(&flat, p, catalog)
        }
    }
}

/// Normalizing compliance: the solve at a uniform gray field. For a volume
/// constraint the field is `rho = V*`; for a mass constraint every row is
/// `1 / (S + 1)`.
pub fn compute_j0(mesh: &GridMesh, constraint: &Constraint, p0: f64) -> Result<f64> {
    let ne = mesh.n_elements();
    let width = constraint.n_outputs();
    let fill = match constraint {
        Constraint::Volume { fraction } => *fraction,
        Constraint::Mass { .. } => 1.0 / width as f64,
    };
    let rho = Array2::from_elem((ne, width), fill);
    let young = element_moduli(rho.view(), p0, constraint)?;
    let solved = assemble_and_solve(mesh, &young)?;
    let j0 = compliance(rho.view(), &solved.element_compliance, p0, constraint);
    if !(j0 > 0.0) || !j0.is_finite() {
        return Err(invalid(format!(
            "initial compliance is {j0}; the problem needs a nonzero load on a free DOF"
        )));
    }
    Ok(j0)
}

/// `sum_e rho_e^p J_e`, or `sum_e E_e(rho_e) J_e` for several materials.
pub fn compliance(rho: ArrayView2<'_, f64>, element_compliance: &[f64], p: f64, constraint: &Constraint) -> f64 {
    match constraint {
        Constraint::Volume { .. } => rho
            .column(0)
            .iter()
            .zip(element_compliance)
            .map(|(r, j)| r.powf(p) * j)
            .sum(),
        Constraint::Mass { catalog, .. } => rho
            .outer_iter()
            .zip(element_compliance)
            .map(|(row, j)| {
                let e: f64 = row.iter().zip(catalog.youngs()).map(|(r, y)| r.powf(p) * y).sum();
                e * j
            })
            .sum(),
    }
}

/// Volume or mass fraction of the domain.
fn constraint_fraction(rho: ArrayView2<'_, f64>, ctx: &LossContext<'_>) -> f64 {
    match ctx.constraint {
        Constraint::Volume { .. } => rho.column(0).sum() * ctx.element_volume / ctx.domain_volume,
        Constraint::Mass { catalog, .. } => {
            let flat: Vec<f64> = rho.iter().copied().collect();
            mass(&flat, catalog, ctx.element_volume) / (catalog.heaviest_density() * ctx.domain_volume)
        }
    }
}

fn check_shapes(rho: &ArrayView2<'_, f64>, element_compliance: &[f64], ctx: &LossContext<'_>) -> Result<()> {
    if rho.nrows() != element_compliance.len() {
        return Err(invalid(format!(
            "{} density rows but {} element compliances",
            rho.nrows(),
            element_compliance.len()
        )));
    }
    if rho.ncols() != ctx.constraint.n_outputs() {
        return Err(invalid(format!(
            "density has {} columns, constraint expects {}",
            rho.ncols(),
            ctx.constraint.n_outputs()
        )));
    }
    if !(ctx.j0 > 0.0) {
        return Err(invalid(format!("J0 must be positive, got {}", ctx.j0)));
    }
    if ctx.alpha < 0.0 {
        return Err(invalid(format!("penalty must be non-negative, got {}", ctx.alpha)));
    }
    Ok(())
}

/// `J / J0 + alpha (g / g* - 1)^2` with `g` the volume or mass.
pub fn loss(rho: ArrayView2<'_, f64>, element_compliance: &[f64], ctx: &LossContext<'_>) -> Result<LossTerms> {
    check_shapes(&rho, element_compliance, ctx)?;
    let c = compliance(rho, element_compliance, ctx.p, ctx.constraint);
    let fraction = constraint_fraction(rho, ctx);
    let residual = fraction / ctx.constraint.fraction() - 1.0;
    let value = c / ctx.j0 + ctx.alpha * residual * residual;
    if !value.is_finite() {
        return Err(TopoError::Numeric(format!("loss is not finite ({value})")));
    }
    Ok(LossTerms {
        loss: value,
        compliance: c,
        fraction,
        residual,
    })
}

/// Per-element `dL / d rho_e` (one column per output). The compliance part
/// uses the self-adjoint sensitivity `dJ/d rho_e = -(dE_e/d rho_e) J_e`.
pub fn loss_grad_wrt_density(
    rho: ArrayView2<'_, f64>,
    element_compliance: &[f64],
    ctx: &LossContext<'_>,
) -> Result<Array2<f64>> {
    check_shapes(&rho, element_compliance, ctx)?;
    let terms = loss(rho, element_compliance, ctx)?;
    let mut grad = Array2::zeros(rho.raw_dim());
    match ctx.constraint {
        Constraint::Volume { fraction } => {
            let target = fraction * ctx.domain_volume;
            let penalty = 2.0 * ctx.alpha / target * terms.residual * ctx.element_volume;
            for ((g, &r), &j) in grad.column_mut(0).iter_mut().zip(rho.column(0)).zip(element_compliance) {
                *g = -ctx.p * r.powf(ctx.p - 1.0) * j / ctx.j0 + penalty;
            }
        }
        Constraint::Mass { fraction, catalog } => {
            let target = fraction * catalog.heaviest_density() * ctx.domain_volume;
            let scale = 2.0 * ctx.alpha / target * terms.residual * ctx.element_volume;
            let flat: Vec<f64> = rho.iter().copied().collect();
            let de = mm_modulus_derivative(&flat, ctx.p, catalog);
            let width = catalog.len();
            for (e, (mut row, &j)) in grad.outer_iter_mut().zip(element_compliance).enumerate() {
                for (i, g) in row.iter_mut().enumerate() {
                    *g = -de[e * width + i] * j / ctx.j0 + scale * catalog.entries()[i].density;
                }
            }
        }
    }
    Ok(grad)
}
