use super::element::ElementStiffness;
use super::mesh::GridMesh;
use crate::error::{invalid, Result, TopoError};

/// Displacements and per-element compliances for one density state.
#[derive(Clone, Debug, PartialEq)]
pub struct SolveResult {
    pub u: Vec<f64>,
    /// `J_e = u_e^T k0 u_e` with the unit-modulus element matrix.
    pub element_compliance: Vec<f64>,
    /// `f^T u`, equal to `u^T K u` at equilibrium.
    pub total_stiffness_energy: f64,
}

/// Symmetric positive definite band matrix, lower triangle stored row-wise.
///
/// Row `i` holds columns `i - bw ..= i` in `data[i * (bw + 1)..]`, the
/// diagonal last.
struct BandMatrix {
    n: usize,
    bw: usize,
    data: Vec<f64>,
}

impl BandMatrix {
    fn zeros(n: usize, bw: usize) -> Self {
        Self {
            n,
            bw,
            data: vec![0.0; n * (bw + 1)],
        }
    }

    #[inline]
    fn slot(&self, i: usize, j: usize) -> usize {
        debug_assert!(j <= i && i - j <= self.bw);
        i * (self.bw + 1) + self.bw - (i - j)
    }

    #[inline]
    fn add(&mut self, i: usize, j: usize, v: f64) {
        let s = self.slot(i, j);
        self.data[s] += v;
    }

    /// In-place Cholesky `A = L L^T`. Fails on a non-positive or vanishing
    /// pivot, reporting the reduced row where it happened.
    fn factor(&mut self) -> std::result::Result<(), usize> {
        let bw = self.bw;
        let w = bw + 1;
        let max_diag = (0..self.n)
            .map(|i| self.data[i * w + bw])
            .fold(0.0_f64, f64::max);
        let tol = max_diag * 1e-14;
        for i in 0..self.n {
            let row_start = i.saturating_sub(bw);
            for j in row_start..=i {
                let k_start = row_start.max(j.saturating_sub(bw));
                let mut s = self.data[i * w + bw - (i - j)];
                let ri = i * w + bw - i;
                let rj = j * w + bw - j;
                for k in k_start..j {
                    s -= self.data[ri + k] * self.data[rj + k];
                }
                if i == j {
                    if !(s > tol) {
                        return Err(i);
                    }
                    self.data[i * w + bw] = s.sqrt();
                } else {
                    self.data[i * w + bw - (i - j)] = s / self.data[j * w + bw];
                }
            }
        }
        Ok(())
    }

    fn solve_in_place(&self, b: &mut [f64]) {
        let bw = self.bw;
        let w = bw + 1;
        for i in 0..self.n {
            let mut s = b[i];
            let ri = i * w + bw - i;
            for k in i.saturating_sub(bw)..i {
                s -= self.data[ri + k] * b[k];
            }
            b[i] = s / self.data[i * w + bw];
        }
        for i in (0..self.n).rev() {
            let s = b[i] / self.data[i * w + bw];
            b[i] = s;
            for k in i.saturating_sub(bw)..i {
                b[k] -= self.data[i * w + bw - (i - k)] * s;
            }
        }
    }
}

/// Assembles `K = sum_e E_e k0` over the free DOFs and solves `K u = f` with a
/// banded Cholesky factorization.
pub fn assemble_and_solve(mesh: &GridMesh, young_per_element: &[f64]) -> Result<SolveResult> {
    let ne = mesh.n_elements();
    if young_per_element.len() != ne {
        return Err(invalid(format!(
            "expected {ne} element moduli, got {}",
            young_per_element.len()
        )));
    }
    if let Some((e, &y)) = young_per_element
        .iter()
        .enumerate()
        .find(|(_, y)| !(**y > 0.0) || !y.is_finite())
    {
        return Err(invalid(format!(
            "element {e} has non-positive or non-finite modulus {y}"
        )));
    }
    let k0 = ElementStiffness::new(1.0, mesh.poisson(), mesh.h())?;
    let ndof = mesh.n_dofs();
    let load = mesh.load_vector();

    let mut reduced = vec![usize::MAX; ndof];
    let mut free = Vec::with_capacity(ndof);
    for (d, slot) in reduced.iter_mut().enumerate() {
        if !mesh.is_fixed(d) {
            *slot = free.len();
            free.push(d);
        }
    }

    let mut u = vec![0.0; ndof];
    if free.is_empty() || free.iter().all(|&d| load[d] == 0.0) {
        return Ok(SolveResult {
            u,
            element_compliance: vec![0.0; ne],
            total_stiffness_energy: 0.0,
        });
    }

    let mut bw = 0;
    for e in 0..ne {
        let r: Vec<usize> = mesh
            .element_dofs(e)
            .iter()
            .map(|&d| reduced[d])
            .filter(|&r| r != usize::MAX)
            .collect();
        if let (Some(lo), Some(hi)) = (r.iter().min(), r.iter().max()) {
            bw = bw.max(hi - lo);
        }
    }

    let mut k = BandMatrix::zeros(free.len(), bw);
    for (e, &young) in young_per_element.iter().enumerate() {
        let dofs = mesh.element_dofs(e);
        for a in 0..8 {
            let ra = reduced[dofs[a]];
            if ra == usize::MAX {
                continue;
            }
            for b in 0..8 {
                let rb = reduced[dofs[b]];
                if rb == usize::MAX || rb > ra {
                    continue;
                }
                k.add(ra, rb, young * k0.k[a][b]);
            }
        }
    }

    k.factor().map_err(|row| {
        let dof = free[row];
        TopoError::SolverFailure(format!(
            "reduced stiffness matrix is singular at DOF {dof} (node {}, {} direction); \
             the supports do not remove all rigid-body modes",
            dof / 2,
            if dof % 2 == 0 { "x" } else { "y" }
        ))
    })?;

    let mut rhs: Vec<f64> = free.iter().map(|&d| load[d]).collect();
    k.solve_in_place(&mut rhs);
    for (&d, &v) in free.iter().zip(rhs.iter()) {
        u[d] = v;
    }

    let element_compliance = (0..ne)
        .map(|e| {
            let dofs = mesh.element_dofs(e);
            let mut ue = [0.0; 8];
            for (slot, &d) in ue.iter_mut().zip(dofs.iter()) {
                *slot = u[d];
            }
            k0.energy(&ue).max(0.0)
        })
        .collect();
    let total_stiffness_energy = load.iter().zip(u.iter()).map(|(f, x)| f * x).sum();

    Ok(SolveResult {
        u,
        element_compliance,
        total_stiffness_energy,
    })
}

/// `sum_e rho_e^p J_e`.
pub fn total_compliance(rho: &[f64], p: f64, element_compliance: &[f64]) -> Result<f64> {
    if rho.len() != element_compliance.len() {
        return Err(invalid(format!(
            "density has {} entries but {} element compliances were given",
            rho.len(),
            element_compliance.len()
        )));
    }
    Ok(rho
        .iter()
        .zip(element_compliance)
        .map(|(r, j)| r.powf(p) * j)
        .sum())
}
