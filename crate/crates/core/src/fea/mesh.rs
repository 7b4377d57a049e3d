use ndarray::Array2;

use crate::error::{invalid, Result};

/// Which way a passive element is pinned.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Passive {
    Solid,
    Void,
}

/// Regular `nelx x nely` grid of square bilinear quads of edge `h`.
///
/// Elements and nodes are numbered column by column (y runs fastest), origin
/// at the lower-left corner with y pointing up. Element `(i, j)` has index
/// `i * nely + j`, node `(i, j)` has index `i * (nely + 1) + j`, and node `n`
/// owns DOFs `2n` (x) and `2n + 1` (y).
#[derive(Clone, Debug)]
pub struct GridMesh {
    nelx: usize,
    nely: usize,
    h: f64,
    nu: f64,
    fixed: Vec<bool>,
    load: Vec<f64>,
    passive: Vec<Option<Passive>>,
}

pub const DEFAULT_POISSON: f64 = 0.3;

impl GridMesh {
    pub fn new(nelx: usize, nely: usize, h: f64) -> Result<Self> {
        if nelx == 0 || nely == 0 {
            return Err(invalid(format!(
                "grid dimensions must be at least 1x1, got {nelx}x{nely}"
            )));
        }
        if !(h > 0.0) || !h.is_finite() {
            return Err(invalid(format!("element size must be positive, got {h}")));
        }
        let ndof = 2 * (nelx + 1) * (nely + 1);
        Ok(Self {
            nelx,
            nely,
            h,
            nu: DEFAULT_POISSON,
            fixed: vec![false; ndof],
            load: vec![0.0; ndof],
            passive: vec![None; nelx * nely],
        })
    }

    pub fn with_poisson(mut self, nu: f64) -> Result<Self> {
        if !(0.0..0.5).contains(&nu) {
            return Err(invalid(format!("Poisson ratio must lie in [0, 0.5), got {nu}")));
        }
        self.nu = nu;
        Ok(self)
    }

    pub fn nelx(&self) -> usize {
        self.nelx
    }

    pub fn nely(&self) -> usize {
        self.nely
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn poisson(&self) -> f64 {
        self.nu
    }

    pub fn n_elements(&self) -> usize {
        self.nelx * self.nely
    }

    pub fn n_nodes(&self) -> usize {
        (self.nelx + 1) * (self.nely + 1)
    }

    pub fn n_dofs(&self) -> usize {
        2 * self.n_nodes()
    }

    pub fn element_volume(&self) -> f64 {
        self.h * self.h
    }

    pub fn domain_volume(&self) -> f64 {
        self.n_elements() as f64 * self.element_volume()
    }

    #[inline]
    pub fn element_index(&self, i: usize, j: usize) -> usize {
        i * self.nely + j
    }

    /// `(i, j)` grid position of element `e`.
    #[inline]
    pub fn element_ij(&self, e: usize) -> (usize, usize) {
        (e / self.nely, e % self.nely)
    }

    #[inline]
    pub fn node_index(&self, i: usize, j: usize) -> usize {
        i * (self.nely + 1) + j
    }

    pub fn node_position(&self, node: usize) -> (f64, f64) {
        let i = node / (self.nely + 1);
        let j = node % (self.nely + 1);
        (i as f64 * self.h, j as f64 * self.h)
    }

    pub fn element_center(&self, e: usize) -> (f64, f64) {
        let (i, j) = self.element_ij(e);
        ((i as f64 + 0.5) * self.h, (j as f64 + 0.5) * self.h)
    }

    /// `n_elements x 2` matrix of element centers.
    pub fn element_centers(&self) -> Array2<f64> {
        Array2::from_shape_fn((self.n_elements(), 2), |(e, c)| {
            let (x, y) = self.element_center(e);
            if c == 0 {
                x
            } else {
                y
            }
        })
    }

    #[inline]
    pub fn element_dofs(&self, e: usize) -> [usize; 8] {
        let (i, j) = self.element_ij(e);
        let n1 = self.node_index(i, j);
        let n2 = self.node_index(i + 1, j);
        let n3 = n2 + 1;
        let n4 = n1 + 1;
        [
            2 * n1,
            2 * n1 + 1,
            2 * n2,
            2 * n2 + 1,
            2 * n3,
            2 * n3 + 1,
            2 * n4,
            2 * n4 + 1,
        ]
    }

    pub fn fix_dof(&mut self, dof: usize) -> Result<()> {
        let slot = self
            .fixed
            .get_mut(dof)
            .ok_or_else(|| invalid(format!("DOF {dof} out of range")))?;
        *slot = true;
        Ok(())
    }

    pub fn fix_node(&mut self, node: usize, x: bool, y: bool) -> Result<()> {
        if x {
            self.fix_dof(2 * node)?;
        }
        if y {
            self.fix_dof(2 * node + 1)?;
        }
        Ok(())
    }

    pub fn add_nodal_force(&mut self, node: usize, fx: f64, fy: f64) -> Result<()> {
        if node >= self.n_nodes() {
            return Err(invalid(format!("node {node} out of range")));
        }
        self.load[2 * node] += fx;
        self.load[2 * node + 1] += fy;
        Ok(())
    }

    pub fn set_load_vector(&mut self, load: Vec<f64>) -> Result<()> {
        if load.len() != self.n_dofs() {
            return Err(invalid(format!(
                "load vector has {} entries, mesh has {} DOFs",
                load.len(),
                self.n_dofs()
            )));
        }
        self.load = load;
        Ok(())
    }

    pub fn clear_loads(&mut self) {
        self.load.iter_mut().for_each(|f| *f = 0.0);
    }

    pub fn scale_loads(&mut self, factor: f64) {
        self.load.iter_mut().for_each(|f| *f *= factor);
    }

    pub fn load_vector(&self) -> &[f64] {
        &self.load
    }

    pub fn is_fixed(&self, dof: usize) -> bool {
        self.fixed[dof]
    }

    pub fn fixed_dofs(&self) -> Vec<usize> {
        self.fixed
            .iter()
            .enumerate()
            .filter_map(|(d, &f)| f.then_some(d))
            .collect()
    }

    pub fn set_passive(&mut self, e: usize, kind: Passive) -> Result<()> {
        let slot = self
            .passive
            .get_mut(e)
            .ok_or_else(|| invalid(format!("element {e} out of range")))?;
        match *slot {
            Some(existing) if existing != kind => Err(invalid(format!(
                "element {e} is already passive {existing:?}, cannot mark {kind:?}"
            ))),
            _ => {
                *slot = Some(kind);
                Ok(())
            }
        }
    }

    #[inline]
    pub fn passive(&self, e: usize) -> Option<Passive> {
        self.passive[e]
    }

    pub fn passive_solid(&self) -> Vec<usize> {
        self.passive_of(Passive::Solid)
    }

    pub fn passive_void(&self) -> Vec<usize> {
        self.passive_of(Passive::Void)
    }

    fn passive_of(&self, kind: Passive) -> Vec<usize> {
        self.passive
            .iter()
            .enumerate()
            .filter_map(|(e, p)| (*p == Some(kind)).then_some(e))
            .collect()
    }

    pub fn has_passive(&self) -> bool {
        self.passive.iter().any(Option::is_some)
    }

    /// Nodes on the left (`x = 0`) edge, bottom to top.
    pub fn left_edge_nodes(&self) -> Vec<usize> {
        (0..=self.nely).map(|j| self.node_index(0, j)).collect()
    }

    pub fn right_edge_nodes(&self) -> Vec<usize> {
        (0..=self.nely).map(|j| self.node_index(self.nelx, j)).collect()
    }

    pub fn bottom_edge_nodes(&self) -> Vec<usize> {
        (0..=self.nelx).map(|i| self.node_index(i, 0)).collect()
    }

    pub fn top_edge_nodes(&self) -> Vec<usize> {
        (0..=self.nelx).map(|i| self.node_index(i, self.nely)).collect()
    }
}
