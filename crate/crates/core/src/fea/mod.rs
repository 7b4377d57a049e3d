//! Regular-grid bilinear quad finite elements.

mod element;
mod mesh;
mod solve;

pub use element::ElementStiffness;
pub use mesh::{GridMesh, Passive, DEFAULT_POISSON};
pub use solve::{assemble_and_solve, total_compliance, SolveResult};

/// Modulus floor relative to the solid modulus.
pub const E_MIN_RATIO: f64 = 1e-9;

/// `build_grid`: an unconstrained, unloaded grid.
pub fn build_grid(nelx: usize, nely: usize, h: f64) -> crate::Result<GridMesh> {
    GridMesh::new(nelx, nely, h)
}
