use ndarray::{s, Array2, Array3};

use super::FineField;
use crate::error::{invalid, Result};
use crate::fea::GridMesh;
use crate::net::{FieldInput, Network};
use crate::opt::apply_passive;

/// Rows per eval-mode forward call.
pub const EXTRACT_CHUNK: usize = 8192;

/// Evaluates the trained network at the centres of an `s x s` sub-grid of
/// every element. Eval mode only, so the weights and batch-norm statistics are
/// untouched and the result does not depend on how the points are batched.
pub fn extract_highres(net: &Network, input: &FieldInput, mesh: &GridMesh, s: usize) -> Result<FineField> {
    if s == 0 {
        return Err(invalid("samples per element must be at least 1"));
    }
    let (nx, ny) = (mesh.nelx() * s, mesh.nely() * s);
    let spacing = mesh.h() / s as f64;
    let n_out = net.arch().n_outputs;

    let mut passive_rows = Array2::from_elem((mesh.n_elements(), n_out), f64::NAN);
    apply_passive(mesh, &mut passive_rows);

    let mut values = Array3::zeros((ny, nx, n_out));
    let total = nx * ny;
    let mut start = 0;
    while start < total {
        let end = (start + EXTRACT_CHUNK).min(total);
        let points = Array2::from_shape_fn((end - start, 2), |(i, k)| {
            let idx = start + i;
            let (r, c) = (idx / nx, idx % nx);
            if k == 0 {
                (c as f64 + 0.5) * spacing
            } else {
                (ny as f64 - r as f64 - 0.5) * spacing
            }
        });
        let feats = input.features(points.view())?;
        let rho = net.forward_eval(feats.view())?;
        for (i, row) in rho.outer_iter().enumerate() {
            let idx = start + i;
            let (r, c) = (idx / nx, idx % nx);
            let e = mesh.element_index(c / s, (ny - 1 - r) / s);
            let src = if mesh.passive(e).is_some() {
                passive_rows.row(e)
            } else {
                row
            };
            values.slice_mut(s![r, c, ..]).assign(&src);
        }
        start = end;
    }
    FineField::new(values, s, spacing)
}
