//! Fine-grid extraction, spectra, member thickness and file export.

mod export;
mod extract;
mod feature;
mod spectrum;

use ndarray::{Array2, Array3, Axis};

use crate::error::{invalid, Result};
use crate::fea::GridMesh;

pub use export::{
    density_grid_text, export_outputs, feature_table, parse_density_grid, spectrum_table, write_png,
    ExportedFiles, DENSITY_FILE, FEATURE_FILE, HISTORY_FILE, IMAGE_FILE, MATERIAL_COLORS, SPECTRUM_FILE,
};
pub use extract::{extract_highres, EXTRACT_CHUNK};
pub use feature::{distance_transform, feature_size, FeatureSizeReport, FeatureStatus, DEFAULT_THRESHOLD};
pub use spectrum::{density_spectrum_1d, density_spectrum_2d, Spectrum1d, Spectrum2d};

/// Densities on a regular grid of `s x s` samples per element.
///
/// `values[[r, c, k]]` is channel `k` at pixel row `r` (row 0 at the top of
/// the domain) and column `c`. Pixel `(r, c)` is centred at
/// `((c + 0.5) * spacing, (height - r - 0.5) * spacing)`.
#[derive(Clone, Debug, PartialEq)]
pub struct FineField {
    pub values: Array3<f64>,
    pub s: usize,
    pub spacing: f64,
}

impl FineField {
    pub fn new(values: Array3<f64>, s: usize, spacing: f64) -> Result<Self> {
        if s == 0 || !(spacing > 0.0) {
            return Err(invalid("samples per element and spacing must be positive"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(invalid("fine field contains non-finite values"));
        }
        Ok(Self { values, s, spacing })
    }

    /// Piecewise-constant upsampling of per-element rows (`n_elements x
    /// channels`, element numbering of `mesh`).
    pub fn from_elements(mesh: &GridMesh, rows: &Array2<f64>, s: usize) -> Result<Self> {
        if rows.nrows() != mesh.n_elements() {
            return Err(invalid(format!(
                "{} element rows for a mesh of {} elements",
                rows.nrows(),
                mesh.n_elements()
            )));
        }
        if s == 0 {
            return Err(invalid("samples per element must be at least 1"));
        }
        let (nx, ny) = (mesh.nelx() * s, mesh.nely() * s);
        let mut values = Array3::zeros((ny, nx, rows.ncols()));
        for r in 0..ny {
            let j = (ny - 1 - r) / s;
            for c in 0..nx {
                let e = mesh.element_index(c / s, j);
                values.slice_mut(ndarray::s![r, c, ..]).assign(&rows.row(e));
            }
        }
        Self::new(values, s, mesh.h() / s as f64)
    }

    pub fn width(&self) -> usize {
        self.values.len_of(Axis(1))
    }

    pub fn height(&self) -> usize {
        self.values.len_of(Axis(0))
    }

    pub fn channels(&self) -> usize {
        self.values.len_of(Axis(2))
    }

    /// Solid indicator per pixel: the density for one channel, one minus the
    /// void channel otherwise.
    pub fn solid(&self) -> Array2<f64> {
        if self.channels() == 1 {
            self.values.index_axis(Axis(2), 0).to_owned()
        } else {
            self.values.index_axis(Axis(2), 0).mapv(|v| 1.0 - v)
        }
    }

    /// Index of the largest channel per pixel.
    pub fn argmax(&self) -> Array2<usize> {
        Array2::from_shape_fn((self.height(), self.width()), |(r, c)| {
            let px = self.values.slice(ndarray::s![r, c, ..]);
            let mut best = 0;
            for k in 1..px.len() {
                if px[k] > px[best] {
                    best = k;
                }
            }
            best
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn upsampling_places_elements() {
        let mesh = GridMesh::new(3, 2, 2.0).unwrap();
        let rows = Array2::from_shape_fn((6, 1), |(e, _)| e as f64);
        let f = FineField::from_elements(&mesh, &rows, 2).unwrap();
        assert_eq!((f.width(), f.height(), f.channels()), (6, 4, 1));
        assert_eq!(f.spacing, 1.0);
        // bottom-left pixel belongs to element (0, 0), top-right to (2, 1)
        assert_eq!(f.values[[3, 0, 0]], mesh.element_index(0, 0) as f64);
        assert_eq!(f.values[[0, 5, 0]], mesh.element_index(2, 1) as f64);
        assert_eq!(f.values[[1, 2, 0]], mesh.element_index(1, 1) as f64);
    }

    #[test]
    fn solid_and_argmax_for_materials() {
        let v = Array3::from_shape_vec((1, 2, 3), vec![0.7, 0.2, 0.1, 0.1, 0.3, 0.6]).unwrap();
        let f = FineField::new(v, 1, 1.0).unwrap();
        let solid = f.solid();
        assert!((solid[[0, 0]] - 0.3).abs() < 1e-15);
        assert!((solid[[0, 1]] - 0.9).abs() < 1e-15);
        assert_eq!(f.argmax()[[0, 0]], 0);
        assert_eq!(f.argmax()[[0, 1]], 2);
    }
}
