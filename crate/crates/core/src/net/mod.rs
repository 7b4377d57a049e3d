//! The coordinate-to-density network and its fixed Fourier input layer.

mod checkpoint;
mod frequency;
mod network;

use ndarray::Array2;

pub use checkpoint::{load_checkpoint, read_checkpoint, save_checkpoint, write_checkpoint};
pub use frequency::{fourier_project, sample_frequencies, FrequencyBank, FrequencySampling};
pub use network::{
    param_count, BatchNormStats, Dense, Mode, NetArch, Network, Params, BATCH_NORM_EPS,
    BATCH_NORM_MOMENTUM, DEFAULT_LEAKY_SLOPE,
};

/// Densities at a set of sample points, one row per point. A single column
/// for one material, `[void, m_1, ..., m_S]` columns otherwise.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityField {
    pub values: Array2<f64>,
    pub points: Array2<f64>,
}

impl DensityField {
    pub fn n_points(&self) -> usize {
        self.values.nrows()
    }

    pub fn n_outputs(&self) -> usize {
        self.values.ncols()
    }

    /// Solid indicator per point: the density itself for one material,
    /// `1 - rho_void` otherwise.
    pub fn solid(&self) -> Vec<f64> {
        solid_indicator(&self.values)
    }
}

pub(crate) fn solid_indicator(values: &Array2<f64>) -> Vec<f64> {
    if values.ncols() == 1 {
        values.column(0).to_vec()
    } else {
        values.column(0).iter().map(|v| 1.0 - v).collect()
    }
}

/// Axis along which the density is forced constant.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Extrude {
    #[default]
    None,
    X,
    Y,
}

impl Extrude {
    pub fn as_str(self) -> &'static str {
        match self {
            Extrude::None => "none",
            Extrude::X => "x",
            Extrude::Y => "y",
        }
    }
}

/// Maps sample points to network inputs: optional extrusion (the extruded
/// coordinate is zeroed) followed by the Fourier projection, or the raw
/// coordinates when there is no projection.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldInput {
    pub projection: Option<FrequencyBank>,
    pub extrude: Extrude,
}

impl FieldInput {
    pub fn fourier(bank: FrequencyBank) -> Self {
        Self {
            projection: Some(bank),
            extrude: Extrude::None,
        }
    }

    pub fn coordinates() -> Self {
        Self {
            projection: None,
            extrude: Extrude::None,
        }
    }

    pub fn with_extrude(mut self, extrude: Extrude) -> Self {
        self.extrude = extrude;
        self
    }

    /// Network input width for `d`-dimensional points.
    pub fn width(&self, d: usize) -> usize {
        self.projection.as_ref().map_or(d, |b| 2 * b.n_freqs())
    }

    pub fn features(&self, points: ndarray::ArrayView2<'_, f64>) -> crate::Result<Array2<f64>> {
        let mut pts = points.to_owned();
        let axis = match self.extrude {
            Extrude::None => None,
            Extrude::X => Some(0),
            Extrude::Y => Some(1),
        };
        if let Some(a) = axis {
            if a < pts.ncols() {
                pts.column_mut(a).fill(0.0);
            }
        }
        match &self.projection {
            Some(bank) => fourier_project(pts.view(), bank),
            None => Ok(pts),
        }
    }
}
