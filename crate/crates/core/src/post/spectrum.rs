use std::collections::BTreeMap;

use ndarray::{Array2, ArrayView2};
use rustfft::{num_complex::Complex, FftPlanner};

use crate::error::{invalid, Result};

/// Unitary DFT amplitudes, so the squared amplitudes sum to the squared
/// samples. Frequencies are in half-cycles per `h`, the `f` of
/// `cos(pi f x / h)`: bin `k` of `n` samples at spacing `dx` sits at
/// `2 h k / (n dx)`, negative above `n / 2`.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum1d {
    pub freqs: Vec<f64>,
    pub amplitude: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum2d {
    /// Per column.
    pub fx: Vec<f64>,
    /// Per row.
    pub fy: Vec<f64>,
    pub amplitude: Array2<f64>,
}

fn signed_freqs(n: usize, spacing: f64, h: f64) -> Vec<f64> {
    (0..n)
        .map(|k| {
            let signed = if k <= n / 2 { k as f64 } else { k as f64 - n as f64 };
            2.0 * h * signed / (n as f64 * spacing)
        })
        .collect()
}

fn check_axis(n: usize, spacing: f64, h: f64) -> Result<()> {
    if n < 4 {
        return Err(invalid(format!("a spectrum needs at least 4 samples per axis, got {n}")));
    }
    if !(spacing > 0.0 && h > 0.0) {
        return Err(invalid("sample spacing and length unit must be positive"));
    }
    Ok(())
}

pub fn density_spectrum_1d(samples: &[f64], spacing: f64, h: f64) -> Result<Spectrum1d> {
    let n = samples.len();
    check_axis(n, spacing, h)?;
    let mut buf: Vec<Complex<f64>> = samples.iter().map(|&v| Complex::new(v, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let scale = 1.0 / (n as f64).sqrt();
    Ok(Spectrum1d {
        freqs: signed_freqs(n, spacing, h),
        amplitude: buf.iter().map(|c| c.norm() * scale).collect(),
    })
}

impl Spectrum1d {
    pub fn energy(&self) -> f64 {
        self.amplitude.iter().map(|a| a * a).sum()
    }

    /// Non-negative half: `(f, amplitude)` for bins `0..=n/2`.
    pub fn one_sided(&self) -> Vec<(f64, f64)> {
        let n = self.amplitude.len();
        (0..=n / 2).map(|k| (self.freqs[k], self.amplitude[k])).collect()
    }

    /// Frequencies of the largest local maxima among the positive non-DC
    /// bins, strongest first. The DC bin takes no part in the comparison.
    pub fn dominant_peaks(&self, count: usize) -> Vec<f64> {
        let half = self.one_sided();
        let mut peaks: Vec<(f64, f64)> = (1..half.len())
            .filter(|&k| {
                let a = half[k].1;
                let left = if k == 1 { f64::NEG_INFINITY } else { half[k - 1].1 };
                let right = half.get(k + 1).map_or(f64::NEG_INFINITY, |p| p.1);
                a > left && a >= right
            })
            .map(|k| half[k])
            .collect();
        peaks.sort_by(|a, b| b.1.total_cmp(&a.1));
        peaks.into_iter().take(count).map(|(f, _)| f).collect()
    }
}

/// Spectrum of a field sampled on rows (y) by columns (x), equal spacing.
pub fn density_spectrum_2d(field: ArrayView2<'_, f64>, spacing: f64, h: f64) -> Result<Spectrum2d> {
    let (ny, nx) = field.dim();
    check_axis(nx, spacing, h)?;
    check_axis(ny, spacing, h)?;
    let mut planner = FftPlanner::new();
    let fft_x = planner.plan_fft_forward(nx);
    let fft_y = planner.plan_fft_forward(ny);

    let mut data: Vec<Complex<f64>> = field.iter().map(|&v| Complex::new(v, 0.0)).collect();
    for row in data.chunks_mut(nx) {
        fft_x.process(row);
    }
    let mut column = vec![Complex::new(0.0, 0.0); ny];
    for c in 0..nx {
        for r in 0..ny {
            column[r] = data[r * nx + c];
        }
        fft_y.process(&mut column);
        for r in 0..ny {
            data[r * nx + c] = column[r];
        }
    }
    let scale = 1.0 / ((nx * ny) as f64).sqrt();
    let amplitude = Array2::from_shape_vec((ny, nx), data.iter().map(|c| c.norm() * scale).collect())
        .expect("shape matches buffer");
    Ok(Spectrum2d {
        fx: signed_freqs(nx, spacing, h),
        fy: signed_freqs(ny, spacing, h),
        amplitude,
    })
}

impl Spectrum2d {
    pub fn energy(&self) -> f64 {
        self.amplitude.iter().map(|a| a * a).sum()
    }

    /// Amplitude per annulus of radial frequency `|f|`, bins of width
    /// `bin_width` centred on multiples of it: `sqrt` of the summed energy.
    pub fn radial_profile(&self, bin_width: f64) -> Vec<(f64, f64)> {
        let mut bins: BTreeMap<usize, f64> = BTreeMap::new();
        for (r, fy) in self.fy.iter().enumerate() {
            for (c, fx) in self.fx.iter().enumerate() {
                let k = ((fx * fx + fy * fy).sqrt() / bin_width).round() as usize;
                let a = self.amplitude[[r, c]];
                *bins.entry(k).or_insert(0.0) += a * a;
            }
        }
        bins.into_iter()
            .map(|(k, e)| (k as f64 * bin_width, e.sqrt()))
            .collect()
    }

    /// Frequency resolution along x.
    pub fn resolution(&self) -> f64 {
        self.fx[1].abs()
    }
}
