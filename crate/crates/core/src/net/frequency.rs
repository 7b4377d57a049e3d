use std::f64::consts::PI;

use ndarray::{Array2, ArrayView2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum FrequencySampling {
    /// Independent uniform draws per component, random signs.
    #[default]
    Random,
    /// Evenly spaced magnitudes with a fixed sign pattern; ignores the seed.
    Grid,
}

impl FrequencySampling {
    pub fn as_str(self) -> &'static str {
        match self {
            FrequencySampling::Random => "random",
            FrequencySampling::Grid => "grid",
        }
    }
}

/// Fixed `d x n_f` frequency matrix of the projection layer.
///
/// Column `i` is the wave vector `f_i`; the projected features at `x` are
/// `cos(pi / h * f_i . x)` and `sin(pi / h * f_i . x)`. A component `f` gives
/// a half-period of `h / f`, so drawing `|f|` from `[h / l_max, h / l_min]`
/// keeps every wave between the two length scales.
#[derive(Clone, Debug, PartialEq)]
pub struct FrequencyBank {
    freqs: Array2<f64>,
    l_min: f64,
    l_max: f64,
    h: f64,
    seed: u64,
    sampling: FrequencySampling,
}

impl FrequencyBank {
    /// Draws each of the `d * n_f` components uniformly from
    /// `[h / l_max, h / l_min]` and flips its sign with probability 1/2.
    pub fn sample(l_min: f64, l_max: f64, h: f64, n_f: usize, d: usize, seed: u64) -> Result<Self> {
        Self::build(l_min, l_max, h, n_f, d, seed, FrequencySampling::Random)
    }

    pub fn build(
        l_min: f64,
        l_max: f64,
        h: f64,
        n_f: usize,
        d: usize,
        seed: u64,
        sampling: FrequencySampling,
    ) -> Result<Self> {
        if !(l_min > 0.0) || !l_min.is_finite() {
            return Err(invalid(format!("l_min must be positive, got {l_min}")));
        }
        if l_min > l_max || !l_max.is_finite() {
            return Err(invalid(format!(
                "l_min ({l_min}) must not exceed l_max ({l_max})"
            )));
        }
        if !(h > 0.0) {
            return Err(invalid(format!("element size must be positive, got {h}")));
        }
        if n_f == 0 {
            return Err(invalid("at least one frequency is required"));
        }
        if !(1..=2).contains(&d) {
            return Err(invalid(format!("dimension must be 1 or 2, got {d}")));
        }
        let lo = h / l_max;
        let hi = h / l_min;
        let freqs = match sampling {
            FrequencySampling::Random => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                Array2::from_shape_simple_fn((d, n_f), || {
                    let magnitude = if hi > lo { rng.gen_range(lo..=hi) } else { lo };
                    if rng.gen_bool(0.5) {
                        -magnitude
                    } else {
                        magnitude
                    }
                })
            }
            FrequencySampling::Grid => grid_frequencies(lo, hi, n_f, d),
        };
        Ok(Self {
            freqs,
            l_min,
            l_max,
            h,
            seed,
            sampling,
        })
    }

    /// Wraps an explicit frequency matrix. `l_min`/`l_max` are recovered from
    /// the extreme component magnitudes.
    pub fn from_matrix(freqs: Array2<f64>, h: f64) -> Result<Self> {
        let (d, n_f) = freqs.dim();
        if !(1..=2).contains(&d) || n_f == 0 {
            return Err(invalid(format!("frequency matrix must be d x n_f with d in 1..=2, got {d}x{n_f}")));
        }
        if !(h > 0.0) {
            return Err(invalid(format!("element size must be positive, got {h}")));
        }
        if freqs.iter().any(|f| !f.is_finite()) {
            return Err(invalid("frequency matrix has non-finite entries"));
        }
        let max = freqs.iter().fold(0.0_f64, |m, f| m.max(f.abs()));
        let min = freqs.iter().fold(f64::INFINITY, |m, f| m.min(f.abs()));
        let l_min = if max > 0.0 { h / max } else { f64::INFINITY };
        let l_max = if min > 0.0 { h / min } else { f64::INFINITY };
        Ok(Self {
            freqs,
            l_min,
            l_max,
            h,
            seed: 0,
            sampling: FrequencySampling::Random,
        })
    }

    pub(crate) fn from_parts(
        freqs: Array2<f64>,
        l_min: f64,
        l_max: f64,
        h: f64,
        seed: u64,
        sampling: FrequencySampling,
    ) -> Self {
        Self {
            freqs,
            l_min,
            l_max,
            h,
            seed,
            sampling,
        }
    }

    pub fn freqs(&self) -> &Array2<f64> {
        &self.freqs
    }

    pub fn dim(&self) -> usize {
        self.freqs.nrows()
    }

    pub fn n_freqs(&self) -> usize {
        self.freqs.ncols()
    }

    pub fn l_min(&self) -> f64 {
        self.l_min
    }

    pub fn l_max(&self) -> f64 {
        self.l_max
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn sampling(&self) -> FrequencySampling {
        self.sampling
    }

    /// `n_points x 2 n_f` matrix: cosines in the first `n_f` columns, sines
    /// in the rest.
    pub fn project(&self, points: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        fourier_project(points, self)
    }
}

fn grid_frequencies(lo: f64, hi: f64, n_f: usize, d: usize) -> Array2<f64> {
    // Golden-ratio stride decorrelates the second component from the first.
    const STRIDE: f64 = 0.618_033_988_749_894_9;
    let level = |t: f64| lo + (hi - lo) * t;
    Array2::from_shape_fn((d, n_f), |(c, i)| {
        let t = if c == 0 {
            (i as f64 + 0.5) / n_f as f64
        } else {
            ((i as f64 + 0.5) * STRIDE).fract()
        };
        let sign = if (i >> c) & 1 == 1 { -1.0 } else { 1.0 };
        sign * level(t)
    })
}

pub fn sample_frequencies(
    l_min: f64,
    l_max: f64,
    h: f64,
    n_f: usize,
    d: usize,
    seed: u64,
) -> Result<FrequencyBank> {
    FrequencyBank::sample(l_min, l_max, h, n_f, d, seed)
}

pub fn fourier_project(points: ArrayView2<'_, f64>, bank: &FrequencyBank) -> Result<Array2<f64>> {
    let d = bank.dim();
    if points.ncols() != d {
        return Err(invalid(format!(
            "points have {} coordinates, frequency bank is {d}-dimensional",
            points.ncols()
        )));
    }
    if points.iter().any(|x| !x.is_finite()) {
        return Err(invalid("points contain non-finite coordinates"));
    }
    let n_f = bank.n_freqs();
    let scale = PI / bank.h;
    let phase = points.dot(&bank.freqs);
    let mut out = Array2::zeros((points.nrows(), 2 * n_f));
    for (mut row, ph) in out.outer_iter_mut().zip(phase.outer_iter()) {
        for (i, &a) in ph.iter().enumerate() {
            let (s, c) = (scale * a).sin_cos();
            row[i] = c;
            row[n_f + i] = s;
        }
    }
    Ok(out)
}
