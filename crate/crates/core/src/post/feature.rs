use ndarray::Array2;

use super::FineField;
use crate::error::{invalid, Result};

pub const DEFAULT_THRESHOLD: f64 = 0.5;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FeatureStatus {
    Measured,
    /// No pixel reached the threshold; the statistics are zero.
    Empty,
}

impl FeatureStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            FeatureStatus::Measured => "measured",
            FeatureStatus::Empty => "empty",
        }
    }
}

/// Member thickness read off the medial axis of the thresholded field, in
/// mesh length units.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureSizeReport {
    pub status: FeatureStatus,
    pub threshold: f64,
    pub min_thickness: f64,
    pub median_thickness: f64,
    pub max_thickness: f64,
    pub skeleton_pixels: usize,
    /// Thickness at skeleton pixels, zero elsewhere.
    pub thickness_map: Array2<f64>,
}

const FAR: f64 = 1e20;

/// Squared distance transform of one line (lower envelope of parabolas).
fn edt_1d(f: &[f64], out: &mut [f64], v: &mut [usize], z: &mut [f64]) {
    let n = f.len();
    let mut k = 0;
    v[0] = 0;
    z[0] = f64::NEG_INFINITY;
    z[1] = f64::INFINITY;
    for q in 1..n {
        let s = loop {
            let p = v[k];
            let s = ((f[q] + (q * q) as f64) - (f[p] + (p * p) as f64)) / (2.0 * (q as f64 - p as f64));
            // z[0] is -inf, so this stops at k = 0
            if s <= z[k] {
                k -= 1;
            } else {
                break s;
            }
        };
        k += 1;
        v[k] = q;
        z[k] = s;
        z[k + 1] = f64::INFINITY;
    }
    k = 0;
    for (q, o) in out.iter_mut().enumerate() {
        while z[k + 1] < q as f64 {
            k += 1;
        }
        let d = q as f64 - v[k] as f64;
        *o = d * d + f[v[k]];
    }
}

/// Euclidean distance (in pixels) from each pixel centre to the nearest void
/// pixel centre. Everything outside the image counts as void, so a solid
/// pixel on the border is at distance 1. Void pixels get 0.
pub fn distance_transform(solid: &Array2<bool>) -> Array2<f64> {
    let (ny, nx) = solid.dim();
    // pad with one void pixel on every side
    let (py, px) = (ny + 2, nx + 2);
    let mut grid = vec![0.0; py * px];
    for r in 0..ny {
        for c in 0..nx {
            if solid[[r, c]] {
                grid[(r + 1) * px + c + 1] = FAR;
            }
        }
    }
    let longest = py.max(px);
    let mut f = vec![0.0; longest];
    let mut out = vec![0.0; longest];
    let mut v = vec![0usize; longest];
    let mut z = vec![0.0; longest + 1];
    for c in 0..px {
        for r in 0..py {
            f[r] = grid[r * px + c];
        }
        edt_1d(&f[..py], &mut out[..py], &mut v, &mut z);
        for r in 0..py {
            grid[r * px + c] = out[r];
        }
    }
    for r in 0..py {
        f[..px].copy_from_slice(&grid[r * px..(r + 1) * px]);
        edt_1d(&f[..px], &mut out[..px], &mut v, &mut z);
        grid[r * px..(r + 1) * px].copy_from_slice(&out[..px]);
    }
    Array2::from_shape_fn((ny, nx), |(r, c)| grid[(r + 1) * px + c + 1].sqrt())
}

/// Thresholds the solid indicator, takes the distance transform, keeps the
/// pixels whose distance is not exceeded by any 8-neighbour (the ridge of the
/// transform) and reports `2 * distance * spacing` over them.
pub fn feature_size(field: &FineField, threshold: f64) -> Result<FeatureSizeReport> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(invalid(format!("threshold must lie in (0, 1), got {threshold}")));
    }
    let solid = field.solid().mapv(|v| v >= threshold);
    let (ny, nx) = solid.dim();
    let dt = distance_transform(&solid);
    let mut map = Array2::zeros((ny, nx));
    let mut values = Vec::new();
    for r in 0..ny {
        for c in 0..nx {
            let d = dt[[r, c]];
            if d == 0.0 {
                continue;
            }
            let mut ridge = true;
            'nb: for dr in -1i64..=1 {
                for dc in -1i64..=1 {
                    let (rr, cc) = (r as i64 + dr, c as i64 + dc);
                    if (dr, dc) == (0, 0) || rr < 0 || cc < 0 || rr >= ny as i64 || cc >= nx as i64 {
                        continue;
                    }
                    if dt[[rr as usize, cc as usize]] > d {
                        ridge = false;
                        break 'nb;
                    }
                }
            }
            if ridge {
                let t = 2.0 * d * field.spacing;
                map[[r, c]] = t;
                values.push(t);
            }
        }
    }
    if values.is_empty() {
        return Ok(FeatureSizeReport {
            status: FeatureStatus::Empty,
            threshold,
            min_thickness: 0.0,
            median_thickness: 0.0,
            max_thickness: 0.0,
            skeleton_pixels: 0,
            thickness_map: map,
        });
    }
    values.sort_by(f64::total_cmp);
    let n = values.len();
    let median = if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    };
    Ok(FeatureSizeReport {
        status: FeatureStatus::Measured,
        threshold,
        min_thickness: values[0],
        median_thickness: median,
        max_thickness: values[n - 1],
        skeleton_pixels: n,
        thickness_map: map,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array3;

    fn field_from_mask(mask: &Array2<bool>) -> FineField {
        let (ny, nx) = mask.dim();
        let v = Array3::from_shape_fn((ny, nx, 1), |(r, c, _)| if mask[[r, c]] { 1.0 } else { 0.0 });
        FineField::new(v, 1, 1.0).unwrap()
    }

    #[test]
    fn horizontal_strip_width() {
        let mask = Array2::from_shape_fn((30, 60), |(r, _)| (10..18).contains(&r));
        let rep = feature_size(&field_from_mask(&mask), 0.5).unwrap();
        assert_eq!(rep.status, FeatureStatus::Measured);
        assert!((rep.median_thickness - 8.0).abs() <= 1.0, "{}", rep.median_thickness);
    }

    #[test]
    fn solid_square_thickness_is_side() {
        let n = 21;
        let mask = Array2::from_elem((n, n), true);
        let rep = feature_size(&field_from_mask(&mask), 0.5).unwrap();
        assert!((rep.median_thickness - n as f64).abs() <= 1.0, "{}", rep.median_thickness);
    }

    #[test]
    fn empty_field_reports_empty() {
        let mask = Array2::from_elem((10, 10), false);
        let rep = feature_size(&field_from_mask(&mask), 0.5).unwrap();
        assert_eq!(rep.status, FeatureStatus::Empty);
        assert_eq!(rep.skeleton_pixels, 0);
    }

    #[test]
    fn threshold_bounds() {
        let mask = Array2::from_elem((4, 4), true);
        assert!(feature_size(&field_from_mask(&mask), 0.0).is_err());
        assert!(feature_size(&field_from_mask(&mask), 1.0).is_err());
    }

    #[test]
    fn spacing_scales_thickness() {
        let mask = Array2::from_shape_fn((20, 40), |(r, _)| (5..11).contains(&r));
        let v = Array3::from_shape_fn((20, 40, 1), |(r, c, _)| if mask[[r, c]] { 1.0 } else { 0.0 });
        let rep = feature_size(&FineField::new(v, 15, 1.0 / 15.0).unwrap(), 0.5).unwrap();
        let unit = feature_size(&field_from_mask(&mask), 0.5).unwrap();
        assert!((rep.median_thickness * 15.0 - unit.median_thickness).abs() < 1e-12);
    }
}
