use crate::error::{invalid, Result};

/// 8x8 stiffness of a bilinear plane-stress quad, unit thickness.
///
/// Node order is counter-clockwise from the lower-left corner with the y axis
/// pointing up; each node contributes `(u_x, u_y)`. For plane stress with unit
/// thickness the matrix does not depend on the element edge length.
#[derive(Clone, Debug, PartialEq)]
pub struct ElementStiffness {
    pub k: [[f64; 8]; 8],
}

impl ElementStiffness {
    pub fn new(young: f64, nu: f64, h: f64) -> Result<Self> {
        if !(young > 0.0) || !young.is_finite() {
            return Err(invalid(format!("Young's modulus must be positive, got {young}")));
        }
        if !(0.0..0.5).contains(&nu) {
            return Err(invalid(format!("Poisson ratio must lie in [0, 0.5), got {nu}")));
        }
        if !(h > 0.0) {
            return Err(invalid(format!("element size must be positive, got {h}")));
        }
        let c = [
            0.5 - nu / 6.0,
            0.125 + nu / 8.0,
            -0.25 - nu / 12.0,
            -0.125 + 3.0 * nu / 8.0,
            -0.25 + nu / 12.0,
            -0.125 - nu / 8.0,
            nu / 6.0,
            0.125 - 3.0 * nu / 8.0,
        ];
        const PATTERN: [[usize; 8]; 8] = [
            [0, 1, 2, 3, 4, 5, 6, 7],
            [1, 0, 7, 6, 5, 4, 3, 2],
            [2, 7, 0, 5, 6, 3, 4, 1],
            [3, 6, 5, 0, 7, 2, 1, 4],
            [4, 5, 6, 7, 0, 1, 2, 3],
            [5, 4, 3, 2, 1, 0, 7, 6],
            [6, 3, 4, 1, 2, 7, 0, 5],
            [7, 2, 1, 4, 3, 6, 5, 0],
        ];
        let scale = young / (1.0 - nu * nu);
        let mut k = [[0.0; 8]; 8];
        for (row, pattern_row) in k.iter_mut().zip(PATTERN.iter()) {
            for (entry, &idx) in row.iter_mut().zip(pattern_row.iter()) {
                *entry = scale * c[idx];
            }
        }
        Ok(Self { k })
    }

    /// `u_e^T k u_e`.
    #[inline]
    pub fn energy(&self, ue: &[f64; 8]) -> f64 {
        let mut total = 0.0;
        for (row, &ua) in self.k.iter().zip(ue.iter()) {
            let mut s = 0.0;
            for (&kab, &ub) in row.iter().zip(ue.iter()) {
                s += kab * ub;
            }
            total += ua * s;
        }
        total
    }
}
