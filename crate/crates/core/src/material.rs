//! Material interpolation, volume and mass.
//!
//! Multi-material densities are stored row-major, one row per point with the
//! void column first: `[rho_void, rho_1, ..., rho_S]`.

use crate::error::{invalid, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct Material {
    pub label: String,
    pub youngs: f64,
    /// Physical (mass) density.
    pub density: f64,
}

impl Material {
    pub fn new(label: impl Into<String>, youngs: f64, density: f64) -> Self {
        Self {
            label: label.into(),
            youngs,
            density,
        }
    }
}

/// Ordered candidate materials; entry 0 is void.
#[derive(Clone, Debug, PartialEq)]
pub struct MaterialCatalog {
    entries: Vec<Material>,
}

pub const VOID_PROPERTY: f64 = 1e-9;

impl MaterialCatalog {
    pub fn new(entries: Vec<Material>) -> Result<Self> {
        if entries.len() < 2 {
            return Err(invalid("a material catalog needs void plus at least one material"));
        }
        for (i, m) in entries.iter().enumerate() {
            if !(m.youngs > 0.0) || !(m.density > 0.0) {
                return Err(invalid(format!(
                    "material {i} ({}) must have positive modulus and density",
                    m.label
                )));
            }
            if entries[..i].iter().any(|o| o.label == m.label) {
                return Err(invalid(format!("duplicate material label '{}'", m.label)));
            }
        }
        Ok(Self { entries })
    }

    /// Void, black, red and blue candidates.
    pub fn standard() -> Self {
        Self {
            entries: vec![
                Material::new("void", VOID_PROPERTY, VOID_PROPERTY),
                Material::new("black", 1.0, 1.0),
                Material::new("red", 0.8, 0.7),
                Material::new("blue", 0.2, 0.15),
            ],
        }
    }

    /// The first `n_solid` solid materials of [`MaterialCatalog::standard`].
    pub fn standard_subset(n_solid: usize) -> Result<Self> {
        let all = Self::standard().entries;
        if n_solid == 0 || n_solid >= all.len() {
            return Err(invalid(format!(
                "standard catalog has 1 to {} solid materials, asked for {n_solid}",
                all.len() - 1
            )));
        }
        Ok(Self {
            entries: all.into_iter().take(n_solid + 1).collect(),
        })
    }

    pub fn entries(&self) -> &[Material] {
        &self.entries
    }

    /// Void plus solids.
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn youngs(&self) -> impl Iterator<Item = f64> + '_ {
        self.entries.iter().map(|m| m.youngs)
    }

    pub fn heaviest_density(&self) -> f64 {
        self.entries.iter().map(|m| m.density).fold(0.0, f64::max)
    }
}

/// `E_e = E_min + rho_e^p (E0 - E_min)`.
pub fn simp_modulus(rho: &[f64], p: f64, e0: f64, e_min: f64) -> Vec<f64> {
    rho.iter().map(|r| e_min + r.powf(p) * (e0 - e_min)).collect()
}

/// `dE_e / d rho_e`.
pub fn simp_modulus_derivative(rho: &[f64], p: f64, e0: f64, e_min: f64) -> Vec<f64> {
    rho.iter()
        .map(|r| p * r.powf(p - 1.0) * (e0 - e_min))
        .collect()
}

fn check_rows(rows: &[f64], catalog: &MaterialCatalog) -> Result<usize> {
    let w = catalog.len();
    if rows.len() % w != 0 {
        return Err(invalid(format!(
            "density matrix of {} entries is not a multiple of {w} columns",
            rows.len()
        )));
    }
    for (r, row) in rows.chunks_exact(w).enumerate() {
        let s: f64 = row.iter().sum();
        if (s - 1.0).abs() > 1e-4 {
            return Err(invalid(format!(
                "row {r} sums to {s}, violating the partition of unity"
            )));
        }
    }
    Ok(rows.len() / w)
}

/// `E_e = sum_i (rho_e^(i))^p E^(i)`.
pub fn mm_modulus(rows: &[f64], p: f64, catalog: &MaterialCatalog) -> Result<Vec<f64>> {
    check_rows(rows, catalog)?;
    Ok(rows
        .chunks_exact(catalog.len())
        .map(|row| {
            row.iter()
                .zip(catalog.youngs())
                .map(|(r, e)| r.powf(p) * e)
                .sum()
        })
        .collect())
}

/// `dE_e / d rho_e^(i)`, same layout as `rows`.
pub fn mm_modulus_derivative(rows: &[f64], p: f64, catalog: &MaterialCatalog) -> Vec<f64> {
    rows.chunks_exact(catalog.len())
        .flat_map(|row| {
            row.iter()
                .zip(catalog.youngs())
                .map(|(r, e)| p * r.powf(p - 1.0) * e)
                .collect::<Vec<_>>()
        })
        .collect()
}

/// `m = sum_e sum_i lambda^(i) rho_e^(i) v_e`.
pub fn mass(rows: &[f64], catalog: &MaterialCatalog, element_volume: f64) -> f64 {
    rows.chunks_exact(catalog.len())
        .map(|row| {
            row.iter()
                .zip(catalog.entries())
                .map(|(r, m)| r * m.density)
                .sum::<f64>()
        })
        .sum::<f64>()
        * element_volume
}

/// Mass normalized by filling the whole domain with the heaviest material.
pub fn mass_fraction(
    rows: &[f64],
    catalog: &MaterialCatalog,
    element_volume: f64,
    domain_volume: f64,
) -> f64 {
    mass(rows, catalog, element_volume) / (catalog.heaviest_density() * domain_volume)
}

/// `sum_e rho_e v_e / V_domain`.
pub fn volume_fraction(rho: &[f64], element_volumes: &[f64], domain_volume: f64) -> Result<f64> {
    if rho.len() != element_volumes.len() {
        return Err(invalid(format!(
            "{} densities but {} element volumes",
            rho.len(),
            element_volumes.len()
        )));
    }
    Ok(rho
        .iter()
        .zip(element_volumes)
        .map(|(r, v)| r * v)
        .sum::<f64>()
        / domain_volume)
}

/// Volume fraction on a uniform grid, `v_e = V_domain / n`.
pub fn uniform_volume_fraction(rho: &[f64]) -> f64 {
    rho.iter().sum::<f64>() / rho.len() as f64
}
