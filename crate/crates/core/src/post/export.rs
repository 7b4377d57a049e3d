use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use image::{GrayImage, Luma, Rgb, RgbImage};
use ndarray::Array3;

use super::{FeatureSizeReport, FineField};
use crate::error::{Result, TopoError};
use crate::opt::History;

pub const IMAGE_FILE: &str = "topology.png";
pub const DENSITY_FILE: &str = "density.csv";
pub const HISTORY_FILE: &str = "history.csv";
pub const SPECTRUM_FILE: &str = "spectrum.csv";
pub const FEATURE_FILE: &str = "feature_size.csv";

/// Colours for channel argmax in multi-material images: void, then the
/// solids in catalog order.
pub const MATERIAL_COLORS: [[u8; 3]; 4] = [[200, 200, 200], [0, 0, 0], [220, 30, 30], [30, 60, 220]];

/// Grayscale (0 white, 1 black) for a single channel, argmax colours
/// otherwise.
pub fn write_png(field: &FineField, path: &Path) -> Result<()> {
    let (w, h) = (field.width() as u32, field.height() as u32);
    let result = if field.channels() == 1 {
        let solid = field.solid();
        let img = GrayImage::from_fn(w, h, |c, r| {
            let v = solid[[r as usize, c as usize]].clamp(0.0, 1.0);
            Luma([(255.0 * (1.0 - v)).round() as u8])
        });
        img.save(path)
    } else {
        let arg = field.argmax();
        let img = RgbImage::from_fn(w, h, |c, r| {
            let k = arg[[r as usize, c as usize]];
            Rgb(MATERIAL_COLORS[k.min(MATERIAL_COLORS.len() - 1)])
        });
        img.save(path)
    };
    result.map_err(|source| TopoError::Image {
        path: path.to_path_buf(),
        source,
    })
}

/// Header row of column labels, then one line per pixel row (top first).
/// Multi-channel pixels occupy consecutive columns `x{c}_{k}`.
pub fn density_grid_text(field: &FineField) -> String {
    let (ny, nx, nc) = field.values.dim();
    let mut out = String::with_capacity(ny * nx * nc * 13);
    let labels: Vec<String> = (0..nx)
        .flat_map(|c| {
            (0..nc).map(move |k| if nc == 1 { format!("x{c}") } else { format!("x{c}_{k}") })
        })
        .collect();
    out.push_str(&labels.join(","));
    out.push('\n');
    for r in 0..ny {
        for c in 0..nx {
            for k in 0..nc {
                if c + k > 0 {
                    out.push(',');
                }
                write!(out, "{:.5e}", field.values[[r, c, k]]).expect("writing to a String");
            }
        }
        out.push('\n');
    }
    out
}

/// Inverse of [`density_grid_text`]: `(rows, columns, channels)`.
pub fn parse_density_grid(text: &str) -> Result<Array3<f64>> {
    let bad = |detail: String| TopoError::Format {
        what: "density grid",
        detail,
    };
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| bad("empty input".into()))?;
    let labels: Vec<&str> = header.split(',').collect();
    let nc = labels.iter().take_while(|l| l.starts_with("x0")).count().max(1);
    if labels.len() % nc != 0 {
        return Err(bad(format!("{} columns is not a multiple of {nc} channels", labels.len())));
    }
    let nx = labels.len() / nc;
    let mut data = Vec::new();
    let mut ny = 0;
    for (i, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let before = data.len();
        for tok in line.split(',') {
            data.push(
                tok.trim()
                    .parse::<f64>()
                    .map_err(|e| bad(format!("row {}: {tok:?}: {e}", i + 1)))?,
            );
        }
        if data.len() - before != nx * nc {
            return Err(bad(format!("row {} has {} values, expected {}", i + 1, data.len() - before, nx * nc)));
        }
        ny += 1;
    }
    Array3::from_shape_vec((ny, nx, nc), data).map_err(|e| bad(e.to_string()))
}

pub fn spectrum_table(profile: &[(f64, f64)]) -> String {
    let mut out = String::from("f,amplitude\n");
    for (f, a) in profile {
        writeln!(out, "{f:.6e},{a:.6e}").expect("writing to a String");
    }
    out
}

pub fn feature_table(report: &FeatureSizeReport) -> String {
    format!(
        "status,threshold,min_thickness,median_thickness,max_thickness,skeleton_pixels\n{},{},{:.6e},{:.6e},{:.6e},{}\n",
        report.status.as_str(),
        report.threshold,
        report.min_thickness,
        report.median_thickness,
        report.max_thickness,
        report.skeleton_pixels
    )
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExportedFiles {
    pub image: PathBuf,
    pub density: PathBuf,
    pub history: PathBuf,
    pub spectrum: PathBuf,
    pub features: PathBuf,
}

fn write_text(path: PathBuf, text: &str) -> Result<PathBuf> {
    fs::write(&path, text).map_err(|e| TopoError::io(&path, e))?;
    Ok(path)
}

/// Writes image, density grid, history, spectrum profile and feature-size
/// tables into `dir`, creating it if needed.
pub fn export_outputs(
    dir: &Path,
    field: &FineField,
    history: &History,
    spectrum: &[(f64, f64)],
    features: &FeatureSizeReport,
) -> Result<ExportedFiles> {
    fs::create_dir_all(dir).map_err(|e| TopoError::io(dir, e))?;
    let image = dir.join(IMAGE_FILE);
    write_png(field, &image)?;
    Ok(ExportedFiles {
        image,
        density: write_text(dir.join(DENSITY_FILE), &density_grid_text(field))?,
        history: write_text(dir.join(HISTORY_FILE), &history.to_table())?,
        spectrum: write_text(dir.join(SPECTRUM_FILE), &spectrum_table(spectrum))?,
        features: write_text(dir.join(FEATURE_FILE), &feature_table(features))?,
    })
}
