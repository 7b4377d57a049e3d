//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Three operations: a step-wise optimizer rendered to RGBA pixels, the
//! one-input two-frequency network with its spectrum, and a view of a
//! sampled frequency bank.

use fourier_topo::net::{fourier_project, FieldInput, FrequencyBank, NetArch, Network};
use fourier_topo::opt::{Constraint, NeuralOptimizer, OptConfig};
use fourier_topo::post::{density_spectrum_1d, extract_highres, FineField, MATERIAL_COLORS};
use fourier_topo::problems::{make_problem, ProblemOverrides, PROBLEM_NAMES};
use ndarray::{arr2, Array2};
use wasm_bindgen::prelude::*;

fn js_err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

/// Comma-separated problem names for the picker.
#[wasm_bindgen]
pub fn problem_names() -> String {
    PROBLEM_NAMES.join(",")
}

/// Row-major RGBA, black for solid and white for void, or the material
/// colour of the strongest channel.
pub fn rgba(field: &FineField) -> Vec<u8> {
    let mut out = Vec::with_capacity(field.width() * field.height() * 4);
    if field.channels() == 1 {
        for v in field.values.iter() {
            let g = (255.0 * (1.0 - v.clamp(0.0, 1.0))).round() as u8;
            out.extend_from_slice(&[g, g, g, 255]);
        }
    } else {
        for k in field.argmax().iter() {
            let [r, g, b] = MATERIAL_COLORS[*k % MATERIAL_COLORS.len()];
            out.extend_from_slice(&[r, g, b, 255]);
        }
    }
    out
}

/// A neural optimization advanced a few epochs at a time from the page.
#[wasm_bindgen]
pub struct Session {
    opt: NeuralOptimizer,
    input: FieldInput,
}

#[wasm_bindgen]
impl Session {
    /// Default network behind a projection sampled in `[l_min, l_max]`,
    /// `n_solids` materials (mass constraint when more than one).
    #[wasm_bindgen(constructor)]
    pub fn new(
        problem: &str,
        target: f64,
        l_min: f64,
        l_max: f64,
        n_f: usize,
        n_solids: usize,
        seed: u32,
    ) -> Result<Session, String> {
        let overrides = ProblemOverrides {
            target_fraction: Some(target),
            l_min: Some(l_min),
            l_max: Some(l_max),
            ..ProblemOverrides::default()
        };
        let (spec, mesh) = make_problem(problem, &overrides).map_err(js_err)?;
        let seed = u64::from(seed);
        let bank = FrequencyBank::sample(l_min, l_max, mesh.h(), n_f, 2, seed).map_err(js_err)?;
        let input = FieldInput::fourier(bank).with_extrude(spec.extrude);
        let constraint = if n_solids <= 1 {
            Constraint::Volume { fraction: target }
        } else {
            Constraint::Mass {
                fraction: target,
                catalog: fourier_topo::material::MaterialCatalog::standard_subset(n_solids).map_err(js_err)?,
            }
        };
        let n_out = if n_solids <= 1 { 1 } else { n_solids + 1 };
        let net = Network::init(NetArch::fourier(n_f, 20, 1, n_out).without_batch_norm(), seed).map_err(js_err)?;
        let config = OptConfig {
            target_fraction: target,
            seed,
            ..OptConfig::default()
        };
        let opt = NeuralOptimizer::new(mesh, net, input.clone(), constraint, config).map_err(js_err)?;
        Ok(Session { opt, input })
    }

    /// Runs up to `epochs` epochs; true once the run has finished.
    pub fn step(&mut self, epochs: u32) -> Result<bool, String> {
        for _ in 0..epochs {
            if self.opt.is_finished() {
                break;
            }
            self.opt.step().map_err(js_err)?;
        }
        Ok(self.opt.is_finished())
    }

    pub fn epoch(&self) -> usize {
        self.opt.history().len()
    }

    pub fn converged(&self) -> bool {
        self.opt.is_converged()
    }

    /// `[compliance, fraction, gray_fraction, alpha, p]` of the last epoch.
    pub fn stats(&self) -> Vec<f64> {
        self.opt
            .history()
            .last()
            .map(|r| vec![r.compliance, r.fraction, r.gray_fraction, r.alpha, r.p])
            .unwrap_or_default()
    }

    /// Compliance per epoch so far.
    pub fn compliance_history(&self) -> Vec<f64> {
        self.opt.history().rows.iter().map(|r| r.compliance).collect()
    }

    pub fn width(&self, s: usize) -> usize {
        self.opt.mesh().nelx() * s
    }

    pub fn height(&self, s: usize) -> usize {
        self.opt.mesh().nely() * s
    }

    /// The current field sampled `s x s` times per element, as RGBA.
    pub fn render(&self, s: usize) -> Result<Vec<u8>, String> {
        let field = extract_highres(self.opt.net(), &self.input, self.opt.mesh(), s).map_err(js_err)?;
        Ok(rgba(&field))
    }
}

fn scenario_network(w1: f64, w2: f64, w3: f64) -> Result<Network, String> {
    let mut net = Network::init(NetArch::fourier(2, 1, 1, 1).without_batch_norm(), 0).map_err(js_err)?;
    for (name, block) in net.params_mut().blocks_mut() {
        match name.as_str() {
            "hidden[0].weight" => block.copy_from_slice(&[w1, w2, 0.0, 0.0]),
            "output.weight" => block[0] = w3,
            _ => block.fill(0.0),
        }
    }
    Ok(net)
}

/// Density of the one-input network `sigmoid(w3 LeakyReLU(w1 cos(pi f1 x)
/// + w2 cos(pi f2 x)))` at `n` points over `[0, 2)`.
#[wasm_bindgen]
pub fn scenario_density(w1: f64, w2: f64, w3: f64, f1: f64, f2: f64, n: usize) -> Result<Vec<f64>, String> {
    if n < 4 {
        return Err("need at least 4 samples".into());
    }
    let net = scenario_network(w1, w2, w3)?;
    let bank = FrequencyBank::from_matrix(arr2(&[[f1, f2]]), 1.0).map_err(js_err)?;
    let pts = Array2::from_shape_fn((n, 1), |(i, _)| 2.0 * i as f64 / n as f64);
    let feats = fourier_project(pts.view(), &bank).map_err(js_err)?;
    let rho = net.forward_eval(feats.view()).map_err(js_err)?;
    Ok(rho.column(0).to_vec())
}

/// One-sided amplitude spectrum of [`scenario_density`], flattened as
/// `[f0, a0, f1, a1, ...]` with `f` in half-cycles per unit.
#[wasm_bindgen]
pub fn scenario_spectrum(w1: f64, w2: f64, w3: f64, f1: f64, f2: f64, n: usize) -> Result<Vec<f64>, String> {
    let rho = scenario_density(w1, w2, w3, f1, f2, n)?;
    let spec = density_spectrum_1d(&rho, 2.0 / n as f64, 1.0).map_err(js_err)?;
    Ok(spec.one_sided().into_iter().flat_map(|(f, a)| [f, a]).collect())
}

/// A sampled bank as `[fx0, fy0, fx1, fy1, ...]`.
#[wasm_bindgen]
pub fn frequency_bank(l_min: f64, l_max: f64, n_f: usize, seed: u32) -> Result<Vec<f64>, String> {
    let bank = FrequencyBank::sample(l_min, l_max, 1.0, n_f, 2, u64::from(seed)).map_err(js_err)?;
    let f = bank.freqs();
    Ok((0..bank.n_freqs()).flat_map(|i| [f[[0, i]], f[[1, i]]]).collect())
}

/// The plane wave `cos(pi f . x)` of bank column `index` over a
/// `size x size` window of `extent` units, RGBA.
#[wasm_bindgen]
pub fn bank_wave(l_min: f64, l_max: f64, n_f: usize, seed: u32, index: usize, size: usize, extent: f64) -> Result<Vec<u8>, String> {
    let bank = FrequencyBank::sample(l_min, l_max, 1.0, n_f, 2, u64::from(seed)).map_err(js_err)?;
    if index >= bank.n_freqs() {
        return Err(format!("index {index} out of range for {} frequencies", bank.n_freqs()));
    }
    let f = bank.freqs();
    let (fx, fy) = (f[[0, index]], f[[1, index]]);
    let mut out = Vec::with_capacity(size * size * 4);
    for r in 0..size {
        for c in 0..size {
            let x = (c as f64 + 0.5) / size as f64 * extent;
            let y = (size - r) as f64 / size as f64 * extent;
            let v = (std::f64::consts::PI * (fx * x + fy * y)).cos();
            let g = (127.5 * (1.0 - v)).round() as u8;
            out.extend_from_slice(&[g, g, g, 255]);
        }
    }
    Ok(out)
}
