//! One input, two cosine frequencies, one LeakyReLU unit, sigmoid output.

mod common;

use std::f64::consts::PI;

use common::{leaky, line_grid as grid, scenario_bank as bank, scenario_closed_form as closed_form, scenario_net};

use fourier_topo::net::{fourier_project, FrequencyBank, Mode, DEFAULT_LEAKY_SLOPE};
use fourier_topo::post::density_spectrum_1d;
use ndarray::{arr2, Array2};

#[test]
fn network_matches_closed_form() {
    let net = scenario_net([8.0, 10.0, 0.0, 0.0], 0.0, 4.0);
    let pts = grid(512, 2.0);
    let feats = fourier_project(pts.view(), &bank([1.0, 6.0], 1.0)).unwrap();
    let rho = net.forward_eval(feats.view()).unwrap();
    for (i, x) in pts.column(0).iter().enumerate() {
        let expect = closed_form(*x, [8.0, 10.0, 4.0], [1.0, 6.0], 1.0);
        assert!((rho[[i, 0]] - expect).abs() <= 1e-12, "x = {x}");
    }
}

#[test]
fn spectrum_has_two_dominant_peaks() {
    let n = 1024;
    let pts = grid(n, 2.0);
    let net = scenario_net([8.0, 10.0, 0.0, 0.0], 0.0, 4.0);
    let feats = fourier_project(pts.view(), &bank([1.0, 6.0], 1.0)).unwrap();
    let rho = net.forward_eval(feats.view()).unwrap();
    let spec = density_spectrum_1d(rho.column(0).as_slice().unwrap(), 2.0 / n as f64, 1.0).unwrap();
    let bin = spec.freqs[1];
    let peaks = spec.dominant_peaks(2);
    let mut found = peaks.clone();
    found.sort_by(f64::total_cmp);
    assert!((found[0] - 1.0).abs() <= bin && (found[1] - 6.0).abs() <= bin, "{peaks:?}");
}

#[test]
fn hand_derivatives_of_the_chain() {
    let (w, b, w3) = ([0.7, -1.3, 0.4, 0.9], 0.2, 2.5);
    let h = 1.5;
    let f = [1.0, 3.0];
    let mut net = scenario_net(w, b, w3);
    let pts = arr2(&[[0.1], [0.35], [0.8], [1.27], [2.9]]);
    let feats = fourier_project(pts.view(), &bank(f, h)).unwrap();
    let rho = net.forward(feats.view(), Mode::Train).unwrap();
    let up = Array2::from_elem((pts.nrows(), 1), 1.0);
    let g = net.backward(feats.view(), up.view()).unwrap();

    let mut expect_w = [0.0; 4];
    let (mut expect_b, mut expect_w3) = (0.0, 0.0);
    for (i, x) in pts.column(0).iter().enumerate() {
        let basis = [
            (PI / h * f[0] * x).cos(),
            (PI / h * f[1] * x).cos(),
            (PI / h * f[0] * x).sin(),
            (PI / h * f[1] * x).sin(),
        ];
        let z: f64 = b + basis.iter().zip(&w).map(|(a, c)| a * c).sum::<f64>();
        let r = 1.0 / (1.0 + (-w3 * leaky(z)).exp());
        assert!((rho[[i, 0]] - r).abs() < 1e-14);
        let ds = r * (1.0 - r);
        let dlr = if z > 0.0 { 1.0 } else { DEFAULT_LEAKY_SLOPE };
        for k in 0..4 {
            expect_w[k] += ds * w3 * dlr * basis[k];
        }
        expect_b += ds * w3 * dlr;
        expect_w3 += ds * leaky(z);
    }
    let flat = g.to_flat();
    for k in 0..4 {
        assert!((flat[k] - expect_w[k]).abs() < 1e-12, "weight {k}");
    }
    assert!((flat[4] - expect_b).abs() < 1e-12);
    assert!((flat[5] - expect_w3).abs() < 1e-12);
}

#[test]
fn projection_is_band_limited() {
    // integer half-cycle frequencies over [0, 2) land exactly on bins
    let freqs = [2.0, 5.0, 9.0];
    let b = FrequencyBank::from_matrix(arr2(&[freqs]), 1.0).unwrap();
    let n = 256;
    let pts = grid(n, 2.0);
    let feats = fourier_project(pts.view(), &b).unwrap();
    let mix: Vec<f64> = (0..n)
        .map(|i| (0..6).map(|k| feats[[i, k]] * (0.3 + 0.4 * k as f64)).sum())
        .collect();
    let spec = density_spectrum_1d(&mix, 2.0 / n as f64, 1.0).unwrap();
    for (f, a) in spec.one_sided() {
        if freqs.contains(&f) {
            assert!(a > 1.0, "missing energy at {f}");
        } else {
            assert!(a < 1e-9, "leak {a:e} at {f}");
        }
    }
}
