use std::f64::consts::PI;

use fourier_topo::post::{FineField, MATERIAL_COLORS};
use fourier_topo_web::{bank_wave, frequency_bank, problem_names, rgba, scenario_density, scenario_spectrum, Session};
use ndarray::Array3;

fn closed_form(x: f64, w: [f64; 3], f: [f64; 2]) -> f64 {
    let z = w[0] * (PI * f[0] * x).cos() + w[1] * (PI * f[1] * x).cos();
    let lr = if z > 0.0 { z } else { 0.01 * z };
    1.0 / (1.0 + (-w[2] * lr).exp())
}

#[test]
fn scenario_matches_closed_form() {
    let rho = scenario_density(8.0, 10.0, 4.0, 1.0, 6.0, 256).unwrap();
    for (i, r) in rho.iter().enumerate() {
        let x = 2.0 * i as f64 / 256.0;
        assert!((r - closed_form(x, [8.0, 10.0, 4.0], [1.0, 6.0])).abs() < 1e-12);
    }
    assert!(scenario_density(1.0, 1.0, 1.0, 1.0, 2.0, 3).is_err());
}

#[test]
fn scenario_spectrum_peaks() {
    let flat = scenario_spectrum(8.0, 10.0, 4.0, 1.0, 6.0, 1024).unwrap();
    let pairs: Vec<(f64, f64)> = flat.chunks(2).map(|c| (c[0], c[1])).collect();
    assert_eq!(pairs.len(), 513);
    let mut non_dc = pairs[1..].to_vec();
    non_dc.sort_by(|a, b| b.1.total_cmp(&a.1));
    let mut top = [non_dc[0].0, non_dc[1].0];
    top.sort_by(f64::total_cmp);
    assert_eq!(top, [1.0, 6.0]);
}

#[test]
fn bank_lies_in_the_band() {
    let flat = frequency_bank(6.0, 30.0, 150, 4).unwrap();
    assert_eq!(flat.len(), 300);
    assert!(flat.iter().all(|f| f.abs() >= 1.0 / 30.0 - 1e-12 && f.abs() <= 1.0 / 6.0 + 1e-12));
    assert_eq!(flat, frequency_bank(6.0, 30.0, 150, 4).unwrap());
    assert!(frequency_bank(30.0, 6.0, 150, 4).is_err());

    let wave = bank_wave(6.0, 30.0, 150, 4, 7, 16, 60.0).unwrap();
    assert_eq!(wave.len(), 16 * 16 * 4);
    assert!(bank_wave(6.0, 30.0, 150, 4, 150, 16, 60.0).is_err());
}

#[test]
fn session_steps_and_renders() {
    assert!(problem_names().split(',').any(|p| p == "mid_cantilever"));
    let mut s = Session::new("mid_cantilever", 0.5, 6.0, 30.0, 30, 1, 0).unwrap();
    assert_eq!(s.epoch(), 0);
    assert!(!s.step(3).unwrap());
    assert_eq!(s.epoch(), 3);
    assert_eq!(s.stats().len(), 5);
    assert_eq!(s.compliance_history().len(), 3);
    assert_eq!((s.width(2), s.height(2)), (120, 60));
    assert_eq!(s.render(2).unwrap().len(), 120 * 60 * 4);

    let mm = Session::new("mid_cantilever", 0.5, 6.0, 30.0, 30, 3, 0).unwrap();
    let px = mm.render(1).unwrap();
    assert!(px.chunks(4).all(|p| MATERIAL_COLORS.iter().any(|c| c[..] == p[..3])));

    assert!(Session::new("bridge", 0.5, 6.0, 30.0, 30, 1, 0).is_err());
    assert!(Session::new("mid_cantilever", 0.5, 30.0, 6.0, 30, 1, 0).is_err());
}

#[test]
fn rgba_colours() {
    let gray = FineField::new(Array3::from_shape_vec((1, 3, 1), vec![0.0, 0.5, 1.0]).unwrap(), 1, 1.0).unwrap();
    assert_eq!(rgba(&gray), vec![255, 255, 255, 255, 128, 128, 128, 255, 0, 0, 0, 255]);
    let mm = FineField::new(Array3::from_shape_fn((1, 2, 3), |(_, c, k)| if k == c + 1 { 0.8 } else { 0.1 }), 1, 1.0)
        .unwrap();
    let px = rgba(&mm);
    assert_eq!(&px[..3], &MATERIAL_COLORS[1]);
    assert_eq!(&px[4..7], &MATERIAL_COLORS[2]);
}
