use fourier_topo::net::{FieldInput, FrequencyBank, NetArch, Network};
use fourier_topo::opt::History;
use fourier_topo::post::{
    density_grid_text, distance_transform, export_outputs, extract_highres, feature_size, parse_density_grid,
    write_png, FeatureStatus, FineField, MATERIAL_COLORS,
};
use fourier_topo::problems::{make_problem, ProblemOverrides};
use ndarray::{Array2, Array3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Nearest void pixel by exhaustive search, with a ring of void pixels
/// around the image.
fn brute_force_distance(mask: &Array2<bool>) -> Array2<f64> {
    let (ny, nx) = mask.dim();
    let mut voids = Vec::new();
    for r in -1..=ny as i64 {
        for c in -1..=nx as i64 {
            let inside = r >= 0 && c >= 0 && r < ny as i64 && c < nx as i64;
            if !inside || !mask[[r as usize, c as usize]] {
                voids.push((r, c));
            }
        }
    }
    Array2::from_shape_fn((ny, nx), |(r, c)| {
        if !mask[[r, c]] {
            return 0.0;
        }
        voids
            .iter()
            .map(|&(vr, vc)| (((vr - r as i64).pow(2) + (vc - c as i64).pow(2)) as f64).sqrt())
            .fold(f64::INFINITY, f64::min)
    })
}

#[test]
fn distance_transform_matches_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for (ny, nx, p) in [(17, 23, 0.7), (9, 40, 0.9), (30, 12, 0.5), (1, 8, 0.8)] {
        let mask = Array2::from_shape_fn((ny, nx), |_| rng.gen_bool(p));
        let fast = distance_transform(&mask);
        let slow = brute_force_distance(&mask);
        for (a, b) in fast.iter().zip(slow.iter()) {
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
    }
}

fn mask_field(mask: &Array2<bool>) -> FineField {
    let (ny, nx) = mask.dim();
    FineField::new(
        Array3::from_shape_fn((ny, nx, 1), |(r, c, _)| if mask[[r, c]] { 0.9 } else { 0.1 }),
        1,
        1.0,
    )
    .unwrap()
}

#[test]
fn rectangles_measure_their_width() {
    for w in 2..14 {
        let horizontal = Array2::from_shape_fn((40, 80), |(r, c)| (5..5 + w).contains(&r) && (3..75).contains(&c));
        let vertical = Array2::from_shape_fn((80, 40), |(r, c)| (5..5 + w).contains(&c) && (3..75).contains(&r));
        for mask in [horizontal, vertical] {
            let rep = feature_size(&mask_field(&mask), 0.5).unwrap();
            assert_eq!(rep.status, FeatureStatus::Measured);
            assert!((rep.median_thickness - w as f64).abs() <= 1.0, "width {w}: {}", rep.median_thickness);
            assert!(rep.min_thickness <= rep.median_thickness && rep.median_thickness <= rep.max_thickness);
        }
    }
}

fn trained_like_net(seed: u64) -> (Network, FieldInput) {
    let bank = FrequencyBank::sample(6.0, 30.0, 1.0, 150, 2, seed).unwrap();
    (Network::init(NetArch::fourier(150, 20, 1, 1), seed).unwrap(), FieldInput::fourier(bank))
}

#[test]
fn extraction_grid_and_no_mutation() {
    let (_, mesh) = make_problem("mid_cantilever", &ProblemOverrides::default()).unwrap();
    let (net, input) = trained_like_net(3);
    let before = net.params().to_flat();
    let stats = net.batch_norm_stats().to_vec();
    let fine = extract_highres(&net, &input, &mesh, 15).unwrap();
    assert_eq!((fine.width(), fine.height()), (900, 450));
    assert_eq!(net.params().to_flat(), before);
    assert_eq!(net.batch_norm_stats(), &stats[..]);
    assert!(fine.values.iter().all(|v| (0.0..=1.0).contains(v)));
}

#[test]
fn single_sample_extraction_equals_element_densities() {
    let (_, mesh) = make_problem("mid_cantilever", &ProblemOverrides::default()).unwrap();
    let (net, input) = trained_like_net(4);
    let feats = input.features(mesh.element_centers().view()).unwrap();
    let rho = net.forward_eval(feats.view()).unwrap();
    let fine = extract_highres(&net, &input, &mesh, 1).unwrap();
    let upsampled = FineField::from_elements(&mesh, &rho, 1).unwrap();
    assert_eq!(fine.values, upsampled.values);
}

#[test]
fn constant_net_gives_constant_field() {
    let (_, mesh) = make_problem("mid_cantilever", &ProblemOverrides::default()).unwrap();
    let (mut net, input) = trained_like_net(5);
    let zeros = vec![0.0; net.params().len()];
    net.params_mut().copy_from_flat(&zeros).unwrap();
    let fine = extract_highres(&net, &input, &mesh, 3).unwrap();
    assert!(fine.values.iter().all(|v| *v == 0.5));
}

#[test]
fn passive_layer_survives_extraction() {
    let (_, mesh) = make_problem("distributed_load", &ProblemOverrides::default()).unwrap();
    let (net, input) = trained_like_net(6);
    let fine = extract_highres(&net, &input, &mesh, 4).unwrap();
    // the top element layer is four pixel rows
    for r in 0..4 {
        assert!(fine.values.slice(ndarray::s![r, .., 0]).iter().all(|v| *v == 1.0));
    }
}

#[test]
fn density_text_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for channels in [1, 3] {
        let v = Array3::from_shape_fn((7, 11, channels), |_| rng.gen_range(0.0..1.0));
        let field = FineField::new(v.clone(), 1, 1.0).unwrap();
        let text = density_grid_text(&field);
        let back = parse_density_grid(&text).unwrap();
        assert_eq!(back.dim(), v.dim());
        for (a, b) in back.iter().zip(v.iter()) {
            assert!((a - b).abs() <= 1e-6);
        }
    }
    assert!(parse_density_grid("x0,x1\n0.1,0.2\n0.3\n").is_err());
}

#[test]
fn images_have_field_dimensions_and_colours() {
    let dir = tempfile::tempdir().unwrap();
    let gray = FineField::new(Array3::from_shape_fn((450, 900, 1), |(r, _, _)| r as f64 / 449.0), 15, 1.0 / 15.0).unwrap();
    let path = dir.path().join("g.png");
    write_png(&gray, &path).unwrap();
    let img = image::open(&path).unwrap().into_luma8();
    assert_eq!(img.dimensions(), (900, 450));
    assert_eq!(img.get_pixel(0, 0)[0], 255);
    assert_eq!(img.get_pixel(0, 449)[0], 0);

    let mm = Array3::from_shape_fn((2, 4, 4), |(_, c, k)| if k == c { 0.7 } else { 0.1 });
    let field = FineField::new(mm, 1, 1.0).unwrap();
    let path = dir.path().join("m.png");
    write_png(&field, &path).unwrap();
    let img = image::open(&path).unwrap().into_rgb8();
    for c in 0..4 {
        assert_eq!(img.get_pixel(c, 1).0, MATERIAL_COLORS[c as usize]);
    }
}

#[test]
fn export_writes_five_files_and_reports_paths() {
    let dir = tempfile::tempdir().unwrap();
    let field = mask_field(&Array2::from_shape_fn((20, 30), |(r, _)| (5..11).contains(&r)));
    let rep = feature_size(&field, 0.5).unwrap();
    let files = export_outputs(dir.path(), &field, &History::default(), &[(0.0, 1.0)], &rep).unwrap();
    for p in [&files.image, &files.density, &files.history, &files.spectrum, &files.features] {
        assert!(p.exists(), "{}", p.display());
    }
    let blocker = dir.path().join("blocked");
    std::fs::write(&blocker, "").unwrap();
    let err = export_outputs(&blocker.join("sub"), &field, &History::default(), &[], &rep).unwrap_err();
    assert!(err.to_string().contains("blocked"), "{err}");
}
