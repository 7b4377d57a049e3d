use fourier_topo::net::NetArch;
use fourier_topo_cli::config::{parse_config, RunConfig, Solver};

#[test]
fn empty_config_takes_the_defaults() {
    let cfg = parse_config("[problem]\nname = \"mid_cantilever\"\n", &[]).unwrap().config;
    assert_eq!(cfg.solver, Solver::FourierTounn);
    assert_eq!(cfg.projection.n_f, 150);
    assert_eq!(cfg.net.n_hidden, 20);
    assert_eq!(cfg.n_layers(), 1);
    assert_eq!(cfg.opt.lr, 0.01);
    assert_eq!(cfg.opt.alpha0, 0.2);
    assert_eq!(cfg.opt.p_max, 8.0);
    assert_eq!(cfg.opt.eps_g_star, 0.0025);
    assert_eq!(cfg.output.samples_per_element, 15);
    assert_eq!((cfg.problem.nelx, cfg.problem.nely), (Some(60), Some(30)));
    assert!(cfg.l_min() <= cfg.l_max());
}

#[test]
fn reversed_length_scales_are_rejected() {
    let err = parse_config("[projection]\nl_min = 10.0\nl_max = 5.0\n", &[]).unwrap_err();
    let msg = format!("{err:#}");
    assert!(msg.contains("l_min") && msg.contains("l_max") && msg.contains("must not exceed"), "{msg}");
}

#[test]
fn unknown_keys_are_named() {
    let err = parse_config("[problem]\nnelxx = 3\n", &[]).unwrap_err();
    assert!(format!("{err:#}").contains("nelxx"), "{err:#}");
    let err = parse_config("", &["opt.learning_rate=0.1".into()]).unwrap_err();
    assert!(format!("{err:#}").contains("learning_rate"), "{err:#}");
}

#[test]
fn type_mismatch_is_reported() {
    let err = parse_config("", &["opt.max_epochs=many".into()]).unwrap_err();
    let msg = format!("{err:#}");
    assert!(msg.contains("invalid type") || msg.contains("max_epochs"), "{msg}");
}

#[test]
fn overrides_win_over_the_file() {
    let text = "seed = 3\n[projection]\nl_max = 20.0\n";
    let cfg = parse_config(text, &["projection.l_max=12.5".into(), "seed=9".into(), "problem.name=mbb".into()])
        .unwrap()
        .config;
    assert_eq!(cfg.l_max(), 12.5);
    assert_eq!(cfg.seed, 9);
    assert_eq!(cfg.problem.name, "mbb");
    assert!(parse_config("", &["novalue".into()]).is_err());
    assert!(parse_config("", &["seed=2".into(), "seed.x=1".into()]).is_err());
}

#[test]
fn simp_warns_about_neural_keys() {
    let loaded = parse_config("solver = \"simp\"\n[net]\nn_hidden = 40\n", &[]).unwrap();
    assert_eq!(loaded.config.simp.r_min, 1.4);
    assert_eq!(loaded.warnings.len(), 1);
    assert!(loaded.warnings[0].contains("net"), "{:?}", loaded.warnings);
    let quiet = parse_config("solver = \"simp\"\n", &[]).unwrap();
    assert!(quiet.warnings.is_empty());
    // the echoed config of a simp run stays quiet too
    let again = parse_config(&quiet.config.to_toml(), &[]).unwrap();
    assert!(again.warnings.is_empty(), "{:?}", again.warnings);
}

#[test]
fn echo_reproduces_the_config() {
    for text in [
        "",
        "solver = \"tounn_ablation\"\n",
        "solver = \"simp\"\n[problem]\nname = \"l_bracket\"\n",
        "[materials]\nsolids = [\"black\", \"red\", \"blue\"]\n[problem]\nname = \"tip_cantilever\"\ntarget_fraction = 0.4\n",
    ] {
        let cfg = parse_config(text, &[]).unwrap().config;
        let back: RunConfig = parse_config(&cfg.to_toml(), &[]).unwrap().config;
        assert_eq!(back, cfg, "{}", cfg.to_toml());
    }
}

#[test]
fn ablation_uses_the_deeper_coordinate_net() {
    let cfg = parse_config("solver = \"tounn_ablation\"\n", &[]).unwrap().config;
    assert_eq!(cfg.n_layers(), 4);
    assert_eq!(NetArch::coordinate(2, cfg.net.n_hidden, cfg.n_layers(), 1).param_count(), 1341);
    // no projection, so reversed length scales are irrelevant
    assert!(parse_config("solver = \"tounn_ablation\"\n[projection]\nl_min = 9.0\nl_max = 3.0\n", &[]).is_ok());
}

#[test]
fn materials_select_the_constraint() {
    let single = parse_config("", &[]).unwrap().config;
    assert!(single.catalog().unwrap().is_none());
    let three = parse_config("[materials]\nsolids = [\"black\", \"red\", \"blue\"]\n", &[]).unwrap().config;
    assert_eq!(three.catalog().unwrap().unwrap().len(), 4);
    assert!(parse_config("[materials]\nsolids = [\"gold\"]\n", &[]).is_err());
    assert!(parse_config("[materials]\nsolids = []\n", &[]).is_err());
}

#[test]
fn out_of_range_values_name_their_key() {
    for (set, key) in [
        ("problem.target_fraction=1.5", "target_fraction"),
        ("projection.n_f=0", "n_f"),
        ("output.threshold=1.0", "threshold"),
        ("projection.sampling=sobol", "sampling"),
        ("problem.name=bridge", "bridge"),
    ] {
        let err = parse_config("", &[set.into()]).unwrap_err();
        assert!(format!("{err:#}").contains(key), "{set}: {err:#}");
    }
}
