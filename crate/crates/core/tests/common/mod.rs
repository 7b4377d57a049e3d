//! Oracles and fixtures shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

use fourier_topo::fea::{assemble_and_solve, GridMesh};
use fourier_topo::net::{FieldInput, FrequencyBank, Mode, NetArch, Network, DEFAULT_LEAKY_SLOPE};
use fourier_topo::opt::{compute_j0, element_moduli, loss, loss_grad_wrt_density, Constraint, LossContext};
use ndarray::{arr2, Array2, ArrayView2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn cantilever(nelx: usize, nely: usize) -> GridMesh {
    let mut m = GridMesh::new(nelx, nely, 1.0).unwrap();
    for n in m.left_edge_nodes() {
        m.fix_node(n, true, true).unwrap();
    }
    m.add_nodal_force(m.node_index(nelx, nely / 2), 0.0, -1.0).unwrap();
    m
}

/// Plane-stress bilinear quad stiffness by 2x2 Gauss quadrature, nodes
/// counter-clockwise from the bottom-left, dofs `(x, y)` per node.
pub fn quadrature_stiffness(young: f64, nu: f64, h: f64) -> [[f64; 8]; 8] {
    let c = young / (1.0 - nu * nu);
    let d = [[c, c * nu, 0.0], [c * nu, c, 0.0], [0.0, 0.0, c * (1.0 - nu) / 2.0]];
    let corners = [(-1.0, -1.0), (1.0, -1.0), (1.0, 1.0), (-1.0, 1.0)];
    let g = 1.0 / 3f64.sqrt();
    let mut k = [[0.0; 8]; 8];
    for &(xi, eta) in &[(-g, -g), (g, -g), (g, g), (-g, g)] {
        let mut b = [[0.0; 8]; 3];
        for (n, &(xn, yn)) in corners.iter().enumerate() {
            // d/dx = (2/h) d/dxi
            let dx = xn * (1.0 + yn * eta) / 4.0 * 2.0 / h;
            let dy = yn * (1.0 + xn * xi) / 4.0 * 2.0 / h;
            b[0][2 * n] = dx;
            b[1][2 * n + 1] = dy;
            b[2][2 * n] = dy;
            b[2][2 * n + 1] = dx;
        }
        let det = h * h / 4.0;
        for i in 0..8 {
            for j in 0..8 {
                let mut s = 0.0;
                for p in 0..3 {
                    for q in 0..3 {
                        s += b[p][i] * d[p][q] * b[q][j];
                    }
                }
                k[i][j] += s * det;
            }
        }
    }
    k
}

/// Uniform tension of a 5x3 patch with consistent end loads; returns the
/// largest nodal displacement error relative to the largest displacement.
pub fn patch_test_error() -> f64 {
    let (nelx, nely, h, nu, sigma) = (5, 3, 0.7, 0.3, 2.0);
    let mut mesh = GridMesh::new(nelx, nely, h).unwrap().with_poisson(nu).unwrap();
    for n in mesh.left_edge_nodes() {
        mesh.fix_node(n, true, false).unwrap();
    }
    mesh.fix_node(mesh.node_index(0, 0), true, true).unwrap();
    for j in 0..=nely {
        let share = if j == 0 || j == nely { 0.5 } else { 1.0 };
        mesh.add_nodal_force(mesh.node_index(nelx, j), sigma * h * share, 0.0).unwrap();
    }
    let sol = assemble_and_solve(&mesh, &vec![1.0; mesh.n_elements()]).unwrap();
    let ux_max = sigma * nelx as f64 * h;
    let mut worst = 0.0f64;
    for node in 0..mesh.n_nodes() {
        let (x, y) = mesh.node_position(node);
        worst = worst
            .max((sol.u[2 * node] - sigma * x).abs())
            .max((sol.u[2 * node + 1] + nu * sigma * y).abs());
    }
    worst / ux_max
}

pub fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, g| m.max(g.abs()))
}

/// Largest per-entry relative error between `backward` and central
/// differences of `sum(upstream * rho)`. Entries far below the gradient's
/// overall scale are compared against `1e-3` of that scale, since their
/// differences are dominated by rounding.
pub fn net_gradient_error(arch: NetArch, input: &FieldInput, seed: u64) -> f64 {
    let step = 1e-6;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let points = Array2::from_shape_fn((64, 2), |(_, k)| rng.gen_range(0.0..if k == 0 { 60.0 } else { 30.0 }));
    let feats = input.features(points.view()).unwrap();
    let upstream = Array2::from_shape_fn((64, arch.n_outputs), |_| rng.gen_range(-1.0..1.0));
    let mut net = Network::init(arch, seed).unwrap();

    let objective = |net: &mut Network| (&net.forward(feats.view(), Mode::Train).unwrap() * &upstream).sum();
    objective(&mut net);
    let analytic = net.backward(feats.view(), upstream.view()).unwrap().to_flat();
    let base = net.params().to_flat();
    let mut probe = base.clone();
    let scale = max_abs(&analytic);
    let mut worst = 0.0f64;
    for i in 0..base.len() {
        probe[i] = base[i] + step;
        net.params_mut().copy_from_flat(&probe).unwrap();
        let plus = objective(&mut net);
        probe[i] = base[i] - step;
        net.params_mut().copy_from_flat(&probe).unwrap();
        let minus = objective(&mut net);
        probe[i] = base[i];
        let fd = (plus - minus) / (2.0 * step);
        worst = worst.max((analytic[i] - fd).abs() / analytic[i].abs().max(fd.abs()).max(1e-3 * scale));
    }
    worst
}

pub fn fourier_input(l_min: f64, l_max: f64, n_f: usize, seed: u64) -> FieldInput {
    FieldInput::fourier(FrequencyBank::sample(l_min, l_max, 1.0, n_f, 2, seed).unwrap())
}

pub fn full_loss(mesh: &GridMesh, rho: ArrayView2<'_, f64>, ctx: &LossContext<'_>) -> f64 {
    let young = element_moduli(rho, ctx.p, ctx.constraint).unwrap();
    let sol = assemble_and_solve(mesh, &young).unwrap();
    loss(rho, &sol.element_compliance, ctx).unwrap().loss
}

/// Largest per-entry relative error of `loss_grad_wrt_density` against
/// central differences of the loss with a fresh solve per evaluation.
/// Entries far below the gradient's scale are compared against `1e-5` of it.
pub fn density_gradient_error(
    mesh: &GridMesh,
    rho: &Array2<f64>,
    constraint: &Constraint,
    p: f64,
    alpha: f64,
    step: f64,
) -> f64 {
    let ctx = LossContext {
        p,
        alpha,
        j0: compute_j0(mesh, constraint, 1.0).unwrap(),
        element_volume: mesh.element_volume(),
        domain_volume: mesh.domain_volume(),
        constraint,
    };
    let young = element_moduli(rho.view(), p, constraint).unwrap();
    let sol = assemble_and_solve(mesh, &young).unwrap();
    let grad = loss_grad_wrt_density(rho.view(), &sol.element_compliance, &ctx).unwrap();
    let scale = grad.iter().fold(0.0f64, |m, g| m.max(g.abs()));
    let mut worst = 0.0f64;
    for e in 0..rho.nrows() {
        for k in 0..rho.ncols() {
            let mut up = rho.clone();
            up[[e, k]] += step;
            let mut dn = rho.clone();
            dn[[e, k]] -= step;
            let fd = (full_loss(mesh, up.view(), &ctx) - full_loss(mesh, dn.view(), &ctx)) / (2.0 * step);
            worst = worst.max((grad[[e, k]] - fd).abs() / fd.abs().max(1e-5 * scale));
        }
    }
    worst
}

pub fn leaky(v: f64) -> f64 {
    if v > 0.0 {
        v
    } else {
        DEFAULT_LEAKY_SLOPE * v
    }
}

/// `1 / (1 + exp(-w3 LR(w1 cos(pi f1 x / h) + w2 cos(pi f2 x / h))))`.
pub fn scenario_closed_form(x: f64, w: [f64; 3], f: [f64; 2], h: f64) -> f64 {
    let z = w[0] * (PI / h * f[0] * x).cos() + w[1] * (PI / h * f[1] * x).cos();
    1.0 / (1.0 + (-w[2] * leaky(z)).exp())
}

/// One input, two frequencies, one LeakyReLU unit and a sigmoid output.
/// Hidden weights are ordered `[cos f1, cos f2, sin f1, sin f2]`.
pub fn scenario_net(hidden: [f64; 4], bias: f64, out: f64) -> Network {
    let arch = NetArch::fourier(2, 1, 1, 1).without_batch_norm();
    let mut net = Network::init(arch, 0).unwrap();
    for (name, block) in net.params_mut().blocks_mut() {
        match name.as_str() {
            "hidden[0].weight" => block.copy_from_slice(&hidden),
            "hidden[0].bias" => block[0] = bias,
            "output.weight" => block[0] = out,
            other => panic!("unexpected block {other}"),
        }
    }
    net
}

pub fn scenario_bank(f: [f64; 2], h: f64) -> FrequencyBank {
    FrequencyBank::from_matrix(arr2(&[[f[0], f[1]]]), h).unwrap()
}

/// `n` points covering `[0, period)` as a column.
pub fn line_grid(n: usize, period: f64) -> Array2<f64> {
    Array2::from_shape_fn((n, 1), |(i, _)| period * i as f64 / n as f64)
}

/// Default network and frequency bank on a named problem, batch norm off,
/// same seed for bank and weights. `coordinate` swaps in the 4x20
/// raw-coordinate net.
pub fn problem_run(
    name: &str,
    target: f64,
    l_min: f64,
    l_max: f64,
    seed: u64,
    coordinate: bool,
) -> (fourier_topo::fea::GridMesh, fourier_topo::opt::RunOutcome) {
    use fourier_topo::opt::{run, OptConfig};
    use fourier_topo::problems::{make_problem, ProblemOverrides};
    let overrides = ProblemOverrides {
        target_fraction: Some(target),
        l_min: Some(l_min),
        l_max: Some(l_max),
        ..ProblemOverrides::default()
    };
    let (spec, mesh) = make_problem(name, &overrides).unwrap();
    let (arch, input) = if coordinate {
        (NetArch::coordinate(2, 20, 4, 1).without_batch_norm(), FieldInput::coordinates())
    } else {
        (NetArch::fourier(150, 20, 1, 1).without_batch_norm(), fourier_input(l_min, l_max, 150, seed))
    };
    let net = Network::init(arch, seed).unwrap();
    let cfg = OptConfig {
        target_fraction: target,
        seed,
        ..OptConfig::default()
    };
    let out = run(
        mesh.clone(),
        net,
        input.with_extrude(spec.extrude),
        Constraint::Volume { fraction: target },
        cfg,
    )
    .unwrap();
    (mesh, out)
}
