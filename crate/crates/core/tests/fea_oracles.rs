mod common;

use common::{patch_test_error, quadrature_stiffness};
use fourier_topo::fea::{assemble_and_solve, ElementStiffness, GridMesh};

#[test]
fn element_matrix_matches_quadrature() {
    for (e, nu, h) in [(1.0, 0.3, 1.0), (2.5, 0.25, 0.5), (1.0, 0.0, 3.0)] {
        let closed = ElementStiffness::new(e, nu, h).unwrap().k;
        let quad = quadrature_stiffness(e, nu, h);
        let scale = quad.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
        for i in 0..8 {
            for j in 0..8 {
                assert!(
                    (closed[i][j] - quad[i][j]).abs() <= 1e-10 * scale,
                    "E={e} nu={nu} h={h} entry ({i},{j}): {} vs {}",
                    closed[i][j],
                    quad[i][j]
                );
            }
        }
    }
}

#[test]
fn uniform_tension_patch() {
    let err = patch_test_error();
    assert!(err <= 1e-9, "{err:e}");
}

fn dense_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).unwrap();
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    x
}

#[test]
fn single_element_matches_dense_lu() {
    let mut mesh = GridMesh::new(1, 1, 1.0).unwrap();
    for n in mesh.left_edge_nodes() {
        mesh.fix_node(n, true, true).unwrap();
    }
    let tr = mesh.node_index(1, 1);
    let br = mesh.node_index(1, 0);
    mesh.add_nodal_force(tr, 0.3, -1.0).unwrap();
    mesh.add_nodal_force(br, 0.0, -0.5).unwrap();
    let young = 1.7;
    let sol = assemble_and_solve(&mesh, &[young]).unwrap();

    let k = ElementStiffness::new(young, 0.3, 1.0).unwrap().k;
    let dofs = mesh.element_dofs(0);
    let free: Vec<usize> = (0..8).filter(|&i| !mesh.is_fixed(dofs[i])).collect();
    let a: Vec<Vec<f64>> = free.iter().map(|&i| free.iter().map(|&j| k[i][j]).collect()).collect();
    let b: Vec<f64> = free.iter().map(|&i| mesh.load_vector()[dofs[i]]).collect();
    let x = dense_solve(a, b);
    for (slot, &i) in free.iter().enumerate() {
        let got = sol.u[dofs[i]];
        assert!((got - x[slot]).abs() <= 1e-12 * x[slot].abs().max(1.0), "dof {}", dofs[i]);
    }
    for i in (0..8).filter(|&i| mesh.is_fixed(dofs[i])) {
        assert_eq!(sol.u[dofs[i]], 0.0);
    }
}

#[test]
fn missing_supports_are_reported() {
    let mut mesh = GridMesh::new(3, 2, 1.0).unwrap();
    mesh.add_nodal_force(mesh.node_index(3, 1), 0.0, -1.0).unwrap();
    let err = assemble_and_solve(&mesh, &[1.0; 6]).unwrap_err();
    assert!(err.to_string().contains("rigid"), "{err}");
}
