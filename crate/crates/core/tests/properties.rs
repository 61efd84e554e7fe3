use faer::Mat;
use proptest::prelude::*;

use meshfree::assembly::{
    apply_dirichlet, apply_neumann_1d, assemble_bar_1d, assemble_navier_3d, Dirichlet, Material, Neumann1d,
    Stabilization,
};
use meshfree::cloud::{generate_grid_1d, generate_grid_3d, neighbors};
use meshfree::solve::{norm1, solve_matrix};
use meshfree::Discretization;

fn row_linf(k: &Mat<f64>, i: usize) -> f64 {
    (0..k.ncols()).map(|j| k[(i, j)].abs()).sum()
}

fn diagonally_dominant(n: usize, seed: &[f64]) -> Mat<f64> {
    Mat::from_fn(n, n, |i, j| {
        let v = seed[(i * n + j) % seed.len()];
        if i == j {
            n as f64 + 1.0 + v.abs()
        } else {
            v
        }
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn row_permutation_leaves_solution_unchanged(
        n in 2usize..12,
        seed in prop::collection::vec(-1.0f64..1.0, 16..64),
        rhs in prop::collection::vec(-10.0f64..10.0, 12),
        shift in 1usize..11,
    ) {
        let k = diagonally_dominant(n, &seed);
        let f = &rhs[..n];
        let base = solve_matrix(k.as_ref(), f).unwrap();
        prop_assume!(base.global_rcond > 1e-8);
        let perm: Vec<usize> = (0..n).map(|i| (i + shift) % n).collect();
        let kp = Mat::from_fn(n, n, |i, j| k[(perm[i], j)]);
        let fp: Vec<f64> = perm.iter().map(|&p| f[p]).collect();
        let permuted = solve_matrix(kp.as_ref(), &fp).unwrap();
        let scale = base.u.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
        for (a, b) in base.u.iter().zip(&permuted.u) {
            prop_assert!((a - b).abs() <= 1e-10 * scale);
        }
    }

    #[test]
    fn backward_error_is_small(
        n in 2usize..20,
        seed in prop::collection::vec(-1.0f64..1.0, 16..64),
        rhs in prop::collection::vec(-10.0f64..10.0, 20),
    ) {
        let k = diagonally_dominant(n, &seed);
        let f = &rhs[..n];
        let s = solve_matrix(k.as_ref(), f).unwrap();
        prop_assume!(s.global_rcond > 1e-8);
        let u2 = s.u.iter().map(|v| v * v).sum::<f64>().sqrt();
        let f2 = f.iter().map(|v| v * v).sum::<f64>().sqrt();
        prop_assert!(s.residual_norm >= 0.0);
        prop_assert!(s.residual_norm <= 1e-8 * (norm1(k.as_ref()) * u2 + f2));
    }

    #[test]
    fn bar_assembly_annihilates_linear_fields(
        nodes in 20usize..80,
        length in 5.0f64..200.0,
        n in 3usize..15,
        a in -1.0f64..1.0,
        b in -1.0f64..1.0,
    ) {
        let cloud = generate_grid_1d(length, nodes).unwrap();
        let sys = assemble_bar_1d(&cloud, &Material::new(2e5, 0.0).unwrap(), &Discretization::corrected(n)).unwrap();
        let u: Vec<f64> = cloud.points().iter().map(|p| a + b * p[0]).collect();
        let unorm = u.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for (i, r) in sys.apply(&u).iter().enumerate() {
            prop_assert!(r.abs() <= 1e-8 * row_linf(&sys.k, i) * unorm);
        }
    }

    #[test]
    fn bar_rows_touch_only_their_support(nodes in 10usize..60, n in 3usize..10) {
        let cloud = generate_grid_1d(nodes as f64 - 1.0, nodes).unwrap();
        let sys = assemble_bar_1d(&cloud, &Material::new(2e5, 0.0).unwrap(), &Discretization::corrected(n)).unwrap();
        for m in 0..nodes {
            let support = neighbors(&cloud, m, n).unwrap().neighbors;
            for j in 0..nodes {
                if sys.k[(m, j)] != 0.0 {
                    prop_assert!(support.contains(&j));
                }
            }
        }
    }

    #[test]
    fn dirichlet_is_idempotent(
        picks in prop::collection::vec((0usize..50, -1.0f64..1.0), 1..6),
    ) {
        let cloud = generate_grid_1d(49.0, 50).unwrap();
        let mut sys = assemble_bar_1d(&cloud, &Material::new(2e5, 0.0).unwrap(), &Discretization::corrected(5)).unwrap();
        let mut entries: Vec<Dirichlet> = Vec::new();
        for (node, value) in picks {
            if !entries.iter().any(|e| e.node == node) {
                entries.push(Dirichlet { node, axis: 0, value });
            }
        }
        apply_dirichlet(&mut sys, &entries).unwrap();
        let (k, f) = (sys.k.clone(), sys.f.clone());
        apply_dirichlet(&mut sys, &entries).unwrap();
        prop_assert_eq!(k, sys.k.clone());
        prop_assert_eq!(f, sys.f.clone());
        for e in &entries {
            prop_assert_eq!(sys.f[e.node], e.value);
            prop_assert_eq!(row_linf(&sys.k, e.node), 1.0);
        }
    }

    #[test]
    fn stabilised_bar_row_identity(h in 0.01f64..30.0, n in 3usize..25) {
        let cloud = generate_grid_1d(99.0, 100).unwrap();
        let material = Material::new(2e5, 0.0).unwrap();
        let disc = Discretization::corrected(n);
        let interior = assemble_bar_1d(&cloud, &material, &disc).unwrap();
        let load = |stabilization| Neumann1d { node: 99, load: 50.0, area: 1.0, stabilization };
        let mut plain = interior.clone();
        apply_neumann_1d(&mut plain, &cloud, &disc, &material, &load(Stabilization::Off)).unwrap();
        let mut stab = interior.clone();
        apply_neumann_1d(&mut stab, &cloud, &disc, &material, &load(Stabilization::Length(h))).unwrap();
        let (s, p, i) = (stab.row(99), plain.row(99), interior.row(99));
        let scale = p.iter().chain(&i).fold(0.0f64, |m, v| m.max(v.abs())) * h.max(1.0);
        for j in 0..100 {
            prop_assert!((s[j] - (p[j] - 0.5 * h * i[j])).abs() <= 1e-12 * scale);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn navier_assembly_annihilates_linear_fields(
        grad in prop::collection::vec(-1e-2f64..1e-2, 9),
        shift in prop::collection::vec(-1.0f64..1.0, 3),
        n in 23usize..40,
    ) {
        let cloud = generate_grid_3d(4, 5, 6, 0.5, [0.0; 3]).unwrap();
        let sys = assemble_navier_3d(&cloud, &Material::new(2e5, 0.33).unwrap(), &Discretization::corrected(n)).unwrap();
        let mut u = vec![0.0; sys.dof_count()];
        for (m, p) in cloud.points().iter().enumerate() {
            for i in 0..3 {
                u[3 * m + i] = shift[i] + grad[3 * i] * p[0] + grad[3 * i + 1] * p[1] + grad[3 * i + 2] * p[2];
            }
        }
        let unorm = u.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for (i, r) in sys.apply(&u).iter().enumerate() {
            prop_assert!(r.abs() <= 1e-8 * row_linf(&sys.k, i) * unorm);
        }
    }
}

#[test]
fn navier_rows_touch_only_their_support() {
    let cloud = generate_grid_3d(3, 3, 8, 1.0, [0.0; 3]).unwrap();
    let n = 27;
    let sys = assemble_navier_3d(&cloud, &Material::new(2e5, 0.33).unwrap(), &Discretization::corrected(n)).unwrap();
    for m in 0..cloud.len() {
        let support = neighbors(&cloud, m, n).unwrap().neighbors;
        for r in 3 * m..3 * m + 3 {
            for j in 0..sys.dof_count() {
                if sys.k[(r, j)] != 0.0 {
                    assert!(support.contains(&(j / 3)), "row {r} col {j}");
                }
            }
        }
    }
}

#[test]
fn legacy_global_rcond_falls_with_large_supports() {
    let cloud = generate_grid_1d(99.0, 100).unwrap();
    let material = Material::new(2e5, 0.0).unwrap();
    let rcond = |n| {
        let disc = Discretization::legacy(n);
        let mut sys = assemble_bar_1d(&cloud, &material, &disc).unwrap();
        let load = Neumann1d { node: 99, load: 50.0, area: 1.0, stabilization: Stabilization::SupportRadius };
        apply_neumann_1d(&mut sys, &cloud, &disc, &material, &load).unwrap();
        apply_dirichlet(&mut sys, &[Dirichlet { node: 0, axis: 0, value: 0.0 }]).unwrap();
        meshfree::solve::rcond_estimate(sys.k.as_ref())
    };
    assert!(rcond(60) < rcond(20));
}
