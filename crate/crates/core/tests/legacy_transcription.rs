//! The legacy 1D bar system against a line-by-line transcription of the
//! reference MATLAB script, written with plain vectors.
//!
//! The 3×3 moment matrices in global coordinates have rcond down to ~1e-15,
//! so two different inverse routines legitimately disagree far above 1e-12.
//! The exact comparison therefore feeds the transcription the library's own
//! LU inverse; an independent Gauss-Jordan inverse is held to a bound set
//! by that conditioning.

use meshfree::assembly::{apply_dirichlet, apply_neumann_1d, assemble_bar_1d, Dirichlet, Material, Neumann1d, Stabilization};
use meshfree::cloud::generate_grid_1d;
use meshfree::linalg::DenseLu;
use meshfree::solve::solve_dense;
use meshfree::Discretization;

const E: f64 = 2e5;

fn inv3(a: [[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let mut m = [[0.0; 6]; 3];
    for i in 0..3 {
        m[i][..3].copy_from_slice(&a[i]);
        m[i][3 + i] = 1.0;
    }
    for k in 0..3 {
        let p = (k..3).max_by(|&x, &y| m[x][k].abs().total_cmp(&m[y][k].abs())).unwrap();
        m.swap(k, p);
        let d = m[k][k];
        for v in m[k].iter_mut() {
            *v /= d;
        }
        for i in 0..3 {
            if i != k {
                let f = m[i][k];
                for j in 0..6 {
                    m[i][j] -= f * m[k][j];
                }
            }
        }
    }
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        out[i].copy_from_slice(&m[i][3..]);
    }
    out
}

fn lu_inv3(a: [[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let m = faer::Mat::<f64>::from_fn(3, 3, |i, j| a[i][j]);
    let inv = DenseLu::factor(m.as_ref()).inverse();
    std::array::from_fn(|i| std::array::from_fn(|j| inv[(i, j)]))
}

type Inverse = fn([[f64; 3]; 3]) -> [[f64; 3]; 3];

/// `(NODE[..n], rmax, inv(A)*B, x of the last support node)` at node `m`.
fn local(gnode: &[f64], m: usize, n: usize, inv: Inverse) -> (Vec<usize>, f64, Vec<[f64; 3]>, f64) {
    let dist: Vec<f64> = gnode.iter().map(|g| ((g - gnode[m]).powi(2)).sqrt()).collect();
    let mut node: Vec<usize> = (0..gnode.len()).collect();
    node.sort_by(|&a, &b| dist[a].total_cmp(&dist[b]).then(a.cmp(&b)));
    let distn: Vec<f64> = node.iter().map(|&v| dist[v]).collect();
    let rmax = distn[n - 1];
    let rm = 2.0 * rmax;
    let c = 0.25 * rmax;
    let tail = (-(rm * rm) / (c * c)).exp();
    let weights: Vec<f64> = distn.iter().map(|d| ((-(d * d)) / (c * c)).exp() - tail).map(|v| v / (1.0 - tail)).collect();
    let mut a = [[0.0; 3]; 3];
    let mut b = vec![[0.0; 3]; n];
    let mut x = 0.0;
    for o in 0..n {
        x = gnode[node[o]];
        let p = [1.0, x, x * x];
        for i in 0..3 {
            for j in 0..3 {
                a[i][j] += weights[o] * (p[i] * p[j]);
            }
            b[o][i] = weights[o] * p[i];
        }
    }
    let ai = inv(a);
    let x_b: Vec<[f64; 3]> = b
        .iter()
        .map(|col| {
            let mut r = [0.0; 3];
            for i in 0..3 {
                r[i] = ai[i][0] * col[0] + ai[i][1] * col[1] + ai[i][2] * col[2];
            }
            r
        })
        .collect();
    (node[..n].to_vec(), rmax, x_b, x)
}

fn transcription(n: usize, inv: Inverse) -> (Vec<Vec<f64>>, Vec<f64>) {
    let gnode: Vec<f64> = (0..100).map(|i| i as f64).collect();
    let mut k = vec![vec![0.0; 100]; 100];
    let mut f = vec![0.0; 100];
    for m in 0..100 {
        let (node, _, xb, _) = local(&gnode, m, n, inv);
        for q in 0..n {
            let d2 = 0.0 * xb[q][0] + 0.0 * xb[q][1] + 2.0 * xb[q][2];
            k[m][node[q]] = E * d2;
        }
    }
    k[0] = vec![0.0; 100];
    k[0][0] = 1.0;
    let m = 99;
    let (node, rmax, xb, x) = local(&gnode, m, n, inv);
    for q in 0..n {
        let d1 = 0.0 * xb[q][0] + 1.0 * xb[q][1] + (2.0 * x) * xb[q][2];
        k[m][node[q]] = k[m][node[q]] * (-0.5) * rmax;
        k[m][node[q]] += E * d1;
    }
    f[m] = 50.0;
    (k, f)
}

fn library_system(n: usize) -> meshfree::assembly::LinearSystem {
    let cloud = generate_grid_1d(99.0, 100).unwrap();
    let material = Material::new(E, 0.0).unwrap();
    let disc = Discretization::legacy(n);
    let mut sys = assemble_bar_1d(&cloud, &material, &disc).unwrap();
    let load = Neumann1d { node: 99, load: 50.0, area: 1.0, stabilization: Stabilization::SupportRadius };
    apply_neumann_1d(&mut sys, &cloud, &disc, &material, &load).unwrap();
    apply_dirichlet(&mut sys, &[Dirichlet { node: 0, axis: 0, value: 0.0 }]).unwrap();
    sys
}

/// Largest entry difference relative to the row's largest entry.
fn row_relative_difference(sys: &meshfree::assembly::LinearSystem, kt: &[Vec<f64>]) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..100 {
        let scale = kt[i].iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for j in 0..100 {
            let (a, b) = (sys.k[(i, j)], kt[i][j]);
            assert_eq!(a == 0.0, b == 0.0, "sparsity differs at ({i}, {j})");
            worst = worst.max((a - b).abs() / scale);
        }
    }
    worst
}

#[test]
fn legacy_bar_matches_transcription() {
    let n = 20;
    let sys = library_system(n);
    let (kt, ft) = transcription(n, lu_inv3);
    assert_eq!(sys.f, ft);
    let worst = row_relative_difference(&sys, &kt);
    assert!(worst <= 1e-12, "largest row-relative difference {worst:e}");

    let u = solve_dense(&sys).unwrap().u;
    assert!((u[99] - 0.0248).abs() <= 5e-4, "{}", u[99]);
}

#[test]
fn independent_inverse_agrees_to_conditioning() {
    let n = 20;
    let sys = library_system(n);
    let (kt, ft) = transcription(n, inv3);
    assert_eq!(sys.f, ft);
    // eps / rcond with rcond ≈ 4e-15 allows ~5e-2; observed is far smaller.
    let worst = row_relative_difference(&sys, &kt);
    assert!(worst <= 1e-6, "largest row-relative difference {worst:e}");
}
