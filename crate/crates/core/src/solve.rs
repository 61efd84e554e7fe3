//! Direct solution of the collocation system with conditioning diagnostics.

use faer::MatRef;
use log::warn;

use crate::assembly::LinearSystem;
use crate::error::{Error, Result};
use crate::linalg::{one_norm, DenseLu};

/// Displacements and solve diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    /// Nodal displacements (mm), one entry per dof.
    pub u: Vec<f64>,
    pub global_rcond: f64,
    /// `‖K u − F‖₂`.
    pub residual_norm: f64,
    pub pivot_warnings: Vec<String>,
}

/// Solve `K u = F` by LU with partial pivoting.
///
/// An exactly zero pivot is an error. Ill-conditioned systems are still
/// solved; the rcond estimate and a warning record the fact.
pub fn solve_dense(system: &LinearSystem) -> Result<Solution> {
    solve_matrix(system.k.as_ref(), &system.f)
}

/// [`solve_dense`] on a bare matrix and right-hand side.
pub fn solve_matrix(k: MatRef<'_, f64>, f: &[f64]) -> Result<Solution> {
    let n = f.len();
    if k.nrows() != n || k.ncols() != n {
        return Err(Error::InvalidDiscretization(format!(
            "system is {}x{} with {n} right-hand-side entries",
            k.nrows(),
            k.ncols()
        )));
    }
    let lu = DenseLu::factor(k);
    if let Some(column) = lu.zero_pivot() {
        return Err(Error::SingularSystem { column });
    }
    let global_rcond = lu.rcond();
    let mut pivot_warnings = Vec::new();
    if global_rcond < f64::EPSILON {
        let msg = format!("global rcond {global_rcond:e} is below machine epsilon; the solution is unreliable");
        warn!("{msg}");
        pivot_warnings.push(msg);
    }
    let mut u = f.to_vec();
    lu.solve_in_place(&mut u);
    if u.iter().any(|v| !v.is_finite()) {
        pivot_warnings.push("solution contains non-finite entries".into());
    }
    let residual_norm = residual(k, &u, f);
    Ok(Solution {
        u,
        global_rcond,
        residual_norm,
        pivot_warnings,
    })
}

/// `‖K u − F‖₂`.
pub fn residual(k: MatRef<'_, f64>, u: &[f64], f: &[f64]) -> f64 {
    let mut r: Vec<f64> = f.iter().map(|v| -v).collect();
    for (j, &uj) in u.iter().enumerate() {
        if uj == 0.0 {
            continue;
        }
        let col = k.col(j);
        for (i, ri) in r.iter_mut().enumerate() {
            *ri += col[i] * uj;
        }
    }
    r.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Reciprocal 1-norm condition estimate of `K`, 0 when singular.
pub fn rcond_estimate(k: MatRef<'_, f64>) -> f64 {
    DenseLu::factor(k).rcond()
}

/// `‖K‖₁`, exposed for backward-error checks.
pub fn norm1(k: MatRef<'_, f64>) -> f64 {
    one_norm(k)
}
