//! Closed-form reference solutions and profile error metrics.

use crate::error::{Error, Result};

/// Axial displacement of a bar fixed at `x = 0` under an end load `F`:
/// `u(x) = F x / (E A)`.
pub fn bar_axial(x: f64, force: f64, e: f64, area: f64) -> f64 {
    force * x / (e * area)
}

/// Euler–Bernoulli deflection of a cantilever clamped at `x = 0` with an end
/// force `F` at `x = L`: `v(x) = F x² (3L − x) / (6 E I)`.
pub fn cantilever_end_force(x: f64, force: f64, e: f64, inertia: f64, length: f64) -> f64 {
    force * x * x * (3.0 * length - x) / (6.0 * e * inertia)
}

/// End-loaded cantilever shape scaled so that `v(L) = delta`.
pub fn cantilever_prescribed_tip(x: f64, delta: f64, length: f64) -> f64 {
    delta * x * x * (3.0 * length - x) / (2.0 * length * length * length)
}

/// Second moment of area of a `width × height` rectangle about its
/// horizontal centroidal axis.
pub fn rectangle_inertia(width: f64, height: f64) -> f64 {
    width * height * height * height / 12.0
}

/// Displacement samples along a line.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Profile {
    /// Sample positions (mm).
    pub positions: Vec<f64>,
    /// Displacements (mm).
    pub values: Vec<f64>,
}

impl Profile {
    pub fn new(positions: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if positions.len() != values.len() {
            return Err(Error::MismatchedSampling(format!(
                "{} positions for {} values",
                positions.len(),
                values.len()
            )));
        }
        Ok(Self { positions, values })
    }

    /// Evaluate `f` at each position.
    pub fn sample(positions: Vec<f64>, f: impl Fn(f64) -> f64) -> Self {
        let values = positions.iter().map(|&x| f(x)).collect();
        Self { positions, values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Deviation of a computed profile from its reference.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorReport {
    pub rel_l2: f64,
    /// mm.
    pub max_abs: f64,
    /// `(position, computed, reference)` per sample.
    pub profile: Vec<(f64, f64, f64)>,
    /// Sign changes in the successive differences of `computed − reference`.
    pub oscillation_count: usize,
}

/// Compare profiles sampled at the same positions.
pub fn compare(computed: &Profile, reference: &Profile) -> Result<ErrorReport> {
    if computed.len() != reference.len() {
        return Err(Error::MismatchedSampling(format!(
            "{} computed samples against {} reference samples",
            computed.len(),
            reference.len()
        )));
    }
    for (i, (a, b)) in computed.positions.iter().zip(&reference.positions).enumerate() {
        if (a - b).abs() > 1e-9 * a.abs().max(b.abs()).max(1.0) {
            return Err(Error::MismatchedSampling(format!("sample {i} at {a} vs {b}")));
        }
    }
    let diff: Vec<f64> = computed.values.iter().zip(&reference.values).map(|(c, r)| c - r).collect();
    let err_norm = diff.iter().map(|d| d * d).sum::<f64>().sqrt();
    let ref_norm = reference.values.iter().map(|r| r * r).sum::<f64>().sqrt();
    let rel_l2 = if ref_norm > 0.0 {
        err_norm / ref_norm
    } else if err_norm == 0.0 {
        0.0
    } else {
        f64::INFINITY
    };
    let max_abs = diff.iter().fold(0.0f64, |m, d| m.max(d.abs()));
    let profile = computed
        .positions
        .iter()
        .zip(&computed.values)
        .zip(&reference.values)
        .map(|((&x, &c), &r)| (x, c, r))
        .collect();
    Ok(ErrorReport {
        rel_l2,
        max_abs,
        profile,
        oscillation_count: sign_changes_of_increments(&diff),
    })
}

/// Number of sign changes in `v[i+1] − v[i]`; zero increments are skipped.
pub fn sign_changes_of_increments(v: &[f64]) -> usize {
    let mut count = 0;
    let mut last = 0.0f64;
    for w in v.windows(2) {
        let d = w[1] - w[0];
        if d == 0.0 || d.is_nan() {
            continue;
        }
        if last != 0.0 && d.signum() != last.signum() {
            count += 1;
        }
        last = d;
    }
    count
}
