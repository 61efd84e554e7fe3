use std::f64::consts::PI;

use super::{derivative_order, DerivativeStencil, LocalApproximation, LocalKind, MultiIndex};
use crate::cloud::{NodeCloud, Point, SupportDomain};
use crate::error::{Error, Result};

/// Cubic-spline kernel settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphParams {
    /// Smoothing length `h` in mm; the kernel support is `2h`.
    pub h: f64,
    /// Nodal volume (mm^dimension).
    pub volume: f64,
}

impl SphParams {
    /// `h = factor · spacing`, `V = spacing^dimension`.
    pub fn from_spacing(spacing: f64, factor: f64, dimension: usize) -> Self {
        Self {
            h: factor * spacing,
            volume: spacing.powi(dimension as i32),
        }
    }
}

/// Kernel value and its first two radial derivatives `(W, dW/dr, d²W/dr²)`.
pub fn cubic_spline(r: f64, h: f64, dimension: usize) -> (f64, f64, f64) {
    let sigma = match dimension {
        1 => 2.0 / (3.0 * h),
        2 => 10.0 / (7.0 * PI * h * h),
        _ => 1.0 / (PI * h * h * h),
    };
    let q = r / h;
    let (f, df, d2f) = if q < 1.0 {
        (
            1.0 - 1.5 * q * q + 0.75 * q * q * q,
            -3.0 * q + 2.25 * q * q,
            -3.0 + 4.5 * q,
        )
    } else if q < 2.0 {
        let t = 2.0 - q;
        (0.25 * t * t * t, -0.75 * t * t, 1.5 * t)
    } else {
        (0.0, 0.0, 0.0)
    };
    (sigma * f, sigma * df / h, sigma * d2f / (h * h))
}

/// `∂^d W(x_star − x_o)` with respect to the star position.
pub(crate) fn kernel_derivative(offset: &Point, h: f64, d: MultiIndex, dimension: usize) -> Result<f64> {
    if d[dimension..].iter().any(|&k| k != 0) {
        return Ok(0.0);
    }
    let r = offset[..dimension].iter().map(|v| v * v).sum::<f64>().sqrt();
    let (w, dw, d2w) = cubic_spline(r, h, dimension);
    let axes: Vec<usize> = (0..3)
        .flat_map(|k| std::iter::repeat_n(k, d[k] as usize))
        .collect();
    match derivative_order(d) {
        0 => Ok(w),
        1 => Ok(if r > 0.0 { dw * offset[axes[0]] / r } else { 0.0 }),
        2 => {
            let (k, l) = (axes[0], axes[1]);
            let delta = if k == l { 1.0 } else { 0.0 };
            if r > 0.0 {
                let (ek, el) = (offset[k] / r, offset[l] / r);
                Ok(d2w * ek * el + dw / r * (delta - ek * el))
            } else {
                // dW/dr / r and d²W/dr² share the same limit at r = 0.
                Ok(delta * d2w)
            }
        }
        _ => Err(Error::UnsupportedDerivative(d)),
    }
}

/// Kernel-sum approximation on the support (no consistency correction).
pub fn sph_local(support: SupportDomain, cloud: &NodeCloud, params: &SphParams) -> Result<LocalApproximation> {
    if !(params.h > 0.0) || !params.h.is_finite() {
        return Err(Error::InvalidKernel(format!(
            "smoothing length must be positive, got {}",
            params.h
        )));
    }
    if !(params.volume > 0.0) {
        return Err(Error::InvalidKernel(format!(
            "nodal volume must be positive, got {}",
            params.volume
        )));
    }
    let star = cloud.point(support.star);
    let offsets = support
        .neighbors
        .iter()
        .map(|&v| {
            let p = cloud.point(v);
            [star[0] - p[0], star[1] - p[1], star[2] - p[2]]
        })
        .collect();
    Ok(LocalApproximation {
        support,
        rcond: f64::NAN,
        kind: LocalKind::Kernel {
            dimension: cloud.dimension(),
            offsets,
            params: *params,
        },
    })
}

/// SPH derivative row `V_o ∂^d W(x_star − x_o)`.
pub fn sph_stencil(
    support: SupportDomain,
    cloud: &NodeCloud,
    params: &SphParams,
    derivative: MultiIndex,
) -> Result<DerivativeStencil> {
    let star = support.star;
    sph_local(support, cloud, params)
        .and_then(|local| local.stencil(derivative))
        .map_err(|e| e.at_node(star))
}
