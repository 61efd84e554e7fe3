use faer::Mat;

use super::{check_rcond, derivative_order, DerivativeStencil, LocalApproximation, LocalKind, MultiIndex};
use crate::cloud::{NodeCloud, Point, SupportDomain};
use crate::error::{Error, Result};
use crate::linalg::DenseLu;

/// Multiquadric `φ(r) = √(r² + c²)` interpolation settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RbfParams {
    /// Shape parameter `c` in mm.
    pub shape: f64,
    /// Append a constant term (and its orthogonality row) to the interpolant.
    pub augmented: bool,
}

impl RbfParams {
    /// `c = alpha · spacing`.
    pub fn from_spacing(alpha: f64, spacing: f64) -> Self {
        Self {
            shape: alpha * spacing,
            augmented: false,
        }
    }
}

/// Radial interpolation on the support, factorised for derivative rows.
pub fn rpcm_local(
    support: SupportDomain,
    cloud: &NodeCloud,
    params: &RbfParams,
    rcond_floor: Option<f64>,
) -> Result<LocalApproximation> {
    if !(params.shape >= 0.0) || !params.shape.is_finite() {
        return Err(Error::InvalidKernel(format!(
            "multiquadric shape parameter must be non-negative, got {}",
            params.shape
        )));
    }
    let n = support.len();
    if n < 2 {
        return Err(Error::UnderdeterminedSupport { nodes: n, terms: 2 });
    }
    let dim = cloud.dimension();
    let size = if params.augmented { n + 1 } else { n };
    let c2 = params.shape * params.shape;
    let mut phi = Mat::<f64>::zeros(size, size);
    for (i, &a) in support.neighbors.iter().enumerate() {
        for (j, &b) in support.neighbors.iter().enumerate() {
            let r = cloud.distance(a, b);
            phi[(i, j)] = (r * r + c2).sqrt();
        }
        if params.augmented {
            phi[(i, n)] = 1.0;
            phi[(n, i)] = 1.0;
        }
    }
    let lu = DenseLu::factor(phi.as_ref());
    let rcond = lu.rcond();
    check_rcond(rcond, lu.is_singular(), rcond_floor)?;
    let inverse = lu.inverse();
    let operator = Mat::<f64>::from_fn(size, n, |i, q| inverse[(i, q)]);

    let star = cloud.point(support.star);
    let offsets: Vec<Point> = support
        .neighbors
        .iter()
        .map(|&v| {
            let p = cloud.point(v);
            [star[0] - p[0], star[1] - p[1], star[2] - p[2]]
        })
        .collect();
    Ok(LocalApproximation {
        support,
        rcond,
        kind: LocalKind::Radial {
            dimension: dim,
            offsets,
            shape: params.shape,
            augmented: params.augmented,
            operator,
        },
    })
}

/// RPCM derivative row `dᵀ Φ⁻¹` at the star node.
pub fn rpcm_stencil(
    support: SupportDomain,
    cloud: &NodeCloud,
    params: &RbfParams,
    derivative: MultiIndex,
) -> Result<DerivativeStencil> {
    let star = support.star;
    rpcm_local(support, cloud, params, None)
        .and_then(|local| local.stencil(derivative))
        .map_err(|e| e.at_node(star))
}

/// `∂^d φ(‖x − x_j‖)` with respect to `x`, where `offset = x − x_j`.
pub(crate) fn multiquadric_derivative(
    offset: &Point,
    shape: f64,
    d: MultiIndex,
    dimension: usize,
) -> Result<f64> {
    if d[dimension..].iter().any(|&k| k != 0) {
        return Ok(0.0);
    }
    let r2: f64 = offset[..dimension].iter().map(|v| v * v).sum();
    let s = (r2 + shape * shape).sqrt();
    let order = derivative_order(d);
    if order == 0 {
        return Ok(s);
    }
    if s == 0.0 {
        return Err(Error::InvalidKernel(
            "multiquadric derivative undefined at r = 0 with zero shape parameter".into(),
        ));
    }
    let axes: Vec<usize> = (0..3)
        .flat_map(|k| std::iter::repeat_n(k, d[k] as usize))
        .collect();
    match order {
        1 => Ok(offset[axes[0]] / s),
        2 => {
            let (k, l) = (axes[0], axes[1]);
            let delta = if k == l { 1.0 } else { 0.0 };
            Ok(delta / s - offset[k] * offset[l] / (s * s * s))
        }
        _ => Err(Error::UnsupportedDerivative(d)),
    }
}
