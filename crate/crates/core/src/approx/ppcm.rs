use faer::Mat;

use super::{check_rcond, in_frame, Basis, CoordinateFrame, DerivativeStencil, LocalApproximation, LocalKind, MultiIndex};
use crate::cloud::{rank_by_distance, NodeCloud, SupportDomain};
use crate::error::{Error, Result};
use crate::linalg::DenseLu;

/// Relative residual below which a candidate node adds no new information to
/// the interpolation rows already chosen.
const DEPENDENCE_TOL: f64 = 1e-8;

/// Nearest nodes to `star` whose basis rows are linearly independent, exactly
/// `basis.len()` of them.
///
/// On structured grids the plain nearest-`m` set is often not unisolvent
/// (e.g. in 3D the first edge neighbours all share a plane), so candidates
/// are taken in distance order and skipped when their row lies in the span
/// of the rows already accepted.
pub fn unisolvent_support(cloud: &NodeCloud, star: usize, basis: &Basis) -> Result<SupportDomain> {
    let m = basis.len();
    if cloud.len() < m {
        return Err(Error::InsufficientNodes {
            requested: m,
            available: cloud.len(),
        });
    }
    let origin = cloud.point(star);
    let scale = cloud.spacing().max(f64::MIN_POSITIVE);
    let mut accepted: Vec<usize> = Vec::with_capacity(m);
    let mut orthonormal: Vec<Vec<f64>> = Vec::with_capacity(m);
    for (node, _) in rank_by_distance(cloud, star) {
        let p = cloud.point(node);
        let local = [
            (p[0] - origin[0]) / scale,
            (p[1] - origin[1]) / scale,
            (p[2] - origin[2]) / scale,
        ];
        let row = basis.eval(&local);
        let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
        let mut residual = row;
        // Two Gram-Schmidt passes keep the orthogonalisation honest.
        for _ in 0..2 {
            for q in &orthonormal {
                let proj: f64 = residual.iter().zip(q).map(|(a, b)| a * b).sum();
                for (r, qv) in residual.iter_mut().zip(q) {
                    *r -= proj * qv;
                }
            }
        }
        let rnorm = residual.iter().map(|v| v * v).sum::<f64>().sqrt();
        if rnorm > DEPENDENCE_TOL * norm {
            orthonormal.push(residual.iter().map(|v| v / rnorm).collect());
            accepted.push(node);
            if accepted.len() == m {
                return SupportDomain::from_subset(cloud, star, accepted);
            }
        }
    }
    Err(Error::StencilSingular {
        node: Some(star),
        rcond: 0.0,
    })
}

/// Square polynomial interpolation on exactly `basis.len()` support nodes.
pub fn ppcm_local(
    support: SupportDomain,
    cloud: &NodeCloud,
    basis: &Basis,
    frame: CoordinateFrame,
    rcond_floor: Option<f64>,
) -> Result<LocalApproximation> {
    let m = basis.len();
    if support.len() != m {
        return Err(Error::InvalidDiscretization(format!(
            "PPCM interpolation needs exactly {m} support nodes, got {}",
            support.len()
        )));
    }
    let star = cloud.point(support.star);
    let mut vandermonde = Mat::<f64>::zeros(m, m);
    for (o, &node) in support.neighbors.iter().enumerate() {
        let p = basis.eval(&in_frame(cloud.point(node), star, frame));
        for (j, v) in p.into_iter().enumerate() {
            vandermonde[(o, j)] = v;
        }
    }
    let lu = DenseLu::factor(vandermonde.as_ref());
    let rcond = lu.rcond();
    check_rcond(rcond, lu.is_singular(), rcond_floor)?;
    let operator = lu.inverse();
    let eval_point = in_frame(star, star, frame);
    Ok(LocalApproximation {
        support,
        rcond,
        kind: LocalKind::Polynomial {
            basis: basis.clone(),
            eval_point,
            operator,
        },
    })
}

/// PPCM derivative row `dᵀ P⁻¹` at the star node.
pub fn ppcm_stencil(
    support: SupportDomain,
    cloud: &NodeCloud,
    basis: &Basis,
    derivative: MultiIndex,
) -> Result<DerivativeStencil> {
    let star = support.star;
    ppcm_local(support, cloud, basis, CoordinateFrame::Centered, None)
        .and_then(|local| local.stencil(derivative))
        .map_err(|e| e.at_node(star))
}
