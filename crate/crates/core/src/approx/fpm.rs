use faer::Mat;

use super::{
    check_rcond, in_frame, Basis, CoordinateFrame, DerivativeStencil, EvalMode, FpmOptions,
    LocalApproximation, LocalKind, MultiIndex, Weighting,
};
use crate::cloud::{NodeCloud, SupportDomain};
use crate::error::{Error, Result};
use crate::linalg::DenseLu;

/// Weighted moment matrix `A = Σ w P Pᵀ` and weighted basis matrix
/// `B = [w₁P₁ … wₙPₙ]` of one support domain.
#[derive(Debug, Clone)]
pub struct MomentSystem {
    pub a: Mat<f64>,
    pub b: Mat<f64>,
    pub weights: Vec<f64>,
}

/// Assemble the moment system, accumulating `A` node by node in support order.
///
/// Any non-empty support is accepted; whether `A` is invertible is decided
/// when the approximation is factorised.
pub fn build_moment_system(
    support: &SupportDomain,
    cloud: &NodeCloud,
    basis: &Basis,
    weighting: &Weighting,
    frame: CoordinateFrame,
) -> Result<MomentSystem> {
    let (m, n) = (basis.len(), support.len());
    if n == 0 {
        return Err(Error::UnderdeterminedSupport { nodes: 0, terms: m });
    }
    let weights: Vec<f64> = match weighting {
        Weighting::Gaussian(params) => {
            params.validate()?;
            support
                .distances
                .iter()
                .map(|&d| super::weight(d, support.rmax, params))
                .collect::<Result<_>>()?
        }
        Weighting::Uniform => vec![1.0; n],
    };
    let star = cloud.point(support.star);
    let mut a = Mat::<f64>::zeros(m, m);
    let mut b = Mat::<f64>::zeros(m, n);
    for (o, &node) in support.neighbors.iter().enumerate() {
        let p = basis.eval(&in_frame(cloud.point(node), star, frame));
        let w = weights[o];
        for i in 0..m {
            for j in 0..m {
                a[(i, j)] += w * (p[i] * p[j]);
            }
            b[(i, o)] = w * p[i];
        }
    }
    Ok(MomentSystem { a, b, weights })
}

/// Reciprocal 1-norm condition estimate of the moment matrix (0 if singular).
pub fn moment_rcond(system: &MomentSystem) -> f64 {
    DenseLu::factor(system.a.as_ref()).rcond()
}

/// Factorise the weighted least squares fit on `support`.
///
/// The operator `A⁻¹B` is formed with an explicit inverse, mirroring the
/// reference scripts.
pub fn fpm_local(
    support: SupportDomain,
    cloud: &NodeCloud,
    basis: &Basis,
    opts: &FpmOptions,
) -> Result<LocalApproximation> {
    if support.len() < basis.len() {
        return Err(Error::UnderdeterminedSupport {
            nodes: support.len(),
            terms: basis.len(),
        });
    }
    if matches!(opts.weighting, Weighting::Gaussian(_)) && support.is_degenerate() {
        return Err(Error::DegenerateSupport { rmax: support.rmax });
    }
    let system = build_moment_system(&support, cloud, basis, &opts.weighting, opts.frame)?;
    let lu = DenseLu::factor(system.a.as_ref());
    let rcond = lu.rcond();
    check_rcond(rcond, lu.is_singular(), opts.rcond_floor)?;

    let inv = lu.inverse();
    let (m, n) = (basis.len(), support.len());
    let mut operator = Mat::<f64>::zeros(m, n);
    for i in 0..m {
        for q in 0..n {
            let mut s = 0.0;
            for k in 0..m {
                s += inv[(i, k)] * system.b[(k, q)];
            }
            operator[(i, q)] = s;
        }
    }

    let star = cloud.point(support.star);
    let eval_node = match opts.eval_mode {
        EvalMode::Star => support.star,
        EvalMode::LegacyLast => *support.neighbors.last().expect("non-empty support"),
    };
    let eval_point = in_frame(cloud.point(eval_node), star, opts.frame);
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

/// FPM derivative row `dᵀ A⁻¹ B` at the star node.
pub fn fpm_stencil(
    support: SupportDomain,
    cloud: &NodeCloud,
    basis: &Basis,
    opts: &FpmOptions,
    derivative: MultiIndex,
) -> Result<DerivativeStencil> {
    let star = support.star;
    fpm_local(support, cloud, basis, opts)
        .and_then(|local| local.stencil(derivative))
        .map_err(|e| e.at_node(star))
}
