//! Local derivative stencils at a star node.
//!
//! Four approximations share one output type, [`DerivativeStencil`]: a row of
//! coefficients that maps nodal values on a support domain to a derivative at
//! the star node.
//!
//! * FPM: fixed weighted least squares over a polynomial basis,
//!   `coeffs = dᵀ A⁻¹ B` with `A = Σ w P Pᵀ`, `B = [w₁P₁ … wₙPₙ]`.
//! * PPCM: square polynomial interpolation, `coeffs = dᵀ P⁻¹`.
//! * RPCM: multiquadric radial interpolation, `coeffs = dᵀ Φ⁻¹`.
//! * SPH: uncorrected cubic-spline kernel sums.

mod fpm;
mod ppcm;
mod rbf;
mod sph;

use faer::Mat;

use crate::cloud::{self, NodeCloud, Point, SupportDomain};
use crate::error::{Error, Result};

pub use fpm::{build_moment_system, fpm_local, fpm_stencil, moment_rcond, MomentSystem};
pub use ppcm::{ppcm_local, ppcm_stencil, unisolvent_support};
pub use rbf::{rpcm_local, rpcm_stencil, RbfParams};
pub use sph::{cubic_spline, sph_local, sph_stencil, SphParams};

/// Derivative orders along x, y and z.
pub type MultiIndex = [u8; 3];

pub const VALUE: MultiIndex = [0, 0, 0];
pub const D_X: MultiIndex = [1, 0, 0];
pub const D_Y: MultiIndex = [0, 1, 0];
pub const D_Z: MultiIndex = [0, 0, 1];
pub const D_XX: MultiIndex = [2, 0, 0];
pub const D_YY: MultiIndex = [0, 2, 0];
pub const D_ZZ: MultiIndex = [0, 0, 2];
pub const D_XY: MultiIndex = [1, 1, 0];
pub const D_YZ: MultiIndex = [0, 1, 1];
pub const D_XZ: MultiIndex = [1, 0, 1];

pub fn derivative_order(d: MultiIndex) -> u32 {
    d.iter().map(|&k| k as u32).sum()
}

/// Rcond floor applied to local systems outside legacy mode.
pub const DEFAULT_RCOND_FLOOR: f64 = 1e-14;

/// Ordered monomial basis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Basis {
    dimension: usize,
    order: u8,
    terms: Vec<MultiIndex>,
}

impl Basis {
    /// Complete polynomial basis of the given total order.
    ///
    /// Up to order 2 the term order is fixed: `[1, x, x²]` in 1D and
    /// `[1, x, y, z, x², y², z², xy, yz, xz]` in 3D. Higher-order terms are
    /// appended degree by degree in lexicographic order.
    pub fn new(dimension: usize, order: u8) -> Result<Self> {
        if order == 0 {
            return Err(Error::InvalidDiscretization(
                "basis order must be at least 1".into(),
            ));
        }
        let terms = match dimension {
            1 => (0..=order).map(|p| [p, 0, 0]).collect(),
            3 => {
                let mut t = vec![VALUE, D_X, D_Y, D_Z];
                if order >= 2 {
                    t.extend([D_XX, D_YY, D_ZZ, D_XY, D_YZ, D_XZ]);
                }
                for deg in 3..=order {
                    for a in (0..=deg).rev() {
                        for b in (0..=deg - a).rev() {
                            t.push([a, b, deg - a - b]);
                        }
                    }
                }
                t
            }
            _ => {
                return Err(Error::InvalidDiscretization(format!(
                    "basis dimension must be 1 or 3, got {dimension}"
                )))
            }
        };
        Ok(Self {
            dimension,
            order,
            terms,
        })
    }

    pub fn quadratic(dimension: usize) -> Self {
        Self::new(dimension, 2).expect("dimension is 1 or 3")
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn order(&self) -> u8 {
        self.order
    }

    pub fn terms(&self) -> &[MultiIndex] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Monomial values at `p`.
    pub fn eval(&self, p: &Point) -> Vec<f64> {
        self.eval_derivative(p, VALUE)
    }

    /// Values of `∂^d` applied to each monomial, at `p`.
    pub fn eval_derivative(&self, p: &Point, d: MultiIndex) -> Vec<f64> {
        self.terms
            .iter()
            .map(|term| monomial_derivative(term, d, p))
            .collect()
    }
}

/// `∂^d (x^a y^b z^c)` evaluated at `p`.
pub fn monomial_derivative(term: &MultiIndex, d: MultiIndex, p: &Point) -> f64 {
    let mut value = 1.0;
    for k in 0..3 {
        let (e, n) = (term[k], d[k]);
        if n > e {
            return 0.0;
        }
        let mut factor = 1.0;
        for j in 0..n {
            factor *= (e - j) as f64;
        }
        if factor != 1.0 {
            value *= factor;
        }
        let rest = (e - n) as i32;
        if rest > 0 {
            value *= p[k].powi(rest);
        }
    }
    value
}

/// Shape of the fixed Gaussian weight: `rm = rm_factor·rmax`, `c = c_factor·rmax`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightParams {
    pub rm_factor: f64,
    pub c_factor: f64,
}

impl Default for WeightParams {
    fn default() -> Self {
        Self {
            rm_factor: 2.0,
            c_factor: 0.25,
        }
    }
}

impl WeightParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.rm_factor > 1.0) || !(self.c_factor > 0.0 && self.c_factor <= 1.0) {
            return Err(Error::InvalidDiscretization(format!(
                "weight parameters out of range: rm_factor={}, c_factor={}",
                self.rm_factor, self.c_factor
            )));
        }
        Ok(())
    }
}

/// Normalised truncated Gaussian
/// `w(d) = (exp(−d²/c²) − exp(−rm²/c²)) / (1 − exp(−rm²/c²))`.
pub fn weight(distance: f64, rmax: f64, params: &WeightParams) -> Result<f64> {
    if !(rmax > 0.0) {
        return Err(Error::DegenerateSupport { rmax });
    }
    let rm = params.rm_factor * rmax;
    let c = params.c_factor * rmax;
    let tail = (-(rm * rm) / (c * c)).exp();
    Ok(((-(distance * distance) / (c * c)).exp() - tail) / (1.0 - tail))
}

/// How support-node weights are chosen for FPM.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Weighting {
    Gaussian(WeightParams),
    /// Every support node weighted 1 (plain least squares).
    Uniform,
}

/// Coordinates fed to the polynomial basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoordinateFrame {
    /// Raw node coordinates, as in the reference scripts.
    Global,
    /// Coordinates relative to the star node.
    Centered,
}

/// Where the derivative of the basis is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalMode {
    Star,
    /// At the last (farthest) support node, reproducing the reference
    /// script's reuse of its loop variable.
    LegacyLast,
}

/// Options of the weighted least squares approximation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FpmOptions {
    pub weighting: Weighting,
    pub frame: CoordinateFrame,
    pub eval_mode: EvalMode,
    /// Reject local systems whose rcond falls below this. `None` inverts
    /// anything with nonzero pivots.
    pub rcond_floor: Option<f64>,
}

impl FpmOptions {
    pub fn legacy() -> Self {
        Self {
            weighting: Weighting::Gaussian(WeightParams::default()),
            frame: CoordinateFrame::Global,
            eval_mode: EvalMode::LegacyLast,
            rcond_floor: None,
        }
    }

    pub fn corrected() -> Self {
        Self {
            weighting: Weighting::Gaussian(WeightParams::default()),
            frame: CoordinateFrame::Centered,
            eval_mode: EvalMode::Star,
            rcond_floor: Some(DEFAULT_RCOND_FLOOR),
        }
    }
}

/// Coefficients mapping nodal values on a support to one derivative at the star.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivativeStencil {
    pub star: usize,
    pub neighbors: Vec<usize>,
    pub coeffs: Vec<f64>,
    pub derivative: MultiIndex,
    /// Reciprocal condition of the inverted local matrix; NaN when the
    /// scheme inverts nothing (SPH).
    pub moment_rcond: f64,
}

impl DerivativeStencil {
    /// Apply to a full nodal field indexed by global node number.
    pub fn apply(&self, field: &[f64]) -> f64 {
        self.neighbors
            .iter()
            .zip(&self.coeffs)
            .map(|(&v, c)| c * field[v])
            .sum()
    }

    pub fn coeff_sum(&self) -> f64 {
        self.coeffs.iter().sum()
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }
}

/// A factorised local approximation from which any derivative row follows.
#[derive(Debug, Clone)]
pub struct LocalApproximation {
    support: SupportDomain,
    rcond: f64,
    kind: LocalKind,
}

#[derive(Debug, Clone)]
enum LocalKind {
    /// `coeffs = ∂P(eval_point)ᵀ · operator`, with `operator` m × n.
    Polynomial {
        basis: Basis,
        eval_point: Point,
        operator: Mat<f64>,
    },
    /// `coeffs = ∂φ(star)ᵀ · operator`, with `operator` the first n
    /// columns of the (possibly augmented) interpolation inverse.
    Radial {
        dimension: usize,
        offsets: Vec<Point>,
        shape: f64,
        augmented: bool,
        operator: Mat<f64>,
    },
    /// Kernel sums over offsets `x_star − x_o`.
    Kernel {
        dimension: usize,
        offsets: Vec<Point>,
        params: SphParams,
    },
}

impl LocalApproximation {
    pub fn support(&self) -> &SupportDomain {
        &self.support
    }

    pub fn rcond(&self) -> f64 {
        self.rcond
    }

    /// Derivative row for `d` at the star node.
    pub fn stencil(&self, d: MultiIndex) -> Result<DerivativeStencil> {
        let n = self.support.len();
        let coeffs = match &self.kind {
            LocalKind::Polynomial {
                basis,
                eval_point,
                operator,
            } => {
                let dvec = basis.eval_derivative(eval_point, d);
                row_times(&dvec, operator, n)
            }
            LocalKind::Radial {
                dimension,
                offsets,
                shape,
                augmented,
                operator,
            } => {
                let mut dvec = offsets
                    .iter()
                    .map(|o| rbf::multiquadric_derivative(o, *shape, d, *dimension))
                    .collect::<Result<Vec<_>>>()?;
                if *augmented {
                    dvec.push(if derivative_order(d) == 0 { 1.0 } else { 0.0 });
                }
                row_times(&dvec, operator, n)
            }
            LocalKind::Kernel {
                dimension,
                offsets,
                params,
            } => offsets
                .iter()
                .map(|o| Ok(params.volume * sph::kernel_derivative(o, params.h, d, *dimension)?))
                .collect::<Result<Vec<_>>>()?,
        };
        Ok(DerivativeStencil {
            star: self.support.star,
            neighbors: self.support.neighbors.clone(),
            coeffs,
            derivative: d,
            moment_rcond: self.rcond,
        })
    }
}

/// `dvecᵀ · op` summed in index order (left to right).
fn row_times(dvec: &[f64], op: &Mat<f64>, n: usize) -> Vec<f64> {
    (0..n)
        .map(|q| {
            let mut s = 0.0;
            for (k, dk) in dvec.iter().enumerate() {
                s += dk * op[(k, q)];
            }
            s
        })
        .collect()
}

/// Coordinates of `p` in the requested frame.
pub(crate) fn in_frame(p: Point, star: Point, frame: CoordinateFrame) -> Point {
    match frame {
        CoordinateFrame::Global => p,
        CoordinateFrame::Centered => [p[0] - star[0], p[1] - star[1], p[2] - star[2]],
    }
}

/// Check a local factorisation against the rcond floor.
pub(crate) fn check_rcond(rcond: f64, singular: bool, floor: Option<f64>) -> Result<()> {
    if singular || floor.is_some_and(|f| rcond < f) {
        return Err(Error::StencilSingular { node: None, rcond });
    }
    Ok(())
}

/// Approximation back-ends.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Scheme {
    Fpm,
    Ppcm,
    Rpcm,
    Sph,
}

impl Scheme {
    pub fn name(self) -> &'static str {
        match self {
            Scheme::Fpm => "fpm",
            Scheme::Ppcm => "ppcm",
            Scheme::Rpcm => "rpcm",
            Scheme::Sph => "sph",
        }
    }
}

impl std::str::FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "fpm" => Ok(Scheme::Fpm),
            "ppcm" => Ok(Scheme::Ppcm),
            "rpcm" => Ok(Scheme::Rpcm),
            "sph" => Ok(Scheme::Sph),
            other => Err(Error::Config(format!("unknown scheme '{other}'"))),
        }
    }
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Everything needed to build a local approximation at any node of a cloud.
#[derive(Debug, Clone, PartialEq)]
pub struct Discretization {
    pub scheme: Scheme,
    /// Number of support nodes (ignored by PPCM, which takes exactly the
    /// basis size).
    pub support_size: usize,
    pub basis_order: u8,
    pub fpm: FpmOptions,
    /// Multiquadric shape parameter as a multiple of the nodal spacing.
    pub rbf_alpha: f64,
    pub rbf_augmented: bool,
    /// SPH smoothing length as a multiple of the nodal spacing.
    pub sph_h_factor: f64,
}

impl Discretization {
    pub fn new(scheme: Scheme, support_size: usize, fpm: FpmOptions) -> Self {
        Self {
            scheme,
            support_size,
            basis_order: 2,
            fpm,
            rbf_alpha: 3.0,
            rbf_augmented: false,
            sph_h_factor: 1.3,
        }
    }

    /// FPM as written in the reference scripts.
    pub fn legacy(support_size: usize) -> Self {
        Self::new(Scheme::Fpm, support_size, FpmOptions::legacy())
    }

    pub fn corrected(support_size: usize) -> Self {
        Self::new(Scheme::Fpm, support_size, FpmOptions::corrected())
    }

    pub fn basis(&self, dimension: usize) -> Result<Basis> {
        Basis::new(dimension, self.basis_order)
    }

    /// Factorised approximation at `star`.
    pub fn local(&self, cloud: &NodeCloud, star: usize) -> Result<LocalApproximation> {
        let basis = self.basis(cloud.dimension())?;
        let spacing = cloud.spacing();
        let built = match self.scheme {
            Scheme::Fpm => {
                let support = cloud::neighbors(cloud, star, self.support_size)?;
                fpm_local(support, cloud, &basis, &self.fpm)
            }
            Scheme::Ppcm => {
                let support = unisolvent_support(cloud, star, &basis)?;
                ppcm_local(support, cloud, &basis, self.fpm.frame, self.fpm.rcond_floor)
            }
            Scheme::Rpcm => {
                let support = cloud::neighbors(cloud, star, self.support_size)?;
                let params = RbfParams {
                    shape: self.rbf_alpha * spacing,
                    augmented: self.rbf_augmented,
                };
                rpcm_local(support, cloud, &params, self.fpm.rcond_floor)
            }
            Scheme::Sph => {
                let support = cloud::neighbors(cloud, star, self.support_size)?;
                let params = SphParams::from_spacing(spacing, self.sph_h_factor, cloud.dimension());
                sph_local(support, cloud, &params)
            }
        };
        built.map_err(|e| e.at_node(star))
    }
}
