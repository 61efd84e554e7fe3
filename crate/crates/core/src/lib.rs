//! Meshfree strong-form collocation for linear elastostatics.
//!
//! The pipeline is `cloud → approx → assembly → solve → oracle`, driven end to
//! end by [`harness`]:
//!
//! * [`cloud`] generates bar and beam node clouds and nearest-neighbour
//!   support domains.
//! * [`approx`] builds derivative stencils with the Finite Point Method (fixed
//!   weighted least squares), polynomial and radial point collocation, and SPH.
//! * [`assembly`] collocates `E u'' = 0` (bar) or the Navier–Cauchy equations
//!   (3D) and applies Dirichlet and, optionally stabilised, Neumann rows.
//! * [`solve`] factorises the dense system and reports conditioning.
//! * [`oracle`] holds closed-form reference solutions and error metrics.
//!
//! Units are mm, N and N/mm² throughout.

// `!(x > 0.0)` deliberately rejects NaN along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod approx;
pub mod assembly;
pub mod cloud;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod oracle;
pub mod solve;

pub use approx::{Discretization, Scheme};
pub use error::{Error, Result};
