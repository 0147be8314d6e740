//! Numerical laboratory for the linear fractional equation
//! (x^(α))′ + q(t)·x = 0 with the Caputo derivative of order α ∈ (0, 1).
//!
//! * [`specialfn`]: Gamma and Mittag-Leffler functions.
//! * [`fracops`]: meshes, grid functions, the L1 Caputo derivative and the
//!   product-trapezoidal fractional integral.
//! * [`solver`]: coefficients, the Volterra solver, the residual check and the
//!   curvature-operator ODE.
//! * [`averaging`]: the Kamenev average, its finite-horizon classification and
//!   the integrability conditions on q.
//! * [`diagnostics`]: Riccati variable, sign quantity, zero crossings and the
//!   averaged Riccati bound.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod averaging;
pub mod diagnostics;
pub mod error;
pub mod fracops;
pub(crate) mod numeric;
pub mod solver;
pub mod specialfn;

pub use error::{Error, Result};
pub use fracops::{Grading, GridFunction, Mesh};
pub use solver::{Coefficient, CoefficientFamily, FdeProblem, Solution};
