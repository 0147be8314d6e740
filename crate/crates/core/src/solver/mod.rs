//! Solvers for (x^(α))′ + q(t)x = 0 and its curvature-operator analogue.
//!
//! The fractional equation is solved through its Volterra form: with
//! y = x^(α),
//!
//! ```text
//! y(t) = y0 − ∫_0^t q(s) x(s) ds
//! x(t) = x0 + (1/Γ(α)) ∫_0^t (t − s)^{α−1} y(s) ds
//! ```
//!
//! (x0, y0) are the two free constants of the equation; y0 = lim_{t↘0} x^(α)(t).

mod coefficient;
mod curvature;
mod fde;
mod residual;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use coefficient::{power_solution_constant, Coefficient, CoefficientFamily};
pub use curvature::{solve_curvature, CurvatureProblem, SATURATION_MARGIN};
pub use fde::solve_fde;
pub use residual::residual_fde;

use crate::error::Result;
use crate::fracops::{GridFunction, Mesh};

/// Problem statement for [`solve_fde`].
#[derive(Debug, Clone)]
pub struct FdeProblem {
    pub alpha: f64,
    /// x(0)
    pub x0: f64,
    /// lim_{t↘0} x^(α)(t)
    pub y0: f64,
    pub q: Coefficient,
    pub mesh: Arc<Mesh>,
}

/// The operator whose derivative appears in the equation: the Caputo
/// derivative of order α, or 𝒟x = x′/√(1 + x′²).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Operator {
    Caputo { alpha: f64 },
    Curvature,
}

/// A solved trajectory. `y` is the operator value (x^(α) or 𝒟x) and
/// `yprime = −q·x` by construction.
#[derive(Debug, Clone)]
pub struct Solution {
    pub operator: Operator,
    pub x: GridFunction,
    pub y: GridFunction,
    pub yprime: GridFunction,
    pub xprime: GridFunction,
}

impl Solution {
    /// A solution assembled from samples (e.g. of a closed form), with
    /// yprime = −q·x and missing wherever q is undefined.
    pub fn from_samples(
        operator: Operator,
        x: GridFunction,
        y: GridFunction,
        xprime: GridFunction,
        q: &Coefficient,
    ) -> Result<Self> {
        x.same_mesh(&y, "solution")?;
        x.same_mesh(&xprime, "solution")?;
        let yprime = x.map(|t, v| q.eval(t).map_or(f64::NAN, |qv| -qv * v));
        Ok(Self {
            operator,
            x,
            y,
            yprime,
            xprime,
        })
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        self.x.mesh()
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }
}
