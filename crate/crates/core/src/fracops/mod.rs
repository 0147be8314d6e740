//! Discrete fractional operators of order α ∈ (0, 1) on meshes anchored at
//! t = 0: the Caputo derivative by the L1 rule and the fractional integral by
//! product-trapezoidal quadrature. Both integrate the weakly singular kernel
//! exactly against a piecewise polynomial.

mod grid;
mod mesh;
mod weights;

pub use grid::GridFunction;
pub use mesh::{Grading, Mesh};
pub use weights::{L1Weights, ProductTrapezoid};

use crate::error::{domain, Error, Result};
use crate::specialfn::gamma_unchecked;

fn check_anchor(f: &GridFunction, op: &'static str) -> Result<()> {
    if f.len() < 2 {
        return Err(Error::Size {
            op,
            needed: 2,
            got: f.len(),
        });
    }
    if !f.mesh().starts_at_zero() {
        return Err(domain(op, "mesh must start at t = 0"));
    }
    Ok(())
}

/// Caputo derivative (1/Γ(1−α)) ∫_0^t f′(s) (t−s)^{−α} ds at every node.
///
/// f′ is taken piecewise constant (divided differences) and the kernel is
/// integrated exactly per interval. The value at t = 0 is reported as 0,
/// which is the limit whenever f′ is bounded; for f′ ~ t^{α−1} the true limit
/// is nonzero and must be supplied separately.
pub fn caputo_derivative(f: &GridFunction, alpha: f64) -> Result<GridFunction> {
    check_anchor(f, "caputo_derivative")?;
    let weights = L1Weights::new(f.mesh().clone(), alpha)?;
    Ok(caputo_with(&weights, f))
}

/// [`caputo_derivative`] with precomputed weights.
pub fn caputo_with(weights: &L1Weights, f: &GridFunction) -> GridFunction {
    let v = f.values();
    let scale = 1.0 / gamma_unchecked(2.0 - weights.alpha());
    let mut out = vec![0.0; v.len()];
    let mut row = Vec::with_capacity(v.len());
    for (n, slot) in out.iter_mut().enumerate().skip(1) {
        weights.row(n, &mut row);
        let s: f64 = row.iter().enumerate().map(|(j, c)| c * (v[j + 1] - v[j])).sum();
        *slot = scale * s;
    }
    GridFunction::from_raw(f.mesh().clone(), out)
}

/// h(t) = h0 + (1/Γ(α)) ∫_0^t g(s) (t−s)^{α−1} ds at every node, with g
/// piecewise linear and the kernel integrated exactly.
pub fn fractional_integral(g: &GridFunction, alpha: f64, h0: f64) -> Result<GridFunction> {
    check_anchor(g, "fractional_integral")?;
    let weights = ProductTrapezoid::new(g.mesh().clone(), alpha)?;
    Ok(fractional_integral_with(&weights, g, h0))
}

/// [`fractional_integral`] with precomputed weights.
pub fn fractional_integral_with(weights: &ProductTrapezoid, g: &GridFunction, h0: f64) -> GridFunction {
    let v = g.values();
    let scale = 1.0 / gamma_unchecked(weights.alpha());
    let mut out = vec![h0; v.len()];
    let mut row = Vec::with_capacity(v.len());
    for (n, slot) in out.iter_mut().enumerate().skip(1) {
        weights.row(n, &mut row);
        let s: f64 = row.iter().zip(v).map(|(w, x)| w * x).sum();
        *slot = h0 + scale * s;
    }
    GridFunction::from_raw(g.mesh().clone(), out)
}
