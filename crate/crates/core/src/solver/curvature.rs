use std::sync::Arc;

use super::{Coefficient, Operator, Solution};
use crate::error::{domain, Error, Result};
use crate::fracops::{GridFunction, Mesh};

/// |u| may not come closer than this to 1, where x′ = u/√(1 − u²) blows up.
pub const SATURATION_MARGIN: f64 = 1e-9;

/// (𝒟x)′ + q x = 0 with 𝒟x = x′/√(1 + x′²), posed on the mesh hull.
#[derive(Debug, Clone)]
pub struct CurvatureProblem {
    /// x at the first mesh node
    pub x0: f64,
    /// 𝒟x at the first mesh node, |u0| < 1
    pub u0: f64,
    pub q: Coefficient,
    pub mesh: Arc<Mesh>,
}

/// Classical RK4 on u′ = −q x, x′ = u/√(1 − u²), one step per mesh interval.
/// The returned `y` holds u = 𝒟x.
pub fn solve_curvature(problem: &CurvatureProblem) -> Result<Solution> {
    let CurvatureProblem { x0, u0, q, mesh } = problem;
    if mesh.len() < 2 {
        return Err(Error::Size {
            op: "solve_curvature",
            needed: 2,
            got: mesh.len(),
        });
    }
    if !(x0.is_finite() && u0.abs() < 1.0) {
        return Err(domain("solve_curvature", "need finite x0 and |u0| < 1"));
    }
    let t = mesh.nodes();
    let check = |step: usize, at: f64, u: f64| -> Result<()> {
        if u.abs() < 1.0 - SATURATION_MARGIN {
            Ok(())
        } else {
            Err(Error::GradientBlowup {
                step,
                t: at,
                u_abs: u.abs(),
            })
        }
    };
    let slope = |u: f64| u / (1.0 - u * u).sqrt();
    check(0, t[0], *u0)?;

    let mut x = Vec::with_capacity(t.len());
    let mut u = Vec::with_capacity(t.len());
    let mut qx = Vec::with_capacity(t.len());
    x.push(*x0);
    u.push(*u0);
    qx.push(q.eval(t[0])?);
    for n in 1..t.len() {
        let (ta, h) = (t[n - 1], t[n] - t[n - 1]);
        let (xa, ua) = (x[n - 1], u[n - 1]);
        let (qa, qm, qb) = (qx[n - 1], q.eval(ta + 0.5 * h)?, q.eval(t[n])?);

        let k1x = slope(ua);
        let k1u = -qa * xa;
        let u2 = ua + 0.5 * h * k1u;
        check(n, ta + 0.5 * h, u2)?;
        let k2x = slope(u2);
        let k2u = -qm * (xa + 0.5 * h * k1x);
        let u3 = ua + 0.5 * h * k2u;
        check(n, ta + 0.5 * h, u3)?;
        let k3x = slope(u3);
        let k3u = -qm * (xa + 0.5 * h * k2x);
        let u4 = ua + h * k3u;
        check(n, t[n], u4)?;
        let k4x = slope(u4);
        let k4u = -qb * (xa + h * k3x);

        let xn = xa + h / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
        let un = ua + h / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
        check(n, t[n], un)?;
        if !xn.is_finite() {
            return Err(Error::Divergence {
                node: n,
                last_good: n - 1,
            });
        }
        x.push(xn);
        u.push(un);
        qx.push(qb);
    }

    let xprime = u.iter().map(|&v| slope(v)).collect();
    let yprime = qx.iter().zip(&x).map(|(qv, xv)| -qv * xv).collect();
    Ok(Solution {
        operator: Operator::Curvature,
        x: GridFunction::from_raw(mesh.clone(), x),
        y: GridFunction::from_raw(mesh.clone(), u),
        yprime: GridFunction::from_raw(mesh.clone(), yprime),
        xprime: GridFunction::from_raw(mesh.clone(), xprime),
    })
}
