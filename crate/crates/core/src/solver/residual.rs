use super::Coefficient;
use crate::error::{Error, Result};
use crate::fracops::{caputo_derivative, GridFunction};
use crate::numeric::derivative;

/// r(t) = d/dt[x^(α)](t) + q(t)x(t): the L1 Caputo derivative of the samples,
/// differentiated by three-point differences (one-sided at the ends).
///
/// Nodes with t ≤ q.domain_start() are missing, so a closed form can be
/// sampled from t = 0 even when q is singular there.
pub fn residual_fde(x: &GridFunction, q: &Coefficient, alpha: f64) -> Result<GridFunction> {
    if x.len() < 3 {
        return Err(Error::Size {
            op: "residual_fde",
            needed: 3,
            got: x.len(),
        });
    }
    let y = caputo_derivative(x, alpha)?;
    let dy = derivative(x.nodes(), y.values());
    let start = q.domain_start();
    let r = x
        .iter()
        .zip(dy)
        .map(|((t, xv), d)| {
            if t <= start {
                return Ok(f64::NAN);
            }
            Ok(d + q.eval(t)? * xv)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(GridFunction::from_raw(x.mesh().clone(), r))
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::fracops::Mesh;

    #[test]
    fn constant_with_unit_coefficient() {
        let m = Arc::new(Mesh::uniform(4.0, 40).unwrap());
        let r = residual_fde(&GridFunction::constant(m, 1.0), &Coefficient::constant(1.0), 0.5).unwrap();
        assert!(r.is_missing(0));
        assert!(r.values()[1..].iter().all(|&v| v == 1.0));
    }

    #[test]
    fn power_solution_residual_is_small() {
        let (alpha, beta) = (0.5, 0.25);
        let q = Coefficient::power_solution(alpha, beta, 1.0).unwrap();
        let m = Arc::new(Mesh::graded(10.0, 4096, 2.0).unwrap());
        let x = GridFunction::from_fn(m, |t| t.powf(beta)).unwrap();
        let r = residual_fde(&x, &q, alpha).unwrap();
        assert!(r.iter().filter(|(t, _)| *t <= 1.0).all(|(_, v)| v.is_nan()));
        let worst = r.max_abs_on(1.0, 10.0).unwrap();
        assert!(worst < 5e-3, "{worst}");
    }

    #[test]
    fn too_short() {
        let m = Arc::new(Mesh::uniform(1.0, 1).unwrap());
        let x = GridFunction::constant(m, 1.0);
        assert!(matches!(
            residual_fde(&x, &Coefficient::constant(1.0), 0.5),
            Err(Error::Size { .. })
        ));
    }
}
