use super::{FdeProblem, Operator, Solution};
use crate::error::{domain, Error, Result};
use crate::fracops::{GridFunction, ProductTrapezoid};
use crate::specialfn::gamma;

/// Solves (x^(α))′ + q x = 0 on the problem mesh.
///
/// Each step advances y by the trapezoidal rule and x by product-trapezoidal
/// quadrature of the weakly singular integral. Both relations are linear in
/// the new pair (x_n, y_n), so the implicit coupling is solved in closed form.
pub fn solve_fde(problem: &FdeProblem) -> Result<Solution> {
    let FdeProblem { alpha, x0, y0, q, mesh } = problem;
    let (alpha, x0, y0) = (*alpha, *x0, *y0);
    if mesh.len() < 3 {
        return Err(Error::Size {
            op: "solve_fde",
            needed: 3,
            got: mesh.len(),
        });
    }
    if !mesh.starts_at_zero() {
        return Err(domain("solve_fde", "mesh must start at t = 0"));
    }
    if !(x0.is_finite() && y0.is_finite()) {
        return Err(domain("solve_fde", "initial data must be finite"));
    }
    if q.domain_start() > 0.0 {
        return Err(domain(
            "solve_fde",
            format!(
                "q is undefined at t = 0 (domain starts at {}); sample a closed form and use residual_fde on [t0, T] instead",
                q.domain_start()
            ),
        ));
    }
    let weights = ProductTrapezoid::new(mesh.clone(), alpha)?;
    let qv = q.sample(mesh)?.into_values();
    let t = mesh.nodes();
    let n_nodes = t.len();
    let ginv = 1.0 / gamma(alpha)?;

    let mut x = vec![0.0; n_nodes];
    let mut y = vec![0.0; n_nodes];
    let mut yp = vec![0.0; n_nodes];
    let mut xp = vec![0.0; n_nodes];
    x[0] = x0;
    y[0] = y0;
    yp[0] = -qv[0] * x0;
    xp[0] = if y0 == 0.0 { 0.0 } else { f64::NAN };

    let mut row = Vec::with_capacity(n_nodes);
    for n in 1..n_nodes {
        weights.row(n, &mut row);
        let (hist_y, hist_yp) = row[..n]
            .iter()
            .zip(&y[..n])
            .zip(&yp[..n])
            .fold((0.0, 0.0), |(a, b), ((w, yj), ypj)| (a + w * yj, b + w * ypj));
        let half_h = 0.5 * (t[n] - t[n - 1]);
        let c = ginv * row[n];
        // y_n = a - half_h q_n x_n and x_n = b + c y_n
        let a = y[n - 1] - half_h * qv[n - 1] * x[n - 1];
        let b = x0 + ginv * hist_y;
        let xn = (b + c * a) / (1.0 + c * half_h * qv[n]);
        let yn = a - half_h * qv[n] * xn;
        let ypn = -qv[n] * xn;
        let xpn = ginv * (y0 * t[n].powf(alpha - 1.0) + hist_yp + row[n] * ypn);
        if !(xn.is_finite() && yn.is_finite() && xpn.is_finite()) {
            return Err(Error::Divergence {
                node: n,
                last_good: n - 1,
            });
        }
        x[n] = xn;
        y[n] = yn;
        yp[n] = ypn;
        xp[n] = xpn;
    }

    Ok(Solution {
        operator: Operator::Caputo { alpha },
        x: GridFunction::from_raw(mesh.clone(), x),
        y: GridFunction::from_raw(mesh.clone(), y),
        yprime: GridFunction::from_raw(mesh.clone(), yp),
        xprime: GridFunction::from_raw(mesh.clone(), xp),
    })
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::fracops::Mesh;
    use crate::solver::Coefficient;
    use crate::specialfn::mittag_leffler;

    fn problem(alpha: f64, x0: f64, y0: f64, q: Coefficient, n: usize, t_end: f64) -> FdeProblem {
        FdeProblem {
            alpha,
            x0,
            y0,
            q,
            mesh: Arc::new(Mesh::uniform(t_end, n).unwrap()),
        }
    }

    #[test]
    fn zero_coefficient_keeps_constant() {
        let s = solve_fde(&problem(0.5, 1.0, 0.0, Coefficient::constant(0.0), 64, 5.0)).unwrap();
        assert!(s.x.values().iter().all(|&v| (v - 1.0).abs() < 1e-15));
        assert!(s.y.values().iter().all(|&v| v == 0.0));
        assert!(s.xprime.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn free_power_solution() {
        // q ≡ 0, y0 = Γ(1+α): x = t^α exactly (constant integrand).
        let alpha = 0.3;
        let g = gamma(1.0 + alpha).unwrap();
        let s = solve_fde(&problem(alpha, 0.0, g, Coefficient::constant(0.0), 128, 2.0)).unwrap();
        for (t, v) in s.x.iter() {
            assert!((v - t.powf(alpha)).abs() < 1e-13, "t={t}");
        }
        assert!(s.xprime.is_missing(0));
        let (t5, xp5) = (s.x.nodes()[5], s.xprime.values()[5]);
        assert!((xp5 - alpha * t5.powf(alpha - 1.0)).abs() < 1e-12 * xp5);
    }

    #[test]
    fn tracks_mittag_leffler() {
        let s = solve_fde(&problem(0.5, 1.0, 0.0, Coefficient::constant(1.0), 2048, 10.0)).unwrap();
        let err =
            s.x.iter()
                .map(|(t, v)| (v - mittag_leffler(1.5, -t.powf(1.5)).unwrap().value).abs())
                .fold(0.0, f64::max);
        assert!(err < 1e-3, "{err}");
    }

    #[test]
    fn singular_coefficient_rejected() {
        let q = Coefficient::power_law(1.0, -1.5, 1.0).unwrap();
        let e = solve_fde(&problem(0.5, 1.0, 0.0, q, 16, 5.0)).unwrap_err();
        assert!(matches!(e, Error::Domain { .. }));
    }

    #[test]
    fn overflow_reports_divergence() {
        let e = solve_fde(&problem(0.5, 1.0, 0.0, Coefficient::constant(-50.0), 4000, 400.0)).unwrap_err();
        match e {
            Error::Divergence { node, last_good } => assert_eq!(last_good + 1, node),
            other => panic!("{other:?}"),
        }
    }
}
