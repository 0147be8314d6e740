//! Riccati quantities, sign quantity, crossings and averaging on the
//! closed-form scenarios.

use std::sync::Arc;

use fdelab::averaging::{
    check_integrability_conditions, classify_kamenev, kamenev_average, IntegralStatus, KamenevParams, Passes, Verdict,
};
use fdelab::diagnostics::{
    crossings, detect_sign_changes, kamenev_bound_check, limit_estimate_xalpha, riccati_lhs, riccati_residual,
    sign_quantity,
};
use fdelab::fracops::caputo_derivative;
use fdelab::solver::{solve_curvature, solve_fde, CurvatureProblem, FdeProblem, Operator};
use fdelab::specialfn::gamma;
use fdelab::{Coefficient, GridFunction, Mesh, Solution};

const ALPHA: f64 = 0.5;
const BETA: f64 = 0.25;

/// Γ(1+β)/Γ(1+β−α)
fn tbeta_coeff() -> f64 {
    gamma(1.0 + BETA).unwrap() / gamma(1.0 + BETA - ALPHA).unwrap()
}

/// β t^{β−1} = c t^{β−α}
fn tbeta_crossover() -> f64 {
    (BETA / tbeta_coeff()).powf(1.0 / (1.0 - ALPHA))
}

fn tbeta_solution(n: usize, t_end: f64) -> (Solution, Coefficient) {
    let m = Arc::new(Mesh::graded(t_end, n, 2.0).unwrap());
    let c = tbeta_coeff();
    let q = Coefficient::power_solution(ALPHA, BETA, 1.0).unwrap();
    let x = GridFunction::from_fn(m.clone(), |t| t.powf(BETA)).unwrap();
    let y = GridFunction::new(
        m.clone(),
        m.nodes()
            .iter()
            .map(|&t| if t > 0.0 { c * t.powf(BETA - ALPHA) } else { f64::NAN })
            .collect(),
    )
    .unwrap();
    let xp = GridFunction::new(
        m.clone(),
        m.nodes()
            .iter()
            .map(|&t| if t > 0.0 { BETA * t.powf(BETA - 1.0) } else { f64::NAN })
            .collect(),
    )
    .unwrap();
    (
        Solution::from_samples(Operator::Caputo { alpha: ALPHA }, x, y, xp, &q).unwrap(),
        q,
    )
}

#[test]
fn crossover_value() {
    assert!((tbeta_coeff() - 0.739_668_779_8).abs() < 1e-9);
    assert!((tbeta_crossover() - 0.114_237).abs() < 1e-6);
}

#[test]
fn linear_sample_sign_quantity() {
    let m = Arc::new(Mesh::uniform(3.0, 600).unwrap());
    let x = GridFunction::from_fn(m.clone(), |t| t).unwrap();
    let y = caputo_derivative(&x, ALPHA).unwrap();
    let sol = Solution::from_samples(
        Operator::Caputo { alpha: ALPHA },
        x,
        y,
        GridFunction::constant(m, 1.0),
        &Coefficient::constant(0.0),
    )
    .unwrap();
    let t_star = gamma(1.5).unwrap().powi(2);
    assert!((t_star - std::f64::consts::FRAC_PI_4).abs() < 1e-15);
    for (t, s) in sign_quantity(&sol).iter().skip(1) {
        if t > t_star * 1.001 {
            assert!(s < 0.0, "t={t}");
        } else if t < t_star * 0.999 {
            assert!(s > 0.0, "t={t}");
        }
    }
}

#[test]
fn tbeta_sign_quantity_negative_beyond_crossover() {
    let (sol, q) = tbeta_solution(4096, 10.0);
    let t_star = tbeta_crossover();
    let s = sign_quantity(&sol);
    assert!(s.is_missing(0));
    for (t, v) in s.iter().skip(1) {
        if t > 1.2 * t_star {
            assert!(v < 0.0, "t={t}");
        } else if t < 0.8 * t_star {
            assert!(v > 0.0, "t={t}");
        }
    }
    // R = −S/x² > 0 beyond the crossover
    let rr = riccati_residual(&sol, &q).unwrap();
    for (t, r) in rr.residual.iter().filter(|(t, _)| *t > 1.2 * t_star) {
        assert!(r > 0.0, "t={t}");
    }
}

#[test]
fn constant_solution_has_zero_residual() {
    let sol = solve_fde(&FdeProblem {
        alpha: ALPHA,
        x0: 1.0,
        y0: 0.0,
        q: Coefficient::constant(0.0),
        mesh: Arc::new(Mesh::uniform(5.0, 64).unwrap()),
    })
    .unwrap();
    let rr = riccati_residual(&sol, &Coefficient::constant(0.0)).unwrap();
    assert!(rr.residual.values().iter().all(|&r| r == 0.0));
    assert!(sign_quantity(&sol).values().iter().all(|&s| s == 0.0));
}

/// w′ = −w² − q by RK4 on a uniform mesh.
fn riccati_rk4(q: f64, w1: f64, t0: f64, t1: f64, n: usize) -> GridFunction {
    let m = Arc::new(Mesh::uniform_window(t0, t1, n).unwrap());
    let h = (t1 - t0) / n as f64;
    let f = |w: f64| -w * w - q;
    let mut w = vec![w1];
    for _ in 0..n {
        let a = *w.last().unwrap();
        let k1 = f(a);
        let k2 = f(a + 0.5 * h * k1);
        let k3 = f(a + 0.5 * h * k2);
        let k4 = f(a + h * k3);
        w.push(a + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
    }
    GridFunction::new(m, w).unwrap()
}

#[test]
fn synthetic_riccati_residual_vanishes() {
    // w stays finite until t ≈ 9.97; check on [1, 9].
    let q = Coefficient::constant(0.1);
    let mut prev = f64::INFINITY;
    for n in [800, 1600, 3200] {
        let w = riccati_rk4(0.1, 1.0, 1.0, 9.0, n);
        let r = riccati_lhs(&w, &q).max_abs().unwrap();
        assert!(r < 1e-3 && r < prev, "n={n}: {r}");
        prev = r;
    }
}

#[test]
fn synthetic_riccati_bound_holds() {
    for eps in [2.5, 3.0] {
        for t in [5.0, 10.0, 20.0] {
            let b = kamenev_bound_check(1.0, &Coefficient::constant(0.1), eps, 1.0, t).unwrap();
            assert!(b.holds, "{b:?}");
        }
    }
    let b = kamenev_bound_check(1.0, &Coefficient::constant(0.1), 3.0, 1.0, 20.0).unwrap();
    assert!((b.lhs - 0.1 * 19f64.powi(4) / (4.0 * 8000.0)).abs() < 1e-12);
    assert!((b.rhs - (1.0 + 9.0 / 160.0)).abs() < 1e-15);
}

fn curvature_run(n: usize) -> Solution {
    solve_curvature(&CurvatureProblem {
        x0: 1.0,
        u0: 0.5,
        q: Coefficient::constant(0.02),
        mesh: Arc::new(Mesh::uniform(30.0, n).unwrap()),
    })
    .unwrap()
}

#[test]
fn curvature_scenario_bound() {
    let q = Coefficient::constant(0.02);
    let sol = curvature_run(6000);
    // x changes sign near t = 19.3, so the Riccati window stops before it
    let z = detect_sign_changes(&sol.x, true);
    assert_eq!(z.len(), 1);
    assert!((z[0] - 19.306).abs() < 1e-2, "{z:?}");
    let rr = riccati_residual(&sol, &q).unwrap();
    assert!(rr.residual.iter().filter(|(t, _)| *t <= 18.0).all(|(_, r)| r <= 1e-8));
    let w1 = rr.w.interpolate(1.0).unwrap();
    for t in [5.0, 10.0, 18.0] {
        assert!(kamenev_bound_check(w1, &q, 3.0, 1.0, t).unwrap().holds);
    }
}

#[test]
fn riccati_forms_agree_under_refinement() {
    let q = Coefficient::constant(0.02);
    let gap = |n: usize| {
        let sol = curvature_run(n);
        let rr = riccati_residual(&sol, &q).unwrap();
        rr.residual
            .iter()
            .zip(rr.differenced.values())
            .filter(|((t, _), _)| *t <= 18.0)
            .map(|((_, a), b)| (a - b).abs())
            .fold(0.0, f64::max)
    };
    let (g1, g2, g3) = (gap(1500), gap(3000), gap(6000));
    assert!(g2 < g1 && g3 < g2, "{g1} {g2} {g3}");
    // C·Δt with Δt = 30/n: the constant does not grow
    assert!(g3 * 6000.0 <= g1 * 1500.0 * 1.01);
}

#[test]
fn bound_check_without_forcing() {
    let b = kamenev_bound_check(-2.0, &Coefficient::constant(0.0), 3.0, 1.0, 7.0).unwrap();
    assert_eq!(b.lhs, 0.0);
    assert!(b.holds);
}

fn ml_solution(t_end: f64, n: usize) -> Solution {
    solve_fde(&FdeProblem {
        alpha: ALPHA,
        x0: 1.0,
        y0: 0.0,
        q: Coefficient::constant(1.0),
        mesh: Arc::new(Mesh::uniform(t_end, n).unwrap()),
    })
    .unwrap()
}

#[test]
fn ml_crossings_alternate() {
    let sol = ml_solution(40.0, 8192);
    let c = crossings(&sol.x, true);
    assert!(!c.is_empty());
    assert!(c[0].to_negative);
    assert!(c.windows(2).all(|w| w[0].to_negative != w[1].to_negative));
    // E_{1.5}(−t^{1.5}) has exactly three real zeros, near 1.645, 5.744, 8.376
    let want = [1.645, 5.744, 8.376];
    assert_eq!(c.len(), 3);
    for (got, w) in c.iter().zip(want) {
        assert!((got.t - w).abs() < 0.01, "{c:?}");
    }
}

#[test]
fn ml_limit_estimate_tracks_algebraic_tail() {
    let sol = ml_solution(40.0, 8192);
    let l = limit_estimate_xalpha(&sol, 0.25).unwrap();
    // y(t) ≈ −1/√(π t) for large t
    let nodes = &sol.mesh().nodes()[8192 - 2048..];
    let tail = nodes
        .iter()
        .map(|t| -1.0 / (std::f64::consts::PI * t).sqrt())
        .sum::<f64>()
        / nodes.len() as f64;
    assert!((l.mean - tail).abs() < 1e-3, "{l:?} vs {tail}");
    assert!(l.slope > 0.0);
}

#[test]
fn limit_estimates_of_free_solutions() {
    for (x0, y0) in [(0.0, 2.0), (0.0, gamma(1.5).unwrap())] {
        let sol = solve_fde(&FdeProblem {
            alpha: ALPHA,
            x0,
            y0,
            q: Coefficient::constant(0.0),
            mesh: Arc::new(Mesh::uniform(10.0, 200).unwrap()),
        })
        .unwrap();
        let l = limit_estimate_xalpha(&sol, 0.3).unwrap();
        assert!((l.mean - y0).abs() <= 1e-14 * y0, "{l:?}");
    }
}

#[test]
fn cosine_and_constant_crossings() {
    let m = Arc::new(Mesh::uniform(10.0, 1000).unwrap());
    let z = detect_sign_changes(&GridFunction::from_fn(m.clone(), f64::cos).unwrap(), true);
    let want = [1.0, 3.0, 5.0].map(|k| k * std::f64::consts::FRAC_PI_2);
    assert_eq!(z.len(), 3);
    for (a, b) in z.iter().zip(want) {
        assert!((a - b).abs() < 1e-3);
    }
    assert!(detect_sign_changes(&GridFunction::constant(m, 1.0), true).is_empty());
}

#[test]
fn curvature_small_amplitude_zero_spacing() {
    let sol = solve_curvature(&CurvatureProblem {
        x0: 0.01,
        u0: 0.0,
        q: Coefficient::constant(1.0),
        mesh: Arc::new(Mesh::uniform(30.0, 30_000).unwrap()),
    })
    .unwrap();
    let z = detect_sign_changes(&sol.x, true);
    assert!(z.len() >= 3);
    for w in z.windows(2) {
        assert!(((w[1] - w[0]) - std::f64::consts::PI).abs() < 0.1 * std::f64::consts::PI);
    }
}

#[test]
fn kamenev_closed_forms_and_monotonicity() {
    let q = Coefficient::constant(1.0);
    assert!((kamenev_average(&q, 3.0, 1.0, 10.0).unwrap() - 1.64025).abs() < 1e-12);
    for eps in [2.5, 3.0, 4.0] {
        for t in [2.0, 10.0, 100.0] {
            let k = kamenev_average(&Coefficient::constant(2.5), eps, 1.0, t).unwrap();
            let want = 2.5 * (t - 1.0f64).powf(eps + 1.0) / ((eps + 1.0) * t.powf(eps));
            assert!((k - want).abs() <= 1e-8 * k.abs());
        }
    }
    let ks: Vec<f64> = (1..=20)
        .map(|k| kamenev_average(&q, 3.0, 1.0, 10.0 * k as f64).unwrap())
        .collect();
    assert!(ks.windows(2).all(|w| w[1] > w[0]));
}

#[test]
fn power_law_average_below_tail_integral() {
    for alpha in [0.25, 0.5, 0.75] {
        let q = Coefficient::power_solution(alpha, alpha / 2.0, 1.0).unwrap();
        let crate_c = fdelab::solver::power_solution_constant(alpha, alpha / 2.0).unwrap();
        let bound = crate_c / alpha;
        for t in [2.0, 20.0, 200.0, 2000.0] {
            assert!(kamenev_average(&q, 3.0, 1.0, t).unwrap() <= bound);
        }
    }
}

#[test]
fn classification_examples() {
    let p = KamenevParams::standard();
    assert_eq!(
        classify_kamenev(&Coefficient::constant(1.0), &p).unwrap().verdict,
        Verdict::DivergingEvidence
    );
    for alpha in [0.25, 0.5, 0.75] {
        let q = Coefficient::power_solution(alpha, alpha / 2.0, 1.0).unwrap();
        let v = classify_kamenev(&q, &p).unwrap();
        assert_eq!(v.verdict, Verdict::BoundedEvidence, "alpha={alpha}: {v:?}");
    }
    let v = classify_kamenev(&Coefficient::sinusoid(1.0, 0.0, 1.0), &p).unwrap();
    assert_eq!(v.verdict, Verdict::BoundedEvidence);
    // logarithmic growth of ∫ 1/s still reads as divergence
    let v = classify_kamenev(&Coefficient::power_law(1.0, -1.0, 1.0).unwrap(), &p).unwrap();
    assert_eq!(v.verdict, Verdict::DivergingEvidence, "{v:?}");
}

#[test]
fn condition_checker_examples() {
    for alpha in [0.25, 0.5, 0.75] {
        let q = Coefficient::power_solution(alpha, 0.5 * alpha, 1.0).unwrap();
        let r = check_integrability_conditions(&q, alpha, 100.0).unwrap();
        assert_eq!(
            (r.i1, r.i2, r.passes),
            (IntegralStatus::Diverging, IntegralStatus::Diverging, Passes::No)
        );
    }
    let r = check_integrability_conditions(&Coefficient::constant(2.0), 0.5, 10.0).unwrap();
    assert_eq!(r.passes, Passes::No);
    let alpha = 0.3;
    let delta = 0.5;
    let r = check_integrability_conditions(&Coefficient::power_law(delta, -3.0, 1.0).unwrap(), alpha, 500.0).unwrap();
    let IntegralStatus::Finite { value: i1 } = r.i1 else {
        panic!()
    };
    let IntegralStatus::Finite { value: i2 } = r.i2 else {
        panic!()
    };
    assert!((i1 - delta / (1.0 - alpha)).abs() < 1e-15);
    assert!((i2 - delta / (2.0 - alpha)).abs() < 1e-15);
    assert!(i2 < gamma(1.0 + alpha).unwrap());
    assert_eq!(r.passes, Passes::Yes);
    // a large δ breaks the I₂ bound
    let r = check_integrability_conditions(&Coefficient::power_law(3.0, -3.0, 1.0).unwrap(), alpha, 500.0).unwrap();
    assert_eq!(r.passes, Passes::No);
}
