//! Refinement studies against closed forms.

use std::sync::Arc;

use fdelab::fracops::{caputo_derivative, fractional_integral};
use fdelab::solver::{residual_fde, solve_fde, FdeProblem};
use fdelab::specialfn::{gamma, mittag_leffler};
use fdelab::{Coefficient, GridFunction, Mesh};

type Named = (&'static str, fn(f64) -> f64);

fn orders(errs: &[f64]) -> Vec<f64> {
    errs.windows(2).map(|w| (w[0] / w[1]).log2()).collect()
}

#[test]
fn caputo_of_power_converges_on_graded_mesh() {
    let alpha = 0.5;
    for beta in [0.25, 0.4] {
        let c = gamma(1.0 + beta).unwrap() / gamma(1.0 + beta - alpha).unwrap();
        let errs: Vec<f64> = [512, 1024, 2048, 4096]
            .iter()
            .map(|&n| {
                let m = Arc::new(Mesh::graded(1.0, n, 2.0).unwrap());
                let d = caputo_derivative(&GridFunction::from_fn(m, |t| t.powf(beta)).unwrap(), alpha).unwrap();
                d.iter()
                    .filter(|(t, _)| *t >= 0.5)
                    .map(|(t, v)| {
                        let exact = c * t.powf(beta - alpha);
                        ((v - exact) / exact).abs()
                    })
                    .fold(0.0, f64::max)
            })
            .collect();
        assert!(errs[3] <= 1e-3, "{errs:?}");
        assert!(errs.windows(2).all(|w| w[1] < w[0]), "{errs:?}");
        assert!(orders(&errs).iter().all(|&p| p >= 1.2), "{errs:?}");
    }
}

#[test]
fn round_trip_converges() {
    let fs: [Named; 3] = [("t^2", |t| t * t), ("sin", f64::sin), ("t^1.5", |t| t.powf(1.5))];
    for alpha in [0.25, 0.5, 0.75] {
        for (name, f) in fs {
            let errs: Vec<f64> = [256, 512, 1024, 2048]
                .iter()
                .map(|&n| {
                    let g = GridFunction::from_fn(Arc::new(Mesh::uniform(1.0, n).unwrap()), f).unwrap();
                    let h = fractional_integral(&caputo_derivative(&g, alpha).unwrap(), alpha, f(0.0)).unwrap();
                    h.values()
                        .iter()
                        .zip(g.values())
                        .map(|(a, b)| (a - b).abs())
                        .fold(0.0, f64::max)
                })
                .collect();
            assert!(errs[3] <= 1e-3, "{name} alpha={alpha}: {errs:?}");
            let p = orders(&errs);
            assert!(p.iter().all(|&p| p >= 1.0 - 0.05), "{name} alpha={alpha}: {p:?}");
        }
    }
}

fn ml_error(n: usize, graded: bool) -> f64 {
    let mesh = if graded {
        Mesh::graded(10.0, n, 2.0).unwrap()
    } else {
        Mesh::uniform(10.0, n).unwrap()
    };
    let s = solve_fde(&FdeProblem {
        alpha: 0.5,
        x0: 1.0,
        y0: 0.0,
        q: Coefficient::constant(1.0),
        mesh: Arc::new(mesh),
    })
    .unwrap();
    s.x.iter()
        .map(|(t, v)| (v - mittag_leffler(1.5, -t.powf(1.5)).unwrap().value).abs())
        .fold(0.0, f64::max)
}

#[test]
fn solver_converges_to_mittag_leffler() {
    for graded in [false, true] {
        let errs: Vec<f64> = (10..=12).map(|k| ml_error(1 << k, graded)).collect();
        assert!(errs.windows(2).all(|w| w[0] / w[1] >= 1.5), "{errs:?}");
        assert!(errs[2] < 1e-3);
    }
}

#[test]
fn free_power_solution_from_solver() {
    let alpha = 0.4;
    let s = solve_fde(&FdeProblem {
        alpha,
        x0: 0.0,
        y0: gamma(1.0 + alpha).unwrap(),
        q: Coefficient::constant(0.0),
        mesh: Arc::new(Mesh::graded(3.0, 300, 2.0).unwrap()),
    })
    .unwrap();
    for (t, v) in s.x.iter() {
        assert!((v - t.powf(alpha)).abs() < 1e-12);
    }
}

#[test]
fn power_solution_residual_decreases() {
    let (alpha, beta) = (0.5, 0.25);
    let q = Coefficient::power_solution(alpha, beta, 1.0).unwrap();
    let res: Vec<f64> = [2048, 4096, 8192]
        .iter()
        .map(|&n| {
            let x = GridFunction::from_fn(Arc::new(Mesh::graded(10.0, n, 2.0).unwrap()), |t| t.powf(beta)).unwrap();
            residual_fde(&x, &q, alpha).unwrap().max_abs_on(1.0, 10.0).unwrap()
        })
        .collect();
    assert!(res[2] <= 5e-3 && res.windows(2).all(|w| w[1] < w[0]), "{res:?}");
}

#[test]
fn ml_residual_decreases() {
    let res: Vec<f64> = [1024, 2048, 4096]
        .iter()
        .map(|&n| {
            let m = Arc::new(Mesh::graded(10.0, n, 2.0).unwrap());
            let x = GridFunction::from_fn(m, |t| mittag_leffler(1.5, -t.powf(1.5)).unwrap().value).unwrap();
            residual_fde(&x, &Coefficient::constant(1.0), 0.5)
                .unwrap()
                .max_abs_on(0.5, 10.0)
                .unwrap()
        })
        .collect();
    assert!(res.windows(2).all(|w| w[1] < w[0]), "{res:?}");
}

#[test]
fn solver_output_residual_shrinks() {
    let res: Vec<f64> = [512, 1024, 2048]
        .iter()
        .map(|&n| {
            let s = solve_fde(&FdeProblem {
                alpha: 0.6,
                x0: 1.0,
                y0: 0.0,
                q: Coefficient::sinusoid(0.5, 1.0, 2.0),
                mesh: Arc::new(Mesh::uniform(8.0, n).unwrap()),
            })
            .unwrap();
            residual_fde(&s.x, &Coefficient::sinusoid(0.5, 1.0, 2.0), 0.6)
                .unwrap()
                .max_abs_on(0.5, 8.0)
                .unwrap()
        })
        .collect();
    assert!(res.windows(2).all(|w| w[1] < w[0]), "{res:?}");
}
