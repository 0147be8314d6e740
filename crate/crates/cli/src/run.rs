//! Scenario pipelines behind each subcommand.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use fdelab::averaging::{check_integrability_conditions, classify_kamenev};
use fdelab::diagnostics::{crossings, diagnose, sign_quantity, Crossing};
use fdelab::fracops::caputo_derivative;
use fdelab::solver::{residual_fde, solve_curvature, solve_fde, CurvatureProblem, FdeProblem, Operator};
use fdelab::specialfn::{gamma, mittag_leffler, ml_zero_spacing, MittagLeffler};
use fdelab::{CoefficientFamily, Error, GridFunction, Mesh, Solution};
use serde_json::{json, Value};

use crate::output::{num, sourced, write_csv, write_rows, Report};
use crate::scenario::{Equation, PowerReference, Scenario};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    Solve,
    Residual,
    Kamenev,
    Conditions,
    Diagnose,
    Converge,
    Zeros,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Solve => "solve",
            Command::Residual => "residual",
            Command::Kamenev => "kamenev",
            Command::Conditions => "conditions",
            Command::Diagnose => "diagnose",
            Command::Converge => "converge",
            Command::Zeros => "zeros",
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RunError {
    #[error("{0}")]
    Invalid(String),
    #[error("{0}")]
    Numerical(String),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Invalid(_) => 2,
            RunError::Numerical(_) => 3,
        }
    }
}

impl From<Error> for RunError {
    fn from(e: Error) -> Self {
        match e {
            Error::Divergence { .. }
            | Error::GradientBlowup { .. }
            | Error::AccuracyLoss { .. }
            | Error::EmptyResult { .. } => RunError::Numerical(e.to_string()),
            Error::Domain { .. } | Error::Pole { .. } | Error::Size { .. } | Error::MeshMismatch { .. } => {
                RunError::Invalid(e.to_string())
            }
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> RunError + '_ {
    move |e| RunError::Invalid(format!("cannot write {}: {e}", path.display()))
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub out: Option<PathBuf>,
    /// Mesh size override; a list for `converge`.
    pub n: Vec<usize>,
    /// Several scenarios share `out`, so each gets a subdirectory.
    pub batch: bool,
}

/// Runs one scenario and returns a one-line summary.
pub fn run_scenario(cmd: Command, sc: &Scenario, opts: &RunOptions) -> Result<String, RunError> {
    let dir = match &opts.out {
        Some(o) if opts.batch => o.join(&sc.name),
        Some(o) => o.clone(),
        None => sc.output_dir.clone(),
    };
    if cmd != Command::Converge && opts.n.len() > 1 {
        return Err(RunError::Invalid(
            "--n takes a single value except for `converge`".into(),
        ));
    }
    let n = opts.n.first().copied().unwrap_or(sc.mesh.n);
    if n < 2 {
        return Err(RunError::Invalid(format!("--n {n} must be at least 2")));
    }
    fs::create_dir_all(&dir).map_err(io_err(&dir))?;

    let mut report = Report::default();
    let result = match cmd {
        Command::Solve => cmd_solve(sc, n, &dir, &mut report),
        Command::Residual => cmd_residual(sc, n, &dir, &mut report),
        Command::Kamenev => cmd_kamenev(sc, &dir, &mut report),
        Command::Conditions => cmd_conditions(sc, &mut report),
        Command::Diagnose => cmd_diagnose(sc, n, &dir, &mut report),
        Command::Converge => cmd_converge(sc, &opts.n, &dir, &mut report),
        Command::Zeros => cmd_zeros(sc, n, &dir, &mut report),
    };
    let failure = match &result {
        Err(RunError::Invalid(_)) => return result,
        Err(RunError::Numerical(m)) => Some(m.as_str()),
        Ok(_) => None,
    };
    report
        .write(&dir, metadata(cmd, sc, n), failure)
        .map_err(io_err(&dir))?;
    result.map(|s| format!("{}: {s} -> {}", sc.name, dir.display()))
}

fn metadata(cmd: Command, sc: &Scenario, n: usize) -> Value {
    let (equation, initial) = match sc.equation {
        Equation::Fractional { alpha, y0 } => ("fractional", json!({"alpha": alpha, "x0": sc.x0, "y0": y0})),
        Equation::Curvature { u0 } => ("curvature", json!({"x0": sc.x0, "u0": u0})),
    };
    json!({
        "source": "config",
        "scenario": sc.name,
        "config": sc.source.display().to_string(),
        "command": cmd.name(),
        "equation": equation,
        "parameters": initial,
        "q": sc.q.describe(),
        "mesh": {
            "T": sc.mesh.t_end,
            "N": n,
            "start": sc.mesh.start,
            "grading": sc.mesh.grading,
        },
        "tolerances": {
            "mask_rel": sc.diagnostics.mask_rel,
            "residual_tol": sc.residual.as_ref().map(|r| r.tol),
            "ml_rel_budget": MittagLeffler::default().rel_budget,
        },
    })
}

/// Samples of x = t^β with the exact x^(α) and x′; missing where singular.
fn power_solution(
    alpha: f64,
    r: PowerReference,
    q: &fdelab::Coefficient,
    mesh: &Arc<Mesh>,
) -> Result<Solution, RunError> {
    let beta = r.beta;
    let c = gamma(1.0 + beta)? / gamma(1.0 + beta - alpha)?;
    let power = |k: f64, p: f64, t: f64| {
        if t > 0.0 {
            k * t.powf(p)
        } else if p > 0.0 {
            0.0
        } else if p == 0.0 {
            k
        } else {
            f64::NAN
        }
    };
    let x = GridFunction::from_fn(mesh.clone(), |t| power(1.0, beta, t))?;
    let y = GridFunction::from_fn(mesh.clone(), |t| power(c, beta - alpha, t))?;
    let xp = GridFunction::from_fn(mesh.clone(), |t| power(beta, beta - 1.0, t))?;
    Ok(Solution::from_samples(Operator::Caputo { alpha }, x, y, xp, q)?)
}

/// The trajectory of a scenario and the operation that produced it.
fn trajectory(sc: &Scenario, mesh: Arc<Mesh>) -> Result<(Solution, &'static str), RunError> {
    match (sc.equation, sc.reference) {
        (Equation::Fractional { alpha, .. }, Some(r)) => {
            Ok((power_solution(alpha, r, &sc.q, &mesh)?, "closed_form_power"))
        }
        (Equation::Fractional { alpha, y0 }, None) => Ok((
            solve_fde(&FdeProblem {
                alpha,
                x0: sc.x0,
                y0,
                q: sc.q.clone(),
                mesh,
            })?,
            "solve_fde",
        )),
        (Equation::Curvature { u0 }, _) => Ok((
            solve_curvature(&CurvatureProblem {
                x0: sc.x0,
                u0,
                q: sc.q.clone(),
                mesh,
            })?,
            "solve_curvature",
        )),
    }
}

fn write_solution(dir: &Path, sol: &Solution) -> Result<(), RunError> {
    let path = dir.join("solution.csv");
    write_csv(
        &path,
        &["t", "x", "y", "xprime", "yprime"],
        &[
            sol.x.nodes(),
            sol.x.values(),
            sol.y.values(),
            sol.xprime.values(),
            sol.yprime.values(),
        ],
    )
    .map_err(io_err(&path))
}

fn solution_summary(sol: &Solution, refine: bool) -> Value {
    let last = sol.len() - 1;
    let xs = sol.x.values();
    json!({
        "nodes": sol.len(),
        "x_end": xs[last],
        "y_end": sol.y.values()[last],
        "x_min": xs.iter().copied().fold(f64::INFINITY, f64::min),
        "x_max": xs.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        "x_sign_changes": crossings(&sol.x, refine).len(),
    })
}

fn cmd_solve(sc: &Scenario, n: usize, dir: &Path, report: &mut Report) -> Result<String, RunError> {
    let (sol, source) = trajectory(sc, sc.mesh.build(n)?)?;
    write_solution(dir, &sol)?;
    report.insert(
        "solution",
        sourced(source, solution_summary(&sol, sc.diagnostics.refine)),
    );
    Ok(format!(
        "solved on {} nodes, x(T) = {}",
        sol.len(),
        num(sol.x.values()[sol.len() - 1])
    ))
}

fn cmd_residual(sc: &Scenario, n: usize, dir: &Path, report: &mut Report) -> Result<String, RunError> {
    let Some(alpha) = sc.alpha() else {
        return Err(RunError::Invalid(
            "residual is defined for the fractional equation only".into(),
        ));
    };
    let (sol, source) = trajectory(sc, sc.mesh.build(n)?)?;
    write_solution(dir, &sol)?;
    let r = residual_fde(&sol.x, &sc.q, alpha)?;
    let path = dir.join("residual.csv");
    write_csv(&path, &["t", "residual"], &[r.nodes(), r.values()]).map_err(io_err(&path))?;
    let (lo, hi) = sc
        .residual
        .as_ref()
        .map_or((sc.mesh.start, sc.mesh.t_end), |s| s.window);
    let max = r.max_abs_on(lo, hi);
    let tol = sc.residual.as_ref().map(|s| s.tol);
    let passes = match (max, tol) {
        (Some(m), Some(t)) => Some(m <= t),
        _ => None,
    };
    report.insert(
        "solution",
        sourced(source, solution_summary(&sol, sc.diagnostics.refine)),
    );
    report.insert(
        "residual",
        sourced(
            "residual_fde",
            json!({"window": [lo, hi], "max_abs": max, "tol": tol, "passes": passes}),
        ),
    );
    let verdict = match passes {
        Some(true) => "within tol",
        Some(false) => "ABOVE tol",
        None => "no tol",
    };
    Ok(format!(
        "max |r| on [{lo}, {hi}] = {} ({verdict})",
        max.map_or("n/a".into(), num)
    ))
}

fn cmd_kamenev(sc: &Scenario, dir: &Path, report: &mut Report) -> Result<String, RunError> {
    let v = classify_kamenev(&sc.q, &sc.kamenev)?;
    let (t, k): (Vec<f64>, Vec<f64>) = v.values.iter().copied().unzip();
    let path = dir.join("kamenev.csv");
    write_csv(&path, &["t", "K"], &[&t, &k]).map_err(io_err(&path))?;
    report.insert("kamenev", kamenev_block(sc, &v));
    Ok(format!("Kamenev verdict: {:?}", v.verdict))
}

fn kamenev_block(sc: &Scenario, v: &fdelab::averaging::KamenevVerdict) -> Value {
    let mut b = sourced("classify_kamenev", v);
    b["epsilon"] = json!(sc.kamenev.epsilon);
    b["t0"] = json!(sc.kamenev.t0);
    b
}

fn cmd_conditions(sc: &Scenario, report: &mut Report) -> Result<String, RunError> {
    let Some(alpha) = sc.alpha() else {
        return Err(RunError::Invalid(
            "the integrability conditions need the fractional order".into(),
        ));
    };
    let r = check_integrability_conditions(&sc.q, alpha, sc.horizon)?;
    report.insert("conditions", sourced("check_integrability_conditions", &r));
    Ok(format!("integrability conditions: {:?}", r.passes))
}

/// Runs a side computation of `diagnose`; domain problems are recorded in
/// the report instead of aborting the run.
fn side_block(source: &str, r: fdelab::Result<Value>) -> Result<Value, RunError> {
    match r {
        Ok(v) => Ok(v),
        Err(e) => match RunError::from(e) {
            RunError::Invalid(m) => Ok(json!({"source": source, "skipped": m})),
            numerical => Err(numerical),
        },
    }
}

fn cmd_diagnose(sc: &Scenario, n: usize, dir: &Path, report: &mut Report) -> Result<String, RunError> {
    let (sol, source) = trajectory(sc, sc.mesh.build(n)?)?;
    write_solution(dir, &sol)?;
    report.insert(
        "solution",
        sourced(source, solution_summary(&sol, sc.diagnostics.refine)),
    );
    let q = &sc.q;

    report.insert(
        "kamenev",
        side_block(
            "classify_kamenev",
            classify_kamenev(q, &sc.kamenev).map(|v| kamenev_block(sc, &v)),
        )?,
    );
    if let Some(alpha) = sc.alpha() {
        report.insert(
            "conditions",
            side_block(
                "check_integrability_conditions",
                check_integrability_conditions(q, alpha, sc.horizon)
                    .map(|r| sourced("check_integrability_conditions", r)),
            )?,
        );
    }

    let path = dir.join("diagnostics.csv");
    let summary = if sc.riccati {
        let d = diagnose(&sol, q, &sc.diagnostics)?;
        write_csv(
            &path,
            &["t", "w", "residual", "S"],
            &[d.w.nodes(), d.w.values(), d.riccati_residual.values(), d.s.values()],
        )
        .map_err(io_err(&path))?;
        let s = format!(
            "{} x-crossings, {} masked nodes",
            d.x_zero_crossings.len(),
            d.masked_nodes
        );
        report.insert("diagnostics", sourced("diagnose", &d));
        s
    } else {
        let s = sign_quantity(&sol);
        let nan = vec![f64::NAN; s.len()];
        write_csv(
            &path,
            &["t", "w", "residual", "S"],
            &[s.nodes(), &nan, &nan, s.values()],
        )
        .map_err(io_err(&path))?;
        let z: Vec<f64> = crossings(&sol.x, sc.diagnostics.refine).iter().map(|c| c.t).collect();
        let s = format!("{} x-crossings, Riccati diagnostics off", z.len());
        report.insert("diagnostics", sourced("crossings", json!({"x_zero_crossings": z})));
        s
    };
    Ok(summary)
}

fn cmd_zeros(sc: &Scenario, n: usize, dir: &Path, report: &mut Report) -> Result<String, RunError> {
    let (sol, source) = trajectory(sc, sc.mesh.build(n)?)?;
    let c: Vec<Crossing> = crossings(&sol.x, sc.diagnostics.refine);
    let rows: Vec<Vec<String>> = c
        .iter()
        .map(|c| vec![num(c.t), if c.to_negative { "down" } else { "up" }.to_string()])
        .collect();
    let path = dir.join("zeros.csv");
    write_rows(&path, &["t", "direction"], &rows).map_err(io_err(&path))?;
    let gaps: Vec<f64> = c.windows(2).map(|w| w[1].t - w[0].t).collect();
    let mut block = sourced(
        "crossings",
        json!({"trajectory": source, "crossings": c, "count": c.len(), "gaps": gaps}),
    );
    if let (Equation::Fractional { alpha, .. }, CoefficientFamily::Constant { a }) = (sc.equation, sc.q.family()) {
        if *a > 0.0 && sc.reference.is_none() {
            block["predicted_spacing"] = sourced("ml_zero_spacing", ml_zero_spacing(1.0 + alpha, *a)?);
        }
    }
    report.insert("zeros", block);
    Ok(format!("{} x-crossings", c.len()))
}

/// Closed forms available for a refinement study.
enum Reference {
    /// x ≡ x0 + y0 t^α/Γ(1+α) for q ≡ 0
    Free { alpha: f64, y0: f64 },
    /// x0 E_{1+α}(−a t^{1+α})
    MittagLeffler { alpha: f64, a: f64 },
    /// x0 + t u0/√(1 − u0²) for q ≡ 0
    Linear { u0: f64 },
    /// Caputo derivative of sampled t^β
    Power { alpha: f64, beta: f64 },
}

impl Reference {
    fn of(sc: &Scenario) -> Result<Self, RunError> {
        let constant = match sc.q.family() {
            CoefficientFamily::Constant { a } => Some(*a),
            _ => None,
        };
        match (sc.equation, sc.reference, constant) {
            (Equation::Fractional { alpha, .. }, Some(r), _) => Ok(Reference::Power { alpha, beta: r.beta }),
            (Equation::Fractional { alpha, y0 }, None, Some(0.0)) => Ok(Reference::Free { alpha, y0 }),
            (Equation::Fractional { alpha, y0: 0.0 }, None, Some(a)) => Ok(Reference::MittagLeffler { alpha, a }),
            (Equation::Curvature { u0 }, _, Some(0.0)) => Ok(Reference::Linear { u0 }),
            _ => Err(RunError::Invalid(format!(
                "scenario `{}` has no closed-form reference (needs q = 0, a constant q with y0 = 0, or a power reference)",
                sc.name
            ))),
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            Reference::Free { .. } => "free_power",
            Reference::MittagLeffler { .. } => "mittag_leffler",
            Reference::Linear { .. } => "linear",
            Reference::Power { .. } => "power_caputo",
        }
    }

    /// Error of the numerical result on `mesh` and the magnitude of the
    /// exact values, for the rounding-level test.
    fn error(&self, sc: &Scenario, mesh: Arc<Mesh>) -> Result<(f64, f64), RunError> {
        if let Reference::Power { alpha, beta } = *self {
            let (lo, hi) = sc
                .residual
                .as_ref()
                .map_or((0.5 * sc.mesh.t_end, sc.mesh.t_end), |r| r.window);
            let c = gamma(1.0 + beta)? / gamma(1.0 + beta - alpha)?;
            let x = GridFunction::from_fn(mesh, |t| t.powf(beta))?;
            let d = caputo_derivative(&x, alpha)?;
            let mut err: f64 = 0.0;
            for (t, v) in d.iter().filter(|(t, _)| *t >= lo && *t <= hi) {
                let exact = c * t.powf(beta - alpha);
                err = err.max((v - exact).abs() / exact.abs().max(f64::MIN_POSITIVE));
            }
            return Ok((err, 1.0));
        }
        let (sol, _) = trajectory(sc, mesh)?;
        let mut err: f64 = 0.0;
        let mut scale: f64 = 0.0;
        for (t, v) in sol.x.iter() {
            let exact = self.exact(sc.x0, t)?;
            err = err.max((v - exact).abs());
            scale = scale.max(exact.abs());
        }
        Ok((err, scale))
    }

    fn exact(&self, x0: f64, t: f64) -> Result<f64, RunError> {
        Ok(match *self {
            Reference::Free { alpha, y0 } => x0 + y0 * t.powf(alpha) / gamma(1.0 + alpha)?,
            Reference::MittagLeffler { alpha, a } => {
                let e = match mittag_leffler(1.0 + alpha, -a * t.powf(1.0 + alpha)) {
                    Ok(r) => r.value,
                    Err(Error::AccuracyLoss { value, .. }) => value,
                    Err(e) => return Err(e.into()),
                };
                x0 * e
            }
            Reference::Linear { u0 } => x0 + t * u0 / (1.0 - u0 * u0).sqrt(),
            Reference::Power { .. } => unreachable!("power references compare derivatives"),
        })
    }
}

/// Errors at most this many ulps of the solution scale carry no order.
const ROUNDING_ULPS: f64 = 1e3;

fn cmd_converge(sc: &Scenario, ns_flag: &[usize], dir: &Path, report: &mut Report) -> Result<String, RunError> {
    let reference = Reference::of(sc)?;
    let ns: Vec<usize> = if !ns_flag.is_empty() {
        ns_flag.to_vec()
    } else if let Some(ns) = &sc.convergence_n {
        ns.clone()
    } else {
        [8, 4, 2, 1].iter().map(|d| (sc.mesh.n / d).max(2)).collect()
    };
    if ns.len() < 2 || ns.windows(2).any(|w| w[1] <= w[0]) || ns[0] < 2 {
        return Err(RunError::Invalid(
            "converge needs at least two increasing mesh sizes >= 2".into(),
        ));
    }

    let mut rows: Vec<(usize, f64, Option<f64>)> = Vec::new();
    let mut failure = None;
    for &n in &ns {
        let (err, scale) = match sc
            .mesh
            .build(n)
            .map_err(RunError::from)
            .and_then(|m| reference.error(sc, m))
        {
            Ok(v) => v,
            Err(e @ RunError::Numerical(_)) => {
                failure = Some(e);
                break;
            }
            Err(e) => return Err(e),
        };
        let rounding = err <= ROUNDING_ULPS * f64::EPSILON * scale.max(1.0);
        let order = match rows.last() {
            Some(&(n_prev, e_prev, _)) if !rounding && e_prev > ROUNDING_ULPS * f64::EPSILON * scale.max(1.0) => {
                Some((e_prev / err).ln() / (n as f64 / n_prev as f64).ln())
            }
            _ => None,
        };
        rows.push((n, err, order));
    }

    let cells: Vec<Vec<String>> = rows
        .iter()
        .map(|(n, e, o)| vec![n.to_string(), num(*e), o.map_or("n/a".to_string(), num)])
        .collect();
    let path = dir.join("convergence.csv");
    write_rows(&path, &["N", "error", "order"], &cells).map_err(io_err(&path))?;
    let monotone = rows.windows(2).all(|w| w[1].1 <= w[0].1);
    let table: Vec<Value> = rows
        .iter()
        .map(|(n, e, o)| json!({"N": n, "error": e, "order": o}))
        .collect();
    report.insert(
        "convergence",
        sourced(
            "run_convergence",
            json!({"reference": reference.kind(), "rows": table, "monotone": monotone}),
        ),
    );
    if let Some(e) = failure {
        return Err(e);
    }
    let last = rows.last().expect("at least two rows");
    Ok(format!(
        "{} reference, error {} at N = {}, order {}",
        reference.kind(),
        num(last.1),
        last.0,
        last.2.map_or("n/a".into(), |o| format!("{o:.3}"))
    ))
}
