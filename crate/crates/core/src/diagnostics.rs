//! Riccati variable w = y/x, the sign quantity S = y·(x′ − y), zero crossings
//! and the averaged Riccati bound, where y is the operator value of the
//! solution (x^(α), or 𝒟x for the curvature equation).
//!
//! Along a solution the Riccati form reads
//!
//! ```text
//! w′ + w² + q = (−y·x′ + y²)/x² = −S/x²
//! ```

use serde::{Deserialize, Serialize};

use crate::averaging::kamenev_average;
use crate::error::{domain, Error, Result};
use crate::fracops::GridFunction;
use crate::numeric::{derivative, linear_fit};
use crate::solver::{Coefficient, Solution};

/// Nodes with |x| ≤ MASK_REL·max|x| carry no w or residual.
pub const MASK_REL: f64 = 1e-8;
/// Slack allowed in the bound check.
pub const BOUND_SLACK: f64 = 1e-9;

/// S = y·(x′ − y) node-wise; missing x′ gives missing S.
pub fn sign_quantity(sol: &Solution) -> GridFunction {
    let v = sol
        .y
        .values()
        .iter()
        .zip(sol.xprime.values())
        .map(|(y, xp)| y * (xp - y))
        .collect();
    GridFunction::from_raw(sol.mesh().clone(), v)
}

/// Output of [`riccati_residual`].
#[derive(Debug, Clone)]
pub struct RiccatiResidual {
    /// w = y/x, missing on masked nodes.
    pub w: GridFunction,
    /// R = −S/x², the reported residual.
    pub residual: GridFunction,
    /// R̃ = w′ + w² + q with w′ by three-point differences.
    pub differenced: GridFunction,
    /// max |R − R̃| over nodes where both exist.
    pub max_discrepancy: f64,
    pub masked: usize,
    pub threshold: f64,
}

/// Riccati residual with the default mask MASK_REL·max|x|.
pub fn riccati_residual(sol: &Solution, q: &Coefficient) -> Result<RiccatiResidual> {
    riccati_residual_masked(sol, q, MASK_REL)
}

/// Riccati residual masking nodes with |x| ≤ mask_rel·max|x|.
pub fn riccati_residual_masked(sol: &Solution, q: &Coefficient, mask_rel: f64) -> Result<RiccatiResidual> {
    let op = "riccati_residual";
    let threshold = mask_rel * sol.x.max_abs().unwrap_or(0.0);
    let s = sign_quantity(sol);
    let x = sol.x.values();
    let keep = |xv: f64| xv.abs() > threshold;
    let masked = x.iter().filter(|&&xv| !keep(xv)).count();

    let w: Vec<f64> = x
        .iter()
        .zip(sol.y.values())
        .map(|(&xv, y)| if keep(xv) { y / xv } else { f64::NAN })
        .collect();
    let residual: Vec<f64> = x
        .iter()
        .zip(s.values())
        .map(|(&xv, sv)| if keep(xv) { -sv / (xv * xv) } else { f64::NAN })
        .collect();
    if residual.iter().all(|r| r.is_nan()) {
        return Err(Error::EmptyResult { op });
    }
    let w = GridFunction::from_raw(sol.mesh().clone(), w);
    let differenced = riccati_lhs(&w, q);
    let max_discrepancy = residual
        .iter()
        .zip(differenced.values())
        .filter(|(a, b)| !a.is_nan() && !b.is_nan())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    Ok(RiccatiResidual {
        w,
        residual: GridFunction::from_raw(sol.mesh().clone(), residual),
        differenced,
        max_discrepancy,
        masked,
        threshold,
    })
}

/// w′ + w² + q for samples of w, with w′ by three-point differences. Nodes
/// where q is undefined or the stencil touches a missing w are missing.
pub fn riccati_lhs(w: &GridFunction, q: &Coefficient) -> GridFunction {
    let dw = derivative(w.nodes(), w.values());
    let v = w
        .iter()
        .zip(dw)
        .map(|((t, wv), d)| match q.eval(t) {
            Ok(qv) => d + wv * wv + qv,
            Err(_) => f64::NAN,
        })
        .collect();
    GridFunction::from_raw(w.mesh().clone(), v)
}

/// A strict sign change between two consecutive present, nonzero samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Crossing {
    pub t: f64,
    /// true when the later sample is negative.
    pub to_negative: bool,
}

/// Crossing times of `f`. Missing (NaN) and exactly zero samples are
/// skipped, so each reported time lies strictly inside the interval between
/// two consecutive remaining nodes with opposite signs. With `refine` the time
/// is the root of the linear interpolant, otherwise the interval midpoint.
pub fn detect_sign_changes(f: &GridFunction, refine: bool) -> Vec<f64> {
    crossings(f, refine).into_iter().map(|c| c.t).collect()
}

/// [`detect_sign_changes`] with the direction of each change.
pub fn crossings(f: &GridFunction, refine: bool) -> Vec<Crossing> {
    let mut out = Vec::new();
    let mut prev: Option<(f64, f64)> = None;
    for (t, v) in f.iter() {
        if v.is_nan() || v == 0.0 {
            continue;
        }
        if let Some((ta, va)) = prev {
            if (va < 0.0) != (v < 0.0) {
                out.push(Crossing {
                    t: crossing_time(ta, va, t, v, refine),
                    to_negative: v < 0.0,
                });
            }
        }
        prev = Some((t, v));
    }
    out
}

fn crossing_time(ta: f64, va: f64, tb: f64, vb: f64, refine: bool) -> f64 {
    let mid = 0.5 * (ta + tb);
    if !refine {
        return mid;
    }
    let root = ta + (tb - ta) * (va / (va - vb));
    if root > ta && root < tb {
        root
    } else {
        mid
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub epsilon: f64,
    pub t_start: f64,
    pub t: f64,
    pub w_start: f64,
    /// (1/t^ε) ∫_T^t (t − s)^ε q(s) ds
    pub lhs: f64,
    /// |w(T)| + ε²/(4(ε − 1)t)
    pub rhs: f64,
    pub holds: bool,
}

/// Compares the Kamenev average over [T, t] with |w(T)| + ε²/(4(ε−1)t). The
/// inequality is implied when w′ + w² + q ≤ 0 on [T, t]; that hypothesis is
/// the caller's to verify.
pub fn kamenev_bound_check(w_start: f64, q: &Coefficient, epsilon: f64, t_start: f64, t: f64) -> Result<BoundCheck> {
    if !(epsilon > 1.0) {
        return Err(domain(
            "kamenev_bound_check",
            format!("epsilon = {epsilon} must exceed 1"),
        ));
    }
    if !w_start.is_finite() {
        return Err(domain("kamenev_bound_check", "w(T) must be finite"));
    }
    let lhs = kamenev_average(q, epsilon, t_start, t)?;
    let rhs = w_start.abs() + epsilon * epsilon / (4.0 * (epsilon - 1.0) * t);
    Ok(BoundCheck {
        epsilon,
        t_start,
        t,
        w_start,
        lhs,
        rhs,
        holds: lhs <= rhs + BOUND_SLACK,
    })
}

/// Mean and trend of y over a trailing window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimitEstimate {
    pub mean: f64,
    pub slope: f64,
    pub window_start: f64,
    pub nodes: usize,
}

/// Mean and least-squares slope of y over the last `window_fraction` of the
/// nodes. Purely descriptive.
pub fn limit_estimate_xalpha(sol: &Solution, window_fraction: f64) -> Result<LimitEstimate> {
    let n = sol.len();
    if n < 10 {
        return Err(Error::Size {
            op: "limit_estimate_xalpha",
            needed: 10,
            got: n,
        });
    }
    if !(window_fraction > 0.0 && window_fraction < 1.0) {
        return Err(domain("limit_estimate_xalpha", "window_fraction must lie in (0, 1)"));
    }
    let k = ((window_fraction * n as f64).ceil() as usize).clamp(2, n);
    let (ts, ys): (Vec<f64>, Vec<f64>) = sol.y.iter().skip(n - k).filter(|(_, v)| !v.is_nan()).unzip();
    if ys.is_empty() {
        return Err(Error::EmptyResult {
            op: "limit_estimate_xalpha",
        });
    }
    let mean = ys.iter().sum::<f64>() / ys.len() as f64;
    let (slope, _, _) = linear_fit(&ts, &ys);
    Ok(LimitEstimate {
        mean,
        slope,
        window_start: sol.mesh().nodes()[n - k],
        nodes: ys.len(),
    })
}

/// Everything computed by [`diagnose`]. The grid functions are kept for CSV
/// output; the scalar parts serialize to JSON.
#[derive(Debug, Clone, Serialize)]
pub struct DiagnosticsReport {
    #[serde(skip)]
    pub w: GridFunction,
    #[serde(skip)]
    pub riccati_residual: GridFunction,
    #[serde(skip)]
    pub s: GridFunction,
    pub x_zero_crossings: Vec<f64>,
    /// Times where S changes sign into negative values.
    pub s_negative_times: Vec<f64>,
    pub masked_nodes: usize,
    pub mask_threshold: f64,
    /// max |R − R̃| (two forms of the Riccati residual).
    pub riccati_consistency: f64,
    pub max_residual: Option<f64>,
    pub bound_checks: Vec<BoundCheck>,
    pub limit: Option<LimitEstimate>,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticsOptions {
    pub mask_rel: f64,
    pub refine: bool,
    /// Trailing window for the limit estimate; None skips it.
    pub window_fraction: Option<f64>,
    /// (ε, T, t) triples for bound checks, w(T) taken from the solution.
    pub bound_checks: Vec<(f64, f64, f64)>,
}

impl Default for DiagnosticsOptions {
    fn default() -> Self {
        Self {
            mask_rel: MASK_REL,
            refine: true,
            window_fraction: Some(0.25),
            bound_checks: Vec::new(),
        }
    }
}

/// Runs every diagnostic on a solution.
pub fn diagnose(sol: &Solution, q: &Coefficient, opts: &DiagnosticsOptions) -> Result<DiagnosticsReport> {
    let rr = riccati_residual_masked(sol, q, opts.mask_rel)?;
    let s = sign_quantity(sol);
    let x_zero_crossings = detect_sign_changes(&sol.x, opts.refine);
    let s_negative_times = crossings(&s, opts.refine)
        .into_iter()
        .filter(|c| c.to_negative)
        .map(|c| c.t)
        .collect();
    let mut notes = vec![
        format!(
            "riccati_residual: max |(w' + w^2 + q) - (-S/x^2)| = {:e} over unmasked nodes",
            rr.max_discrepancy
        ),
        "sign_quantity: finite window only; eventual sign is evidence, not proof".to_string(),
    ];
    if sol.xprime.is_missing(0) {
        notes.push("sign_quantity: x' is singular at t = 0, S missing there".to_string());
    }
    let mut bound_checks = Vec::new();
    for &(eps, t_start, t) in &opts.bound_checks {
        let w_start =
            rr.w.interpolate(t_start)
                .filter(|v| !v.is_nan())
                .ok_or_else(|| domain("diagnose", format!("w unavailable at T = {t_start}")))?;
        let window_ok = rr
            .residual
            .iter()
            .filter(|(s, _)| *s >= t_start && *s <= t)
            .all(|(_, r)| r <= 1e-8);
        if !window_ok {
            notes.push(format!(
                "kamenev_bound_check on [{t_start}, {t}]: residual exceeds 1e-8 somewhere, hypothesis not met"
            ));
        }
        bound_checks.push(kamenev_bound_check(w_start, q, eps, t_start, t)?);
    }
    let limit = match opts.window_fraction {
        Some(f) if sol.len() >= 10 => Some(limit_estimate_xalpha(sol, f)?),
        _ => None,
    };
    Ok(DiagnosticsReport {
        max_residual: rr.residual.max_abs(),
        w: rr.w,
        riccati_residual: rr.residual,
        s,
        x_zero_crossings,
        s_negative_times,
        masked_nodes: rr.masked,
        mask_threshold: rr.threshold,
        riccati_consistency: rr.max_discrepancy,
        bound_checks,
        limit,
        notes,
    })
}
