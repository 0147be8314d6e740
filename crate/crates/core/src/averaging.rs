//! The Kamenev average
//!
//! ```text
//! K(t) = (1/t^ε) ∫_{t0}^{t} (t − s)^ε q(s) ds
//! ```
//!
//! its finite-horizon classification, and the integrability conditions
//! ∫ t^{1+α}|q| < ∞, ∫ t^α|q| < Γ(1+α).

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::numeric::{gauss_legendre, linear_fit};
use crate::solver::{Coefficient, CoefficientFamily};
use crate::specialfn::gamma;

/// Flatness band for `bounded_evidence`: sup K ≤ (1 + band)·K(mid).
pub const FLAT_BAND: f64 = 0.05;
/// Largest relative rms residual of the top-half linear fit accepted as
/// `diverging_evidence`.
pub const FIT_RESIDUAL_MAX: f64 = 0.1;
/// Doubling ratios at or below this are read as a convergent tail.
pub const DOUBLING_BOUNDED_MAX: f64 = 0.95;
/// Doubling ratios at or above this are read as sustained growth.
pub const DOUBLING_DIVERGING_MIN: f64 = 1.0;

const MIN_PANELS: usize = 64;
const PANELS_PER_UNIT: f64 = 8.0;
const PANELS_PER_PERIOD: f64 = 16.0;
const MAX_PANELS: usize = 1 << 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KamenevParams {
    pub epsilon: f64,
    pub t0: f64,
    pub schedule: Vec<f64>,
}

impl KamenevParams {
    /// ε must exceed 1; values in (1, 2] are accepted but flagged by
    /// [`KamenevParams::epsilon_warning`]. The schedule needs at least four
    /// strictly increasing times, all beyond t0.
    pub fn new(epsilon: f64, t0: f64, schedule: Vec<f64>) -> Result<Self> {
        if !(epsilon > 1.0 && epsilon.is_finite()) {
            return Err(domain("kamenev", format!("epsilon = {epsilon} must exceed 1")));
        }
        if !(t0 > 0.0 && t0.is_finite()) {
            return Err(domain("kamenev", format!("t0 = {t0} must be positive")));
        }
        if schedule.len() < 4 {
            return Err(domain("kamenev", "schedule needs at least 4 times"));
        }
        if !(schedule[0] > t0) || schedule.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(domain("kamenev", "schedule must increase strictly and start after t0"));
        }
        if schedule.iter().any(|t| !t.is_finite()) {
            return Err(domain("kamenev", "schedule times must be finite"));
        }
        Ok(Self { epsilon, t0, schedule })
    }

    /// ε = 3, t0 = 1, schedule 10, 20, …, 200.
    pub fn standard() -> Self {
        Self::new(3.0, 1.0, default_schedule()).expect("valid defaults")
    }

    /// True for ε ∈ (1, 2], the classical regime below the usual ε > 2.
    pub fn epsilon_warning(&self) -> bool {
        self.epsilon <= 2.0
    }
}

/// 10, 20, …, 200.
pub fn default_schedule() -> Vec<f64> {
    (1..=20).map(|k| 10.0 * k as f64).collect()
}

fn check_range(q: &Coefficient, op: &'static str, a: f64, b: f64) -> Result<()> {
    if a < q.domain_start() || b > q.domain_end() {
        return Err(domain(
            op,
            format!(
                "q is defined on [{}, {}], not on [{a}, {b}]",
                q.domain_start(),
                q.domain_end()
            ),
        ));
    }
    Ok(())
}

/// Panel count for ∫_a^b of something involving q: grows with the length and,
/// for sinusoids, with the number of periods.
fn panels_for(q: &Coefficient, a: f64, b: f64) -> usize {
    let len = b - a;
    let mut p = (PANELS_PER_UNIT * len).ceil();
    if let CoefficientFamily::Sinusoid { omega, .. } = q.family() {
        p = p.max(PANELS_PER_PERIOD * len * omega.abs() / std::f64::consts::TAU);
    }
    if let CoefficientFamily::Tabulated(g) = q.family() {
        p = p.max(4.0 * g.len() as f64);
    }
    (p as usize).clamp(MIN_PANELS, MAX_PANELS)
}

/// K(t) by composite 5-point Gauss-Legendre on [t0, t].
pub fn kamenev_average(q: &Coefficient, epsilon: f64, t0: f64, t: f64) -> Result<f64> {
    if !(t0 > 0.0 && t > t0 && t.is_finite()) {
        return Err(domain(
            "kamenev_average",
            format!("need t > t0 > 0, got t0 = {t0}, t = {t}"),
        ));
    }
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(domain(
            "kamenev_average",
            format!("epsilon = {epsilon} must be positive"),
        ));
    }
    check_range(q, "kamenev_average", t0, t)?;
    // ((t − s)/t)^ε keeps the integrand O(1) for large t.
    gauss_legendre(t0, t, panels_for(q, t0, t), |s| {
        Ok(((t - s) / t).powf(epsilon) * q.eval(s)?)
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    DivergingEvidence,
    BoundedEvidence,
    Inconclusive,
}

/// Least-squares line K ≈ slope·t + intercept over the top half of the
/// schedule; `rel_residual` is the rms residual over mean |K|.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthFit {
    pub slope: f64,
    pub intercept: f64,
    pub rel_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KamenevVerdict {
    /// (t, K(t)) along the schedule.
    pub values: Vec<(f64, f64)>,
    pub verdict: Verdict,
    pub growth_fit: GrowthFit,
    /// [K(T) − K(T/2)] / [K(T/2) − K(T/4)] with T the last schedule time;
    /// absent when T/4 ≤ t0 or the lower increment is not positive.
    pub doubling_ratio: Option<f64>,
    /// sup K ≤ (1 + FLAT_BAND)·K(mid).
    pub flat: bool,
    pub epsilon_warning: bool,
}

/// Evaluates K along the schedule and classifies the trend.
///
/// * `bounded_evidence`: K is flat (sup ≤ 1.05·K(mid)), or its last doubling
///   increment is not positive, or the doubling ratio is at most 0.95 (the
///   increments shrink geometrically, as for a convergent tail).
/// * `diverging_evidence`: none of the above, K strictly increasing over the
///   top half with positive fitted slope and relative fit residual below 0.1,
///   and doubling ratio at least 1.
/// * `inconclusive` otherwise.
pub fn classify_kamenev(q: &Coefficient, params: &KamenevParams) -> Result<KamenevVerdict> {
    let params = KamenevParams::new(params.epsilon, params.t0, params.schedule.clone())?;
    let (eps, t0) = (params.epsilon, params.t0);
    let values = params
        .schedule
        .iter()
        .map(|&t| Ok((t, kamenev_average(q, eps, t0, t)?)))
        .collect::<Result<Vec<_>>>()?;

    let mid = (values.len() - 1) / 2;
    let k_mid = values[mid].1;
    let sup = values.iter().map(|v| v.1).fold(f64::NEG_INFINITY, f64::max);
    let flat = sup <= (1.0 + FLAT_BAND) * k_mid;

    let top = &values[mid..];
    let ts: Vec<f64> = top.iter().map(|v| v.0).collect();
    let ks: Vec<f64> = top.iter().map(|v| v.1).collect();
    let (slope, intercept, rms) = linear_fit(&ts, &ks);
    let mean_abs = ks.iter().map(|k| k.abs()).sum::<f64>() / ks.len() as f64;
    let rel_residual = if mean_abs > 0.0 { rms / mean_abs } else { f64::INFINITY };
    let increasing = ks.windows(2).all(|w| w[1] > w[0]);

    let t_last = values[values.len() - 1].0;
    let k_last = values[values.len() - 1].1;
    let (mut doubling_ratio, mut last_increment) = (None, None);
    if t_last / 4.0 > t0 {
        let k_half = kamenev_average(q, eps, t0, t_last / 2.0)?;
        let k_quarter = kamenev_average(q, eps, t0, t_last / 4.0)?;
        let (d1, d2) = (k_half - k_quarter, k_last - k_half);
        last_increment = Some(d2);
        if d1 > 0.0 {
            doubling_ratio = Some(d2 / d1);
        }
    }

    let bounded =
        flat || last_increment.is_some_and(|d| d <= 0.0) || doubling_ratio.is_some_and(|r| r <= DOUBLING_BOUNDED_MAX);
    let diverging = !bounded
        && increasing
        && slope > 0.0
        && rel_residual < FIT_RESIDUAL_MAX
        && doubling_ratio.map_or(last_increment.is_none(), |r| r >= DOUBLING_DIVERGING_MIN);
    let verdict = if bounded {
        Verdict::BoundedEvidence
    } else if diverging {
        Verdict::DivergingEvidence
    } else {
        Verdict::Inconclusive
    };
    Ok(KamenevVerdict {
        values,
        verdict,
        growth_fit: GrowthFit {
            slope,
            intercept,
            rel_residual,
        },
        doubling_ratio,
        flat,
        epsilon_warning: params.epsilon_warning(),
    })
}

/// How an integral in the condition check was decided.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum IntegralStatus {
    /// Convergent, with its value (closed form for closed-form families).
    Finite {
        value: f64,
    },
    Diverging,
    /// Tabulated q: the tail beyond the table cannot be decided.
    Inconclusive,
}

impl IntegralStatus {
    pub fn is_finite(&self) -> bool {
        matches!(self, IntegralStatus::Finite { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Passes {
    Yes,
    No,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntegrabilityReport {
    /// ∫_0^∞ t^{1+α}|q(t)| dt
    pub i1: IntegralStatus,
    /// ∫_0^∞ t^α |q(t)| dt
    pub i2: IntegralStatus,
    /// Numerical values of both integrals over [0, horizon], q = 0 below its
    /// domain start. `horizon` is the tail horizon, cut to the table end for
    /// tabulated q.
    pub partial_i1: f64,
    pub partial_i2: f64,
    pub horizon: f64,
    /// Γ(1+α), the bound on I₂.
    pub gamma_bound: f64,
    pub passes: Passes,
}

/// Checks ∫ t^{1+α}|q| < ∞ and ∫ t^α|q| < Γ(1+α) over (0, ∞), with q taken
/// to vanish below its domain start.
///
/// Closed-form families are decided from their exponents; tabulated q is
/// integrated up to the end of its table and reported inconclusive unless the
/// partial I₂ already exceeds Γ(1+α).
pub fn check_integrability_conditions(q: &Coefficient, alpha: f64, tail_horizon: f64) -> Result<IntegrabilityReport> {
    if !(tail_horizon > 0.0 && tail_horizon.is_finite()) {
        return Err(domain(
            "integrability",
            format!("tail_horizon = {tail_horizon} must be positive"),
        ));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(domain("integrability", format!("alpha = {alpha} not in (0, 1)")));
    }
    let gamma_bound = gamma(1.0 + alpha)?;
    let start = q.domain_start();
    let horizon = tail_horizon.min(q.domain_end());
    let partial = |k: f64| -> Result<f64> {
        if horizon <= start {
            return Ok(0.0);
        }
        gauss_legendre(start, horizon, panels_for(q, start, horizon), |t| {
            Ok(t.powf(k) * q.eval(t)?.abs())
        })
    };
    let partial_i1 = partial(1.0 + alpha)?;
    let partial_i2 = partial(alpha)?;

    let decide = |k: f64| -> IntegralStatus {
        match q.family() {
            CoefficientFamily::Constant { a } => {
                if *a == 0.0 {
                    IntegralStatus::Finite { value: 0.0 }
                } else {
                    IntegralStatus::Diverging
                }
            }
            CoefficientFamily::PowerLaw { c, p } => {
                let m = k + p;
                if *c == 0.0 {
                    IntegralStatus::Finite { value: 0.0 }
                } else if m < -1.0 && start > 0.0 {
                    IntegralStatus::Finite {
                        value: c.abs() * start.powf(m + 1.0) / -(m + 1.0),
                    }
                } else {
                    IntegralStatus::Diverging
                }
            }
            CoefficientFamily::Sinusoid { a, b, .. } => {
                if *a == 0.0 && *b == 0.0 {
                    IntegralStatus::Finite { value: 0.0 }
                } else {
                    IntegralStatus::Diverging
                }
            }
            CoefficientFamily::Tabulated(_) => IntegralStatus::Inconclusive,
        }
    };
    let (i1, i2) = (decide(1.0 + alpha), decide(alpha));
    let passes = match (i1, i2) {
        (IntegralStatus::Finite { .. }, IntegralStatus::Finite { value }) => {
            if value < gamma_bound {
                Passes::Yes
            } else {
                Passes::No
            }
        }
        (IntegralStatus::Diverging, _) | (_, IntegralStatus::Diverging) => Passes::No,
        // I₂'s integrand is non-negative, so a partial value past the bound settles it.
        _ if partial_i2 >= gamma_bound => Passes::No,
        _ => Passes::Inconclusive,
    };
    Ok(IntegrabilityReport {
        i1,
        i2,
        partial_i1,
        partial_i2,
        horizon,
        gamma_bound,
        passes,
    })
}
