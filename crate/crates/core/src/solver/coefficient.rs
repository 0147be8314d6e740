use std::sync::Arc;

use crate::error::{domain, Result};
use crate::fracops::{GridFunction, Mesh};
use crate::specialfn::gamma;

#[derive(Debug, Clone, PartialEq)]
pub enum CoefficientFamily {
    /// q(t) = a
    Constant { a: f64 },
    /// q(t) = c·t^p
    PowerLaw { c: f64, p: f64 },
    /// q(t) = a·sin(ω t) + b
    Sinusoid { a: f64, b: f64, omega: f64 },
    /// Linear interpolation of samples, inside their mesh hull only.
    Tabulated(GridFunction),
}

/// The functional coefficient q of the equation, defined on
/// [domain_start, ∞) (or on the table hull for tabulated data).
///
/// Where q has to be integrated from 0 (integrability conditions), it is
/// taken to vanish below `domain_start`.
#[derive(Debug, Clone, PartialEq)]
pub struct Coefficient {
    family: CoefficientFamily,
    domain_start: f64,
}

impl Coefficient {
    pub fn constant(a: f64) -> Self {
        Self {
            family: CoefficientFamily::Constant { a },
            domain_start: 0.0,
        }
    }

    /// c·t^p on [domain_start, ∞). Negative exponents need domain_start > 0.
    pub fn power_law(c: f64, p: f64, domain_start: f64) -> Result<Self> {
        if !(c.is_finite() && p.is_finite() && domain_start.is_finite() && domain_start >= 0.0) {
            return Err(domain(
                "coefficient",
                "power law parameters must be finite, domain_start >= 0",
            ));
        }
        if p < 0.0 && domain_start <= 0.0 {
            return Err(domain(
                "coefficient",
                format!("power law with exponent {p} < 0 needs domain_start > 0"),
            ));
        }
        Ok(Self {
            family: CoefficientFamily::PowerLaw { c, p },
            domain_start,
        })
    }

    /// a·sin(ω t) + b.
    pub fn sinusoid(a: f64, b: f64, omega: f64) -> Self {
        Self {
            family: CoefficientFamily::Sinusoid { a, b, omega },
            domain_start: 0.0,
        }
    }

    pub fn tabulated(samples: GridFunction) -> Result<Self> {
        if samples.missing_count() > 0 {
            return Err(domain("coefficient", "tabulated q has missing samples"));
        }
        let domain_start = samples.mesh().start();
        Ok(Self {
            family: CoefficientFamily::Tabulated(samples),
            domain_start,
        })
    }

    /// The coefficient C(α,β)·t^{−1−α} for which x(t) = t^β solves the
    /// equation, C(α,β) = (α−β)Γ(1+β)/Γ(1+β−α).
    pub fn power_solution(alpha: f64, beta: f64, domain_start: f64) -> Result<Self> {
        Self::power_law(power_solution_constant(alpha, beta)?, -1.0 - alpha, domain_start)
    }

    pub fn family(&self) -> &CoefficientFamily {
        &self.family
    }

    pub fn domain_start(&self) -> f64 {
        self.domain_start
    }

    /// Upper end of the domain (finite only for tabulated data).
    pub fn domain_end(&self) -> f64 {
        match &self.family {
            CoefficientFamily::Tabulated(g) => g.mesh().end(),
            _ => f64::INFINITY,
        }
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        if !(t >= self.domain_start) {
            return Err(domain(
                "coefficient",
                format!("q evaluated at t = {t} below its domain start {}", self.domain_start),
            ));
        }
        Ok(match &self.family {
            CoefficientFamily::Constant { a } => *a,
            CoefficientFamily::PowerLaw { c, p } => c * t.powf(*p),
            CoefficientFamily::Sinusoid { a, b, omega } => a * (omega * t).sin() + b,
            CoefficientFamily::Tabulated(g) => g.interpolate(t).ok_or_else(|| {
                domain(
                    "coefficient",
                    format!(
                        "t = {t} outside the table hull [{}, {}]",
                        g.mesh().start(),
                        g.mesh().end()
                    ),
                )
            })?,
        })
    }

    /// q sampled on every node of `mesh`.
    pub fn sample(&self, mesh: &Arc<Mesh>) -> Result<GridFunction> {
        GridFunction::try_from_fn(mesh.clone(), |t| self.eval(t))
    }

    /// c·q.
    pub fn scaled(&self, factor: f64) -> Self {
        let family = match &self.family {
            CoefficientFamily::Constant { a } => CoefficientFamily::Constant { a: factor * a },
            CoefficientFamily::PowerLaw { c, p } => CoefficientFamily::PowerLaw { c: factor * c, p: *p },
            CoefficientFamily::Sinusoid { a, b, omega } => CoefficientFamily::Sinusoid {
                a: factor * a,
                b: factor * b,
                omega: *omega,
            },
            CoefficientFamily::Tabulated(g) => CoefficientFamily::Tabulated(g.map(|_, v| factor * v)),
        };
        Self {
            family,
            domain_start: self.domain_start,
        }
    }

    /// Short human-readable description, used in reports.
    pub fn describe(&self) -> String {
        match &self.family {
            CoefficientFamily::Constant { a } => format!("constant({a})"),
            CoefficientFamily::PowerLaw { c, p } => {
                format!("power_law({c}, {p}) on [{}, inf)", self.domain_start)
            }
            CoefficientFamily::Sinusoid { a, b, omega } => format!("sinusoid({a}, {b}, {omega})"),
            CoefficientFamily::Tabulated(g) => format!(
                "tabulated({} samples on [{}, {}])",
                g.len(),
                g.mesh().start(),
                g.mesh().end()
            ),
        }
    }
}

/// C(α,β) = (α−β)Γ(1+β)/Γ(1+β−α).
pub fn power_solution_constant(alpha: f64, beta: f64) -> Result<f64> {
    Ok((alpha - beta) * gamma(1.0 + beta)? / gamma(1.0 + beta - alpha)?)
}
