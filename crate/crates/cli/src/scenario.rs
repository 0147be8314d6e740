//! Scenario files: TOML parsing and validation into [`Scenario`].

use std::ops::Range;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use fdelab::averaging::KamenevParams;
use fdelab::diagnostics::DiagnosticsOptions;
use fdelab::solver::power_solution_constant;
use fdelab::{Coefficient, GridFunction, Mesh};
use serde::Deserialize;
use toml::Spanned;

/// A configuration problem, addressed by file, line and column.
#[derive(Debug, Clone, thiserror::Error)]
#[error("{}:{line}:{col}: {msg}", path.display())]
pub struct ConfigError {
    pub path: PathBuf,
    pub line: usize,
    pub col: usize,
    pub msg: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    name: Spanned<String>,
    equation: Spanned<String>,
    alpha: Option<Spanned<f64>>,
    x0: Spanned<f64>,
    y0: Option<Spanned<f64>>,
    u0: Option<Spanned<f64>>,
    output_dir: Option<String>,
    q: Spanned<RawQ>,
    mesh: Spanned<RawMesh>,
    reference: Option<Spanned<RawReference>>,
    residual: Option<RawResidual>,
    kamenev: Option<Spanned<RawKamenev>>,
    conditions: Option<RawConditions>,
    diagnostics: Option<RawDiagnostics>,
    convergence: Option<RawConvergence>,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum RawQ {
    Constant { a: f64 },
    PowerLaw { c: f64, p: f64, start: Option<f64> },
    PowerSolution { beta: f64, start: Option<f64> },
    Sinusoid { a: f64, b: f64, omega: f64 },
    Table { t: Vec<f64>, values: Vec<f64> },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMesh {
    #[serde(rename = "T")]
    t_end: Spanned<f64>,
    #[serde(rename = "N")]
    n: Spanned<i64>,
    grading: Option<Spanned<f64>>,
    start: Option<Spanned<f64>>,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum RawReference {
    Power { beta: f64 },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawResidual {
    window: Spanned<[f64; 2]>,
    tol: Spanned<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawKamenev {
    epsilon: Option<f64>,
    t0: Option<f64>,
    schedule: Option<Vec<f64>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConditions {
    horizon: Spanned<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDiagnostics {
    riccati: Option<bool>,
    mask_rel: Option<Spanned<f64>>,
    refine: Option<bool>,
    window_fraction: Option<Spanned<f64>>,
    bound_checks: Option<Spanned<Vec<[f64; 3]>>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConvergence {
    n: Spanned<Vec<i64>>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Equation {
    Fractional { alpha: f64, y0: f64 },
    Curvature { u0: f64 },
}

/// Mesh layout; the mesh itself is built per run so `N` can vary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeshSpec {
    pub start: f64,
    pub t_end: f64,
    pub n: usize,
    pub grading: f64,
}

impl MeshSpec {
    pub fn build(&self, n: usize) -> fdelab::Result<Arc<Mesh>> {
        let m = if self.start != 0.0 {
            Mesh::uniform_window(self.start, self.t_end, n)?
        } else {
            Mesh::graded(self.t_end, n, self.grading)?
        };
        Ok(Arc::new(m))
    }
}

/// x = t^β with q = C(α,β) t^{−1−α}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerReference {
    pub beta: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResidualSpec {
    pub window: (f64, f64),
    pub tol: f64,
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub source: PathBuf,
    pub equation: Equation,
    pub x0: f64,
    pub q: Coefficient,
    pub mesh: MeshSpec,
    pub reference: Option<PowerReference>,
    pub residual: Option<ResidualSpec>,
    pub kamenev: KamenevParams,
    pub horizon: f64,
    pub riccati: bool,
    pub diagnostics: DiagnosticsOptions,
    pub convergence_n: Option<Vec<usize>>,
    pub output_dir: PathBuf,
}

impl Scenario {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError {
            path: path.to_path_buf(),
            line: 0,
            col: 0,
            msg: format!("cannot read config: {e}"),
        })?;
        Self::parse(&text, path)
    }

    pub fn parse(text: &str, path: &Path) -> Result<Self, ConfigError> {
        let at = |span: Option<Range<usize>>, msg: String| {
            let (line, col) = span.map_or((0, 0), |s| line_col(text, s.start));
            ConfigError {
                path: path.to_path_buf(),
                line,
                col,
                msg,
            }
        };
        let raw: RawScenario = toml::from_str(text).map_err(|e| at(e.span(), e.message().to_string()))?;
        let err = |span: Range<usize>, msg: String| at(Some(span), msg);

        let name = raw.name.get_ref().trim().to_string();
        if name.is_empty() || name.contains(['/', '\\']) {
            return Err(err(
                raw.name.span(),
                "name must be non-empty and free of path separators".into(),
            ));
        }

        let equation = match raw.equation.get_ref().as_str() {
            "fractional" => {
                let alpha = raw
                    .alpha
                    .as_ref()
                    .ok_or_else(|| err(raw.equation.span(), "fractional equation needs `alpha`".into()))?;
                if !(*alpha.get_ref() > 0.0 && *alpha.get_ref() < 1.0) {
                    return Err(err(
                        alpha.span(),
                        format!("alpha = {} must lie in (0, 1)", alpha.get_ref()),
                    ));
                }
                if let Some(u0) = &raw.u0 {
                    return Err(err(
                        u0.span(),
                        "`u0` belongs to the curvature equation, use `y0`".into(),
                    ));
                }
                let y0 = raw.y0.as_ref().map_or(0.0, |v| *v.get_ref());
                Equation::Fractional {
                    alpha: *alpha.get_ref(),
                    y0,
                }
            }
            "curvature" => {
                if let Some(a) = &raw.alpha {
                    return Err(err(a.span(), "`alpha` is not used by the curvature equation".into()));
                }
                if let Some(y0) = &raw.y0 {
                    return Err(err(
                        y0.span(),
                        "`y0` belongs to the fractional equation, use `u0`".into(),
                    ));
                }
                let u0 = raw.u0.as_ref().map_or(0.0, |v| *v.get_ref());
                if !(u0.abs() < 1.0) {
                    let span = raw.u0.as_ref().map_or(raw.equation.span(), |v| v.span());
                    return Err(err(span, format!("|u0| = {} must be < 1", u0.abs())));
                }
                Equation::Curvature { u0 }
            }
            other => {
                return Err(err(
                    raw.equation.span(),
                    format!("unknown equation `{other}` (expected `fractional` or `curvature`)"),
                ))
            }
        };
        if !raw.x0.get_ref().is_finite() {
            return Err(err(raw.x0.span(), "x0 must be finite".into()));
        }

        let mesh = {
            let m = raw.mesh.get_ref();
            let start = m.start.as_ref().map_or(0.0, |s| *s.get_ref());
            let grading = m.grading.as_ref().map_or(1.0, |g| *g.get_ref());
            let t_end = *m.t_end.get_ref();
            if !(t_end.is_finite() && t_end > start && start >= 0.0) {
                return Err(err(
                    m.t_end.span(),
                    format!("T = {t_end} must be finite and exceed the start {start}"),
                ));
            }
            let n = *m.n.get_ref();
            if n < 2 {
                return Err(err(m.n.span(), format!("N = {n} must be at least 2")));
            }
            if let Some(g) = &m.grading {
                if !(*g.get_ref() >= 1.0 && g.get_ref().is_finite()) {
                    return Err(err(g.span(), format!("grading = {} must be >= 1", g.get_ref())));
                }
            }
            if let Some(s) = &m.start {
                if matches!(equation, Equation::Fractional { .. }) && *s.get_ref() != 0.0 {
                    return Err(err(s.span(), "the fractional equation is posed from t = 0".into()));
                }
                if grading != 1.0 && *s.get_ref() != 0.0 {
                    return Err(err(s.span(), "graded meshes start at t = 0".into()));
                }
            }
            MeshSpec {
                start,
                t_end,
                n: n as usize,
                grading,
            }
        };

        let q_span = raw.q.span();
        let alpha = match equation {
            Equation::Fractional { alpha, .. } => Some(alpha),
            Equation::Curvature { .. } => None,
        };
        let q = match raw.q.into_inner() {
            RawQ::Constant { a } => Coefficient::constant(a),
            RawQ::PowerLaw { c, p, start } => {
                Coefficient::power_law(c, p, start.unwrap_or(0.0)).map_err(|e| err(q_span.clone(), e.to_string()))?
            }
            RawQ::PowerSolution { beta, start } => {
                let alpha =
                    alpha.ok_or_else(|| err(q_span.clone(), "power_solution needs the fractional order".into()))?;
                Coefficient::power_solution(alpha, beta, start.unwrap_or(1.0))
                    .map_err(|e| err(q_span.clone(), e.to_string()))?
            }
            RawQ::Sinusoid { a, b, omega } => Coefficient::sinusoid(a, b, omega),
            RawQ::Table { t, values } => {
                if t.is_empty() {
                    return Err(err(q_span, "q table is empty".into()));
                }
                if t.len() != values.len() {
                    return Err(err(
                        q_span,
                        format!("q table has {} times but {} values", t.len(), values.len()),
                    ));
                }
                if values.iter().any(|v| !v.is_finite()) {
                    return Err(err(q_span, "q table values must be finite".into()));
                }
                let mesh = Mesh::from_nodes(t).map_err(|e| err(q_span.clone(), e.to_string()))?;
                let g = GridFunction::new(Arc::new(mesh), values).map_err(|e| err(q_span.clone(), e.to_string()))?;
                Coefficient::tabulated(g).map_err(|e| err(q_span.clone(), e.to_string()))?
            }
        };
        if q.domain_end() < mesh.t_end {
            return Err(err(
                q_span,
                format!("q table ends at {} before T = {}", q.domain_end(), mesh.t_end),
            ));
        }

        let reference = match raw.reference {
            None => None,
            Some(r) => {
                let span = r.span();
                let RawReference::Power { beta } = r.into_inner();
                let alpha =
                    alpha.ok_or_else(|| err(span.clone(), "power reference needs the fractional equation".into()))?;
                if !(beta.is_finite() && beta >= 0.0) {
                    return Err(err(span, format!("beta = {beta} must be >= 0")));
                }
                let c = power_solution_constant(alpha, beta).map_err(|e| err(span.clone(), e.to_string()))?;
                let matches_q = match q.family() {
                    fdelab::CoefficientFamily::PowerLaw { c: qc, p } => {
                        (qc - c).abs() <= 1e-12 * c.abs().max(1e-300) && (p + 1.0 + alpha).abs() < 1e-12
                    }
                    fdelab::CoefficientFamily::Constant { a } => *a == 0.0 && c == 0.0,
                    _ => false,
                };
                if !matches_q {
                    return Err(err(
                        span,
                        format!("x = t^{beta} solves the equation only for q = {c}·t^(-1-alpha)"),
                    ));
                }
                if mesh.start != 0.0 {
                    return Err(err(span, "power reference needs a mesh from t = 0".into()));
                }
                Some(PowerReference { beta })
            }
        };

        let residual = match raw.residual {
            None => None,
            Some(r) => {
                let [lo, hi] = *r.window.get_ref();
                if !(lo < hi && lo >= mesh.start && hi <= mesh.t_end) {
                    return Err(err(
                        r.window.span(),
                        format!("window [{lo}, {hi}] must be an interval inside the mesh"),
                    ));
                }
                if !(*r.tol.get_ref() > 0.0) {
                    return Err(err(r.tol.span(), "tol must be positive".into()));
                }
                Some(ResidualSpec {
                    window: (lo, hi),
                    tol: *r.tol.get_ref(),
                })
            }
        };

        let kamenev = match raw.kamenev {
            None => KamenevParams::standard(),
            Some(k) => {
                let span = k.span();
                let k = k.into_inner();
                let std = KamenevParams::standard();
                KamenevParams::new(
                    k.epsilon.unwrap_or(std.epsilon),
                    k.t0.unwrap_or(std.t0),
                    k.schedule.unwrap_or(std.schedule),
                )
                .map_err(|e| err(span, e.to_string()))?
            }
        };

        let horizon = match &raw.conditions {
            None => 100.0,
            Some(c) => {
                let h = *c.horizon.get_ref();
                if !(h.is_finite() && h > 0.0) {
                    return Err(err(c.horizon.span(), "horizon must be positive and finite".into()));
                }
                h
            }
        };

        let mut diagnostics = DiagnosticsOptions::default();
        let mut riccati = true;
        if let Some(d) = raw.diagnostics {
            riccati = d.riccati.unwrap_or(true);
            diagnostics.refine = d.refine.unwrap_or(true);
            if let Some(m) = d.mask_rel {
                if !(*m.get_ref() >= 0.0 && *m.get_ref() < 1.0) {
                    return Err(err(m.span(), "mask_rel must lie in [0, 1)".into()));
                }
                diagnostics.mask_rel = *m.get_ref();
            }
            if let Some(w) = d.window_fraction {
                if !(*w.get_ref() > 0.0 && *w.get_ref() < 1.0) {
                    return Err(err(w.span(), "window_fraction must lie in (0, 1)".into()));
                }
                diagnostics.window_fraction = Some(*w.get_ref());
            }
            if let Some(b) = d.bound_checks {
                for &[eps, t_start, t] in b.get_ref() {
                    if !(eps > 1.0 && t_start >= mesh.start && t_start < t && t <= mesh.t_end) {
                        return Err(err(
                            b.span(),
                            format!("bound check [{eps}, {t_start}, {t}] needs epsilon > 1 and start < T' <= t <= T"),
                        ));
                    }
                }
                diagnostics.bound_checks = b.into_inner().into_iter().map(|[a, b, c]| (a, b, c)).collect();
            }
        }

        let convergence_n = match raw.convergence {
            None => None,
            Some(c) => {
                let ns = c.n.get_ref();
                if ns.len() < 2 || ns.iter().any(|&n| n < 2) || ns.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(err(c.n.span(), "n must list at least two increasing sizes >= 2".into()));
                }
                Some(ns.iter().map(|&n| n as usize).collect())
            }
        };

        let output_dir = raw
            .output_dir
            .map(PathBuf::from)
            .unwrap_or_else(|| Path::new("out").join(&name));

        Ok(Scenario {
            name,
            source: path.to_path_buf(),
            equation,
            x0: *raw.x0.get_ref(),
            q,
            mesh,
            reference,
            residual,
            kamenev,
            horizon,
            riccati,
            diagnostics,
            convergence_n,
            output_dir,
        })
    }

    pub fn alpha(&self) -> Option<f64> {
        match self.equation {
            Equation::Fractional { alpha, .. } => Some(alpha),
            Equation::Curvature { .. } => None,
        }
    }
}

/// 1-based line and column of a byte offset.
fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.rfind('\n').map_or(before.len(), |i| before.len() - i - 1) + 1;
    (line, col)
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"
name = "demo"
equation = "fractional"
alpha = 0.5
x0 = 1.0

[q]
kind = "constant"
a = 1.0

[mesh]
T = 10.0
N = 64
"#;

    fn parse(text: &str) -> Result<Scenario, ConfigError> {
        Scenario::parse(text, Path::new("demo.toml"))
    }

    #[test]
    fn parses_minimal_scenario() {
        let s = parse(BASE).unwrap();
        assert_eq!(s.equation, Equation::Fractional { alpha: 0.5, y0: 0.0 });
        assert_eq!(s.mesh.n, 64);
        assert_eq!(s.output_dir, Path::new("out/demo"));
        assert_eq!(s.kamenev, KamenevParams::standard());
    }

    #[test]
    fn bad_alpha_points_at_its_line() {
        let e = parse(&BASE.replace("alpha = 0.5", "alpha = 1.5")).unwrap_err();
        assert_eq!((e.line, e.col), (4, 9));
        assert!(e.to_string().starts_with("demo.toml:4:9: alpha"));
    }

    #[test]
    fn empty_table_rejected() {
        let text = BASE.replace("kind = \"constant\"\na = 1.0", "kind = \"table\"\nt = []\nvalues = []");
        let e = parse(&text).unwrap_err();
        assert!(e.msg.contains("empty"), "{e}");
        assert_eq!(e.line, 7);
    }

    #[test]
    fn unknown_key_is_located() {
        let e = parse(&format!("{BASE}bogus = 1\n")).unwrap_err();
        assert!(e.msg.contains("bogus"), "{e}");
        assert_eq!(e.line, 14);
    }

    #[test]
    fn reference_must_match_q() {
        let text = format!("{BASE}\n[reference]\nkind = \"power\"\nbeta = 0.25\n");
        assert!(parse(&text).unwrap_err().msg.contains("solves the equation only"));
    }

    #[test]
    fn line_col_counts_from_one() {
        assert_eq!(line_col("ab\ncd", 4), (2, 2));
        assert_eq!(line_col("ab", 0), (1, 1));
    }
}
