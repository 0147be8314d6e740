//! Product-integration weights for the two weakly singular kernels.
//!
//! On a uniform mesh both weight families depend only on the lag n − j, so a
//! single O(N) table serves every row. On any other mesh a row is generated on
//! demand, which keeps memory at O(N) instead of the O(N²) a full table needs.

use std::sync::Arc;

use super::Mesh;
use crate::error::{domain, Result};
use crate::numeric::{pow_diff, GL5_NODES, GL5_WEIGHTS};

/// Intervals at least this many steps away from t_n use Gauss-Legendre on the
/// (then smooth) kernel instead of the closed form, whose two leading terms
/// cancel there.
const FAR_FIELD: f64 = 8.0;

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(domain("fracops", format!("alpha = {alpha} not in (0, 1)")))
    }
}

/// Weights of the L1 rule
/// D_n = Σ_{j<n} c_{n,j} (f_{j+1} − f_j) / Γ(2 − α), with
/// c_{n,j} = [(t_n − t_j)^{1−α} − (t_n − t_{j+1})^{1−α}] / h_j.
#[derive(Debug, Clone)]
pub struct L1Weights {
    mesh: Arc<Mesh>,
    alpha: f64,
    /// c by lag m = n − 1 − j, already scaled by h^{-α}.
    uniform: Option<Vec<f64>>,
}

impl L1Weights {
    pub fn new(mesh: Arc<Mesh>, alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        let p = 1.0 - alpha;
        let uniform = mesh.uniform_step().map(|h| {
            let s = h.powf(-alpha);
            (0..mesh.intervals())
                .map(|m| s * pow_diff(m as f64 + 1.0, m as f64, p))
                .collect()
        });
        Ok(Self { mesh, alpha, uniform })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Fills `out` with c_{n,0..n}.
    pub fn row(&self, n: usize, out: &mut Vec<f64>) {
        out.clear();
        if let Some(tab) = &self.uniform {
            out.extend((0..n).map(|j| tab[n - 1 - j]));
            return;
        }
        let t = self.mesh.nodes();
        let p = 1.0 - self.alpha;
        let tn = t[n];
        out.extend((0..n).map(|j| pow_diff(tn - t[j], tn - t[j + 1], p) / (t[j + 1] - t[j])));
    }
}

/// Weights W_{n,j} of the product-trapezoidal rule
/// ∫_0^{t_n} (t_n − s)^{α−1} g(s) ds ≈ Σ_{j≤n} W_{n,j} g_j
/// with g replaced by its piecewise-linear interpolant.
#[derive(Debug, Clone)]
pub struct ProductTrapezoid {
    mesh: Arc<Mesh>,
    alpha: f64,
    /// (left, right) unit-step weights by lag, and the scale h^α.
    uniform: Option<(Vec<f64>, Vec<f64>, f64)>,
}

impl ProductTrapezoid {
    pub fn new(mesh: Arc<Mesh>, alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        let uniform = mesh.uniform_step().map(|h| {
            let (left, right) = (0..mesh.intervals())
                .map(|m| interval_weights(alpha, m as f64, m as f64 + 1.0, 1.0))
                .unzip();
            (left, right, h.powf(alpha))
        });
        Ok(Self { mesh, alpha, uniform })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    /// Fills `out` with W_{n,0..=n}.
    pub fn row(&self, n: usize, out: &mut Vec<f64>) {
        out.clear();
        out.resize(n + 1, 0.0);
        if n == 0 {
            return;
        }
        if let Some((left, right, scale)) = &self.uniform {
            for i in 0..n {
                let m = n - 1 - i;
                out[i] += scale * left[m];
                out[i + 1] += scale * right[m];
            }
            return;
        }
        let t = self.mesh.nodes();
        let tn = t[n];
        for i in 0..n {
            let (l, r) = interval_weights(self.alpha, tn - t[i + 1], tn - t[i], t[i + 1] - t[i]);
            out[i] += l;
            out[i + 1] += r;
        }
    }

    /// The diagonal weight W_{n,n}.
    pub fn diagonal(&self, n: usize) -> f64 {
        if n == 0 {
            return 0.0;
        }
        if let Some((_, right, scale)) = &self.uniform {
            return scale * right[0];
        }
        let h = self.mesh.step(n - 1);
        h.powf(self.alpha) / (self.alpha * (self.alpha + 1.0))
    }
}

/// Left/right hat-function weights of one interval, in the reversed variable
/// u = t_n − s ∈ [a, b], h = b − a:
/// left = ∫ (u − a)/h · u^{α−1} du, right = ∫ (b − u)/h · u^{α−1} du.
fn interval_weights(alpha: f64, a: f64, b: f64, h: f64) -> (f64, f64) {
    if a >= FAR_FIELD * h {
        far_weights(alpha, a, b, h)
    } else {
        near_weights(alpha, a, b, h)
    }
}

fn far_weights(alpha: f64, a: f64, b: f64, h: f64) -> (f64, f64) {
    let mid = 0.5 * (a + b);
    let half = 0.5 * h;
    let (mut l, mut r) = (0.0, 0.0);
    for (x, w) in GL5_NODES.iter().zip(GL5_WEIGHTS.iter()) {
        let u = mid + half * x;
        let k = w * u.powf(alpha - 1.0);
        l += k * (u - a);
        r += k * (b - u);
    }
    // factor half from the rule, 1/h from the hat function
    (0.5 * l, 0.5 * r)
}

fn near_weights(alpha: f64, a: f64, b: f64, h: f64) -> (f64, f64) {
    let i0 = pow_diff(b, a, alpha) / alpha;
    let i1 = pow_diff(b, a, alpha + 1.0) / (alpha + 1.0);
    ((i1 - a * i0) / h, (b * i0 - i1) / h)
}
