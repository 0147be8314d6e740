//! Small numerical building blocks shared by the modules.

/// 5-point Gauss-Legendre nodes and weights on [-1, 1].
pub(crate) const GL5_NODES: [f64; 5] = [
    -0.906_179_845_938_664,
    -0.538_469_310_105_683,
    0.0,
    0.538_469_310_105_683,
    0.906_179_845_938_664,
];
pub(crate) const GL5_WEIGHTS: [f64; 5] = [
    0.236_926_885_056_189_08,
    0.478_628_670_499_366_47,
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_47,
    0.236_926_885_056_189_08,
];

/// Composite 5-point Gauss-Legendre rule on [a, b] with `panels` equal panels.
pub(crate) fn gauss_legendre<F>(a: f64, b: f64, panels: usize, mut f: F) -> Result<f64, crate::Error>
where
    F: FnMut(f64) -> Result<f64, crate::Error>,
{
    let h = (b - a) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let lo = a + h * p as f64;
        let mid = lo + 0.5 * h;
        let mut s = 0.0;
        for (x, w) in GL5_NODES.iter().zip(GL5_WEIGHTS.iter()) {
            s += w * f(mid + 0.5 * h * x)?;
        }
        total += 0.5 * h * s;
    }
    Ok(total)
}

/// b^p − a^p for 0 ≤ a < b without cancellation when b − a ≪ a.
pub(crate) fn pow_diff(b: f64, a: f64, p: f64) -> f64 {
    if a <= 0.0 {
        return b.powf(p);
    }
    let h = b - a;
    a.powf(p) * (p * (h / a).ln_1p()).exp_m1()
}

/// Three-point derivative on a possibly non-uniform grid: centered at
/// interior nodes, one-sided (second order) at the two ends. Missing samples
/// are NaN, and a node whose stencil touches one is NaN in the output.
pub(crate) fn derivative(t: &[f64], f: &[f64]) -> Vec<f64> {
    let n = t.len();
    let mut out = vec![f64::NAN; n];
    if n < 3 {
        return out;
    }
    let three = |i0: usize, at: usize| -> f64 {
        let (x0, x1, x2) = (t[i0], t[i0 + 1], t[i0 + 2]);
        let (f0, f1, f2) = (f[i0], f[i0 + 1], f[i0 + 2]);
        let x = t[at];
        // derivative of the Lagrange quadratic through the three points
        f0 * ((x - x1) + (x - x2)) / ((x0 - x1) * (x0 - x2))
            + f1 * ((x - x0) + (x - x2)) / ((x1 - x0) * (x1 - x2))
            + f2 * ((x - x0) + (x - x1)) / ((x2 - x0) * (x2 - x1))
    };
    out[0] = three(0, 0);
    for (i, o) in out.iter_mut().enumerate().take(n - 1).skip(1) {
        *o = three(i - 1, i);
    }
    out[n - 1] = three(n - 3, n - 1);
    out
}

/// Ordinary least squares fit y ≈ slope·x + intercept. Returns
/// (slope, intercept, rms residual).
pub(crate) fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let ss: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| {
            let r = b - (slope * a + intercept);
            r * r
        })
        .sum();
    (slope, intercept, (ss / n).sqrt())
}
