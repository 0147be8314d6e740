//! Euler Gamma via the Lanczos approximation (g = 607/128, 15 terms), with
//! reflection below 1/2.

use std::f64::consts::PI;

use crate::error::{Error, Result};

const LANCZOS_G: f64 = 607.0 / 128.0;

const LANCZOS_COEF: [f64; 15] = [
    0.999_999_999_999_997_1,
    57.156_235_665_862_92,
    -59.597_960_355_475_49,
    14.136_097_974_741_747,
    -0.491_913_816_097_620_2,
    3.399_464_998_481_189e-5,
    4.652_362_892_704_858e-5,
    -9.837_447_530_487_956e-5,
    1.580_887_032_249_125e-4,
    -2.102_644_417_241_049e-4,
    2.174_396_181_152_126_4e-4,
    -1.643_181_065_367_639e-4,
    8.441_822_398_385_274e-5,
    -2.619_083_840_158_140_8e-5,
    3.689_918_265_953_162_5e-6,
];

/// ln(sqrt(2π))
const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// Relative accuracy we certify for [`gamma`] and [`rgamma`] on [-20, 171].
/// Used by callers that propagate error bounds through Gamma evaluations.
pub const GAMMA_REL_ERR: f64 = 1e-14;

fn lanczos_sum(z: f64) -> f64 {
    LANCZOS_COEF[1..]
        .iter()
        .enumerate()
        .fold(LANCZOS_COEF[0], |acc, (i, c)| acc + c / (z + (i + 1) as f64))
}

/// sin(πx) with exact argument reduction, so that zeros at the integers
/// come out as exact zeros and values near them keep full relative accuracy.
pub fn sin_pi(x: f64) -> f64 {
    if !x.is_finite() {
        return f64::NAN;
    }
    // r in [-1, 1]; x - 2*round(x/2) is exact in binary floating point.
    let r = x - 2.0 * (0.5 * x).round();
    let (r, sign) = if r < 0.0 { (-r, -1.0) } else { (r, 1.0) };
    let v = if r > 0.5 {
        (PI * (1.0 - r)).sin()
    } else {
        (PI * r).sin()
    };
    sign * v
}

fn is_pole(x: f64) -> bool {
    x <= 0.0 && x == x.floor()
}

/// Γ(x) for x >= 1/2 by Lanczos. Splits the power to avoid premature overflow.
fn gamma_lanczos(x: f64) -> f64 {
    let z = x - 1.0;
    let t = z + LANCZOS_G + 0.5;
    let half_pow = t.powf(0.5 * (z + 0.5));
    (2.0 * PI).sqrt() * lanczos_sum(z) * (half_pow * (-t).exp()) * half_pow
}

/// The Euler Gamma function.
///
/// Positive integers up to 23 are returned exactly; x < 1/2 goes through the
/// reflection formula. Non-positive integers are poles and yield
/// [`Error::Pole`].
pub fn gamma(x: f64) -> Result<f64> {
    if x.is_nan() {
        return Err(crate::error::domain("gamma", "NaN argument"));
    }
    if is_pole(x) {
        return Err(Error::Pole { x });
    }
    Ok(gamma_unchecked(x))
}

/// Gamma without the pole check; poles give ±inf.
pub(crate) fn gamma_unchecked(x: f64) -> f64 {
    if x == x.floor() && x > 0.0 && x <= 23.0 {
        let mut f = 1.0;
        let mut k = 2.0;
        while k < x {
            f *= k;
            k += 1.0;
        }
        return f;
    }
    if x < 0.5 {
        let s = sin_pi(x);
        if s == 0.0 {
            return f64::INFINITY;
        }
        return PI / (s * gamma_unchecked(1.0 - x));
    }
    if x > 171.7 {
        return f64::INFINITY;
    }
    gamma_lanczos(x)
}

/// 1/Γ(x), an entire function: exactly zero at the poles of Γ.
pub fn rgamma(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if is_pole(x) {
        return 0.0;
    }
    if x < 0.5 {
        let s = sin_pi(x);
        let w = 1.0 - x;
        if w <= 170.0 {
            return s * gamma_unchecked(w) / PI;
        }
        // Γ(1 - x) overflows; go through logarithms.
        let (lg, _) = ln_gamma(w);
        return s.signum() * (lg + s.abs().ln() - PI.ln()).exp();
    }
    if x > 171.0 {
        return (-ln_gamma(x).0).exp();
    }
    1.0 / gamma_unchecked(x)
}

/// ln|Γ(x)| together with the sign of Γ(x). Poles give (+inf, 1).
pub fn ln_gamma(x: f64) -> (f64, f64) {
    if is_pole(x) {
        return (f64::INFINITY, 1.0);
    }
    if x < 0.5 {
        // ln|Γ(x)| = ln π - ln|sin πx| - ln Γ(1 - x)
        let s = sin_pi(x);
        let (lg, _) = ln_gamma(1.0 - x);
        let sign = if s < 0.0 { -1.0 } else { 1.0 };
        return (PI.ln() - s.abs().ln() - lg, sign);
    }
    if x < 20.0 {
        return (gamma_unchecked(x).ln(), 1.0);
    }
    let z = x - 1.0;
    let t = z + LANCZOS_G + 0.5;
    (LN_SQRT_2PI + (z + 0.5) * t.ln() - t + lanczos_sum(z).ln(), 1.0)
}
