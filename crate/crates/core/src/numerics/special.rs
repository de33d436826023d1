//! Incomplete Beta and Gamma functions (non-regularized).
//!
//! Both functions switch between a power series for small arguments and a
//! modified-Lentz continued fraction elsewhere. `Γ` and `ln Γ` come from
//! `libm`.

use crate::error::{Error, Result};

const MAX_ITER: usize = 1000;
const EPS: f64 = 1e-16;
const FPMIN: f64 = 1e-300;

/// `Γ(x)` for `x > 0`.
pub fn gamma(x: f64) -> f64 {
    libm::tgamma(x)
}

/// `ln Γ(x)` for `x > 0`.
pub fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

/// Complete Beta function `B(a, b) = Γ(a)Γ(b)/Γ(a+b)`.
pub fn beta(a: f64, b: f64) -> f64 {
    (ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)).exp()
}

/// Lower incomplete Beta function `B(x; a, b) = ∫₀ˣ t^(a−1) (1−t)^(b−1) dt`.
///
/// This is the non-regularized form; divide by [`beta`] for `I_x(a, b)`.
pub fn incomplete_beta(x: f64, a: f64, b: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::domain(format!("incomplete_beta: x = {x} outside [0, 1]")));
    }
    if !(a > 0.0 && a.is_finite() && b > 0.0 && b.is_finite()) {
        return Err(Error::domain(format!(
            "incomplete_beta: parameters must be positive (a = {a}, b = {b})"
        )));
    }
    Ok(incomplete_beta_split(x, 1.0 - x, a, b))
}

/// `B(x; a, b)` given both `x` and `y = 1 − x`.
///
/// Callers that know `1 − x` exactly (e.g. `x = z/(1+z)`, `y = 1/(1+z)`)
/// should pass it here; forming `1 − x` loses all precision near `x = 1`.
pub(crate) fn incomplete_beta_split(x: f64, y: f64, a: f64, b: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if y <= 0.0 {
        return beta(a, b);
    }
    if x < (a + 1.0) / (a + b + 2.0) {
        lower_beta_direct(x, y, a, b)
    } else {
        beta(a, b) - lower_beta_direct(y, x, b, a)
    }
}

fn lower_beta_direct(x: f64, y: f64, a: f64, b: f64) -> f64 {
    if use_beta_series(x, b) {
        beta_series(x, a, b)
    } else {
        beta_continued_fraction(x, y, a, b)
    }
}

fn use_beta_series(x: f64, b: f64) -> bool {
    x * b.max(1.0) <= 0.5
}

/// `B(x; a, b) = x^a Σₙ (1−b)ₙ/n! · xⁿ/(a+n)`.
pub(crate) fn beta_series(x: f64, a: f64, b: f64) -> f64 {
    let mut coeff = 1.0;
    let mut sum = 1.0 / a;
    for n in 1..MAX_ITER {
        let nf = n as f64;
        coeff *= (nf - b) / nf * x;
        let term = coeff / (a + nf);
        sum += term;
        if term.abs() <= EPS * sum.abs() {
            break;
        }
    }
    x.powf(a) * sum
}

/// `B(x; a, b) = x^a y^b / a · CF`, converging fast for `x < (a+1)/(a+b+2)`.
pub(crate) fn beta_continued_fraction(x: f64, y: f64, a: f64, b: f64) -> f64 {
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < FPMIN {
        d = FPMIN;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;

        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < FPMIN {
            d = FPMIN;
        }
        c = 1.0 + aa / c;
        if c.abs() < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        h *= d * c;

        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < FPMIN {
            d = FPMIN;
        }
        c = 1.0 + aa / c;
        if c.abs() < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() <= EPS {
            break;
        }
    }
    (a * x.ln() + b * y.ln()).exp() * h / a
}

/// Lower incomplete Gamma function `γ(s, x) = ∫₀ˣ t^(s−1) e^(−t) dt`.
pub fn lower_incomplete_gamma(s: f64, x: f64) -> Result<f64> {
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::domain(format!("lower_incomplete_gamma: s = {s} must be positive")));
    }
    if !(x >= 0.0) {
        return Err(Error::domain(format!("lower_incomplete_gamma: x = {x} must be non-negative")));
    }
    Ok(lower_gamma_unchecked(s, x))
}

pub(crate) fn lower_gamma_unchecked(s: f64, x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else if x.is_infinite() {
        gamma(s)
    } else if x < s + 1.0 {
        gamma_series(s, x)
    } else {
        gamma(s) - upper_gamma_continued_fraction(s, x)
    }
}

/// `γ(s, x) = x^s e^(−x) Σₙ xⁿ / (s(s+1)…(s+n))`.
pub(crate) fn gamma_series(s: f64, x: f64) -> f64 {
    let mut ap = s;
    let mut term = 1.0 / s;
    let mut sum = term;
    for _ in 0..MAX_ITER {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if term.abs() <= EPS * sum.abs() {
            break;
        }
    }
    (s * x.ln() - x).exp() * sum
}

/// Upper incomplete Gamma `Γ(s, x)` by its Legendre continued fraction.
pub(crate) fn upper_gamma_continued_fraction(s: f64, x: f64) -> f64 {
    let mut b = x + 1.0 - s;
    let mut c = 1.0 / FPMIN;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..MAX_ITER {
        let an = -(i as f64) * (i as f64 - s);
        b += 2.0;
        d = an * d + b;
        if d.abs() < FPMIN {
            d = FPMIN;
        }
        c = b + an / c;
        if c.abs() < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() <= EPS {
            break;
        }
    }
    (s * x.ln() - x).exp() * h
}
