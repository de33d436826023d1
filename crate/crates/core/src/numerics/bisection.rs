use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BisectionOptions {
    pub interval_tolerance: f64,
    pub max_iterations: usize,
}

impl Default for BisectionOptions {
    fn default() -> Self {
        Self { interval_tolerance: 1e-10, max_iterations: 200 }
    }
}

impl BisectionOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.interval_tolerance > 0.0) || self.max_iterations < 1 {
            return Err(Error::domain(
                "bisection needs a positive interval tolerance and at least one iteration",
            ));
        }
        Ok(())
    }
}

/// Root of a sign-changing `f` on `[lo, hi]`.
///
/// `f` may return `±∞` at the endpoints; only the sign is used. The returned
/// point is the midpoint of the final bracket, whose width is at most
/// `opts.interval_tolerance`.
pub fn bisect<F>(mut f: F, lo: f64, hi: f64, opts: &BisectionOptions) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    opts.validate()?;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::domain(format!("invalid bisection interval [{lo}, {hi}]")));
    }
    let (mut lo, mut hi) = (lo, hi);
    let f_lo = checked(f(lo)?, lo)?;
    let f_hi = checked(f(hi)?, hi)?;
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if f_lo.signum() == f_hi.signum() {
        return Err(Error::Bracket { lo, hi, f_lo, f_hi });
    }
    let lo_positive = f_lo > 0.0;
    for _ in 0..opts.max_iterations {
        if hi - lo <= opts.interval_tolerance {
            return Ok(0.5 * (lo + hi));
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            // Bracket is a pair of adjacent floats.
            return Ok(mid.clamp(lo, hi));
        }
        let fm = checked(f(mid)?, mid)?;
        if fm == 0.0 {
            return Ok(mid);
        }
        if (fm > 0.0) == lo_positive {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if hi - lo <= opts.interval_tolerance {
        return Ok(0.5 * (lo + hi));
    }
    Err(Error::NoConvergence { iterations: opts.max_iterations, width: hi - lo })
}

fn checked(v: f64, x: f64) -> Result<f64> {
    if v.is_nan() {
        Err(Error::domain(format!("bisection target is NaN at {x}")))
    } else {
        Ok(v)
    }
}
