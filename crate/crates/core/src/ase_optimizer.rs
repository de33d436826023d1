//! ASE-maximizing user loading.
//!
//! With `u = K/M`, the lower-bound ASE is `λ_b·M·G(u)` where
//! `G(u) = u·∫ (1 − e^(−z(1/u − 1)))/(z·D̲(z)) dz`. `G` is concave on `(0, 1)`
//! with a single stationary point `u*`; `G(u*)` is the gain on ASE per
//! antenna (GAPA).

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{bisect, BisectionOptions};
use crate::rate_model::RateModel;

/// Inset of the bisection bracket from the degenerate endpoints `u = 0, 1`.
pub const U_BRACKET_INSET: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LoadingSolution {
    pub u_star: f64,
    /// `G(u*)`, nats/s/Hz per antenna.
    pub gapa: f64,
    pub alpha: f64,
}

fn check_u(u: f64, closed_right: bool) -> Result<()> {
    let ok = u > 0.0 && if closed_right { u <= 1.0 } else { u < 1.0 };
    if ok {
        Ok(())
    } else {
        let interval = if closed_right { "(0, 1]" } else { "(0, 1)" };
        Err(Error::domain(format!("loading fraction u = {u} outside {interval}")))
    }
}

/// `G(u)` for `0 < u ≤ 1`.
pub fn gain_function_with(model: &RateModel, u: f64) -> Result<f64> {
    check_u(u, true)?;
    Ok(u * model.lower_bound_at_ratio(1.0 / u - 1.0)?.mean_rate)
}

/// `G′(u)` for `0 < u < 1`; identical to `∂(K·E̲[R])/∂K` at `M = 1, K = u`.
pub fn gain_derivative_with(model: &RateModel, u: f64) -> Result<f64> {
    check_u(u, false)?;
    model.d_k_rate_lb_dk(1.0, u)
}

pub fn gain_function(u: f64, alpha: f64) -> Result<f64> {
    gain_function_with(&RateModel::new(alpha)?, u)
}

pub fn gain_derivative(u: f64, alpha: f64) -> Result<f64> {
    gain_derivative_with(&RateModel::new(alpha)?, u)
}

/// Root of `G′` on `[1e−4, 1 − 1e−4]` by bisection, without caching.
pub fn optimal_user_fraction_with(model: &RateModel, opts: &BisectionOptions) -> Result<LoadingSolution> {
    let u_star = bisect(
        |u| gain_derivative_with(model, u),
        U_BRACKET_INSET,
        1.0 - U_BRACKET_INSET,
        opts,
    )?;
    let gapa = gain_function_with(model, u_star)?;
    Ok(LoadingSolution { u_star, gapa, alpha: model.alpha() })
}

fn cache() -> &'static Mutex<HashMap<u64, LoadingSolution>> {
    static CACHE: OnceLock<Mutex<HashMap<u64, LoadingSolution>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// `u*` and GAPA for the default numerical settings, memoized per `α`.
pub fn optimal_user_fraction(alpha: f64) -> Result<LoadingSolution> {
    let model = RateModel::new(alpha)?;
    let key = alpha.to_bits();
    if let Some(sol) = cache().lock().unwrap_or_else(|e| e.into_inner()).get(&key) {
        return Ok(*sol);
    }
    // Computed outside the lock: concurrent first calls may both solve, but
    // they produce the same bits.
    let sol = optimal_user_fraction_with(&model, &BisectionOptions::default())?;
    cache().lock().unwrap_or_else(|e| e.into_inner()).insert(key, sol);
    Ok(sol)
}

/// Best of `⌊u*M⌋, ⌈u*M⌉` (within `[1, M]`) for `K·E̲[R]`; ties go to the smaller K.
pub fn optimal_k_lower_bound(m: u32, alpha: f64) -> Result<u32> {
    if m == 0 {
        return Err(Error::domain("M must be at least 1"));
    }
    let model = RateModel::new(alpha)?;
    let target = optimal_user_fraction(alpha)?.u_star * m as f64;
    let lo = (target.floor() as u32).clamp(1, m);
    let hi = (target.ceil() as u32).clamp(1, m);
    if lo == hi {
        return Ok(lo);
    }
    let value = |k: u32| -> Result<f64> {
        Ok(k as f64 * model.mean_rate_lower_bound(m as f64, k as f64)?.mean_rate)
    };
    Ok(if value(hi)? > value(lo)? { hi } else { lo })
}

/// `K·E[R](M, K)` for `K = 1..=M`.
pub fn ase_per_density_profile(model: &RateModel, m: u32) -> Result<Vec<f64>> {
    (1..=m)
        .map(|k| Ok(k as f64 * model.mean_rate_exact(m, k)?.mean_rate))
        .collect()
}

/// Exhaustive argmax of `K·E[R]` over `K = 1..=M`; ties go to the smaller K.
pub fn optimal_k_exact(m: u32, alpha: f64) -> Result<u32> {
    if m == 0 {
        return Err(Error::domain("M must be at least 1"));
    }
    let values = ase_per_density_profile(&RateModel::new(alpha)?, m)?;
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v > values[best] {
            best = i;
        }
    }
    Ok(best as u32 + 1)
}

/// `λ_b·M·G(u*)`, the lower-bound ASE at optimal loading.
pub fn ase_at_optimal_loading(lambda_b: f64, m: f64, alpha: f64) -> Result<f64> {
    if !(lambda_b >= 0.0 && lambda_b.is_finite()) {
        return Err(Error::domain(format!("lambda_b = {lambda_b} must be non-negative")));
    }
    if !(m >= 1.0 && m.is_finite()) {
        return Err(Error::domain(format!("M = {m} must be at least 1")));
    }
    Ok(lambda_b * m * optimal_user_fraction(alpha)?.gapa)
}
