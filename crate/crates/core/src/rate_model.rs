//! Mean per-user rate of the typical user under ZF precoding, exact and lower
//! bound, plus the partial derivatives used by the optimizers.
//!
//! Every quantity is an integral over `z ∈ (0, ∞)` of the form
//! `∫ N(z)/(z·D(z)) dz`. With `δ = 2/α`:
//!
//! * exact: `N = 1 − (1+z)^(−(M+1−K))`,
//!   `D = (1+z)^(−K) + z^δ·K·B(z/(1+z); 1−δ, K+δ)`;
//! * lower bound: `N = 1 − e^(−z(M−K)/K)`, `D̲ = e^(−z) + z^δ·γ(1−δ, z)`.
//!
//! Rates are in nats/s/Hz.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::special::{incomplete_beta_split, lower_gamma_unchecked};
use crate::numerics::{integrate_semi_infinite, Integral, QuadratureOptions};

/// Below this `z` the `N(z)/z` ratios switch to their two-term series.
const SMALL_Z: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NetworkConfig {
    /// BS density, per km².
    pub lambda_b: f64,
    /// Antennas per BS. Integral unless used with the lower-bound family.
    pub m: f64,
    /// Scheduled users per BS.
    pub k: f64,
    pub alpha: f64,
}

impl NetworkConfig {
    pub fn new(lambda_b: f64, m: f64, k: f64, alpha: f64) -> Result<Self> {
        let cfg = Self { lambda_b, m, k, alpha };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        check_alpha(self.alpha)?;
        if !(self.lambda_b > 0.0 && self.lambda_b.is_finite()) {
            return Err(Error::domain(format!("lambda_b = {} must be positive", self.lambda_b)));
        }
        check_relaxed_mk(self.m, self.k)
    }

    fn integer_mk(&self) -> Result<(u32, u32)> {
        let as_int = |v: f64, name: &str| {
            if v.fract() == 0.0 && v >= 1.0 && v <= u32::MAX as f64 {
                Ok(v as u32)
            } else {
                Err(Error::domain(format!("{name} = {v} must be a positive integer for the exact rate")))
            }
        };
        Ok((as_int(self.m, "M")?, as_int(self.k, "K")?))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateResult {
    pub mean_rate: f64,
    pub is_lower_bound: bool,
    pub quadrature_error_estimate: f64,
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 2.0 && alpha.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("path-loss exponent alpha = {alpha} must exceed 2")))
    }
}

fn check_relaxed_mk(m: f64, k: f64) -> Result<()> {
    if !(k > 0.0 && k.is_finite() && m.is_finite()) {
        return Err(Error::domain(format!("K = {k} must be positive and M = {m} finite")));
    }
    if k > m {
        return Err(Error::domain(format!("K = {k} exceeds M = {m}")));
    }
    Ok(())
}

fn check_integer_mk(m: u32, k: u32) -> Result<()> {
    if k == 0 || m == 0 {
        return Err(Error::domain("M and K must be at least 1"));
    }
    if k > m {
        return Err(Error::domain(format!("K = {k} exceeds M = {m}")));
    }
    Ok(())
}

/// `(1 − e^(−c·z))/z`, accurate for all `z > 0` including the `z → 0` limit `c`.
fn one_minus_exp_over_z(c: f64, z: f64) -> f64 {
    if z < SMALL_Z {
        c * (1.0 - 0.5 * c * z)
    } else {
        -(-c * z).exp_m1() / z
    }
}

/// `(1 − (1+z)^(−n))/z`, with limit `n` at `z → 0`.
fn one_minus_pow_over_z(n: f64, z: f64) -> f64 {
    if z < SMALL_Z {
        n * (1.0 - 0.5 * (n + 1.0) * z)
    } else {
        -(-n * z.ln_1p()).exp_m1() / z
    }
}

/// Analytic rate model for a fixed path-loss exponent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateModel {
    alpha: f64,
    quad: QuadratureOptions,
}

impl RateModel {
    /// Default tolerances, with the tail substitution `z = s^(−α)`, which
    /// turns the `z^(−1−2/α)` decay of every integrand here into a smooth
    /// function of `s`.
    pub fn new(alpha: f64) -> Result<Self> {
        Self::with_quadrature(alpha, QuadratureOptions::default().with_tail_power(alpha))
    }

    pub fn with_quadrature(alpha: f64, quad: QuadratureOptions) -> Result<Self> {
        check_alpha(alpha)?;
        quad.validate()?;
        Ok(Self { alpha, quad })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn quadrature(&self) -> &QuadratureOptions {
        &self.quad
    }

    fn delta(&self) -> f64 {
        2.0 / self.alpha
    }

    fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> Result<Integral> {
        integrate_semi_infinite(f, &self.quad)
    }

    /// Exact-rate denominator `(1+z)^(−K) + z^δ·K·B(z/(1+z); 1−δ, K+δ)`.
    pub fn denominator_exact(&self, z: f64, k: f64) -> f64 {
        let d = self.delta();
        let x = z / (1.0 + z);
        let y = 1.0 / (1.0 + z);
        (-k * z.ln_1p()).exp() + z.powf(d) * k * incomplete_beta_split(x, y, 1.0 - d, k + d)
    }

    /// Lower-bound denominator `e^(−z) + z^δ·γ(1−δ, z)`.
    pub fn denominator_lower_bound(&self, z: f64) -> f64 {
        let d = self.delta();
        (-z).exp() + z.powf(d) * lower_gamma_unchecked(1.0 - d, z)
    }

    /// Exact mean rate `E[R]` for integer `1 ≤ K ≤ M`.
    pub fn mean_rate_exact(&self, m: u32, k: u32) -> Result<RateResult> {
        check_integer_mk(m, k)?;
        self.exact_with_real_m(m as f64, k)
    }

    /// Exact mean rate with `M` treated as a real exponent, `M ≥ K − 1`.
    pub fn mean_rate_exact_relaxed_m(&self, m: f64, k: u32) -> Result<RateResult> {
        if k == 0 {
            return Err(Error::domain("K must be at least 1"));
        }
        if !(m >= k as f64 - 1.0 && m.is_finite()) {
            return Err(Error::domain(format!("relaxed M = {m} must be at least K − 1 = {}", k - 1)));
        }
        self.exact_with_real_m(m, k)
    }

    fn exact_with_real_m(&self, m: f64, k: u32) -> Result<RateResult> {
        let kf = k as f64;
        let n = m + 1.0 - kf;
        if n == 0.0 {
            return Ok(RateResult { mean_rate: 0.0, is_lower_bound: false, quadrature_error_estimate: 0.0 });
        }
        let r = self.integrate(|z| one_minus_pow_over_z(n, z) / self.denominator_exact(z, kf))?;
        Ok(RateResult { mean_rate: r.value.max(0.0), is_lower_bound: false, quadrature_error_estimate: r.error_estimate })
    }

    /// Lower bound `E̲[R]` for real `0 < K ≤ M`; depends only on `K/M`.
    pub fn mean_rate_lower_bound(&self, m: f64, k: f64) -> Result<RateResult> {
        check_relaxed_mk(m, k)?;
        self.lower_bound_at_ratio((m - k) / k)
    }

    /// `E̲[R]` written in terms of `c = (M−K)/K = 1/u − 1`.
    pub(crate) fn lower_bound_at_ratio(&self, c: f64) -> Result<RateResult> {
        if c == 0.0 {
            return Ok(RateResult { mean_rate: 0.0, is_lower_bound: true, quadrature_error_estimate: 0.0 });
        }
        let r = self.integrate(|z| one_minus_exp_over_z(c, z) / self.denominator_lower_bound(z))?;
        Ok(RateResult { mean_rate: r.value.max(0.0), is_lower_bound: true, quadrature_error_estimate: r.error_estimate })
    }

    /// ASE `T = λ_b·K·E[R]` in nats/s/Hz/km²; `M` and `K` must be integers.
    pub fn ase_exact(&self, cfg: &NetworkConfig) -> Result<f64> {
        self.check_cfg(cfg)?;
        let (m, k) = cfg.integer_mk()?;
        Ok(cfg.lambda_b * cfg.k * self.mean_rate_exact(m, k)?.mean_rate)
    }

    /// `T̲ = λ_b·K·E̲[R]`.
    pub fn ase_lower_bound(&self, cfg: &NetworkConfig) -> Result<f64> {
        self.check_cfg(cfg)?;
        Ok(cfg.lambda_b * cfg.k * self.mean_rate_lower_bound(cfg.m, cfg.k)?.mean_rate)
    }

    fn check_cfg(&self, cfg: &NetworkConfig) -> Result<()> {
        cfg.validate()?;
        if cfg.alpha != self.alpha {
            return Err(Error::domain(format!(
                "config alpha {} differs from the model's alpha {}",
                cfg.alpha, self.alpha
            )));
        }
        Ok(())
    }

    /// `∂E[R]/∂M = ∫ ln(1+z)·(1+z)^(−(M+1−K)) / (z·D) dz` for real `M ≥ K−1`.
    pub fn d_mean_rate_exact_dm(&self, m: f64, k: u32) -> Result<f64> {
        if k == 0 {
            return Err(Error::domain("K must be at least 1"));
        }
        let kf = k as f64;
        if !(m >= kf - 1.0 && m.is_finite()) {
            return Err(Error::domain(format!("M = {m} must be at least K − 1")));
        }
        let n = m + 1.0 - kf;
        let r = self.integrate(|z| {
            let log_ratio = if z < SMALL_Z { 1.0 - 0.5 * z } else { z.ln_1p() / z };
            log_ratio * (-n * z.ln_1p()).exp() / self.denominator_exact(z, kf)
        })?;
        Ok(r.value)
    }

    /// `∂(K·E̲[R])/∂K` at fixed `M`, equal to `G′(K/M)`.
    ///
    /// Integrand `[1 − e^(−cz) − (zM/K)·e^(−cz)]/(z·D̲)` with `c = (M−K)/K`.
    /// At `K = M` the integral diverges and `−∞` is returned.
    pub fn d_k_rate_lb_dk(&self, m: f64, k: f64) -> Result<f64> {
        check_relaxed_mk(m, k)?;
        let c = (m - k) / k;
        if c == 0.0 {
            return Ok(f64::NEG_INFINITY);
        }
        let mk = m / k;
        let r = self.integrate(|z| {
            (one_minus_exp_over_z(c, z) - mk * (-c * z).exp()) / self.denominator_lower_bound(z)
        })?;
        Ok(r.value)
    }

    /// `∂E̲[R]/∂M = (1/K)·∫ e^(−cz)/D̲ dz`; `+∞` at `K = M`.
    pub fn d_rate_lb_dm(&self, m: f64, k: f64) -> Result<f64> {
        check_relaxed_mk(m, k)?;
        let c = (m - k) / k;
        if c == 0.0 {
            return Ok(f64::INFINITY);
        }
        let r = self.integrate(|z| (-c * z).exp() / self.denominator_lower_bound(z))?;
        Ok(r.value / k)
    }
}

/// `E[R]` with default quadrature.
pub fn mean_rate_exact(m: u32, k: u32, alpha: f64) -> Result<f64> {
    Ok(RateModel::new(alpha)?.mean_rate_exact(m, k)?.mean_rate)
}

/// `E̲[R]` with default quadrature.
pub fn mean_rate_lower_bound(m: f64, k: f64, alpha: f64) -> Result<f64> {
    Ok(RateModel::new(alpha)?.mean_rate_lower_bound(m, k)?.mean_rate)
}

pub fn ase_exact(cfg: &NetworkConfig) -> Result<f64> {
    RateModel::new(cfg.alpha)?.ase_exact(cfg)
}

pub fn ase_lower_bound(cfg: &NetworkConfig) -> Result<f64> {
    RateModel::new(cfg.alpha)?.ase_lower_bound(cfg)
}

pub fn d_mean_rate_exact_dm(m: f64, k: u32, alpha: f64) -> Result<f64> {
    RateModel::new(alpha)?.d_mean_rate_exact_dm(m, k)
}

pub fn d_k_rate_lb_dk(m: f64, k: f64, alpha: f64) -> Result<f64> {
    RateModel::new(alpha)?.d_k_rate_lb_dk(m, k)
}

pub fn d_rate_lb_dm(m: f64, k: f64, alpha: f64) -> Result<f64> {
    RateModel::new(alpha)?.d_rate_lb_dm(m, k)
}
