//! C ABI over `ppp_ase`.
//!
//! Every entry point returns a [`PpaStatus`]; results go through out-pointers
//! that are left untouched on failure. After a non-OK status,
//! [`ppa_last_error_message`] gives a description for the calling thread.
//! Handles come from a `*_new` function and must be released with the
//! matching `*_free`. Panics are caught at the boundary and reported as
//! `PPA_STATUS_PANIC`.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use ppp_ase::ase_optimizer;
use ppp_ase::energy_planner::{BaselineKind, BsPowerProfile, PlanningProblem, PlanningSolution, Planner};
use ppp_ase::mc_sim::{self, SimulationConfig, SimulationMode};
use ppp_ase::rate_model::{NetworkConfig, RateModel};
use ppp_ase::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PpaStatus {
    Ok = 0,
    NullPointer = 1,
    /// Argument outside the mathematical domain.
    Domain = 2,
    /// Bad profile or configuration.
    Config = 3,
    /// Quadrature, bisection or bracketing failed to converge.
    Convergence = 4,
    RankDeficient = 5,
    Io = 6,
    InvalidUtf8 = 7,
    Panic = 8,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PpaPlanMethod {
    Optimal = 0,
    Suboptimal = 1,
    SuMimoBaseline = 2,
    SingleAntennaBaseline = 3,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PpaSimMode {
    FullZf = 0,
    GammaApprox = 1,
}

/// Opaque rate model bound to one path-loss exponent.
pub struct PpaRateModel(RateModel);

/// Opaque BS power profile.
pub struct PpaProfile(BsPowerProfile);

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct PpaRate {
    /// nats/s/Hz.
    pub mean_rate: f64,
    pub is_lower_bound: bool,
    pub quadrature_error_estimate: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct PpaLoading {
    pub u_star: f64,
    pub gapa: f64,
    pub alpha: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct PpaPlan {
    pub lambda_b_star: f64,
    pub m_star: u32,
    pub k_star: u32,
    pub nec: f64,
    pub energy_efficiency: f64,
    pub iterations: u64,
    pub method: PpaPlanMethod,
    pub converged: bool,
    /// NaN unless `method` is suboptimal.
    pub m_relaxed: f64,
    pub k_relaxed: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct PpaSimResult {
    pub mean_rate: f64,
    pub std_error: f64,
    pub trials_used: u64,
    pub sir_q05: f64,
    pub sir_q50: f64,
    pub sir_q95: f64,
    pub g00_mean: f64,
    pub g00_variance: f64,
    pub gi0_mean: f64,
    pub gi0_variance: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_last_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(err: &Error) -> PpaStatus {
    match err {
        Error::Domain(_) => PpaStatus::Domain,
        Error::Config(_) => PpaStatus::Config,
        Error::RankDeficient => PpaStatus::RankDeficient,
        Error::Io(_) => PpaStatus::Io,
        e if e.is_convergence_failure() => PpaStatus::Convergence,
        _ => PpaStatus::Domain,
    }
}

enum Fail {
    Null(&'static str),
    Utf8,
    Core(Error),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Core(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> PpaStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => PpaStatus::Ok,
        Ok(Err(Fail::Null(what))) => {
            set_last_error(format!("null pointer: {what}"));
            PpaStatus::NullPointer
        }
        Ok(Err(Fail::Utf8)) => {
            set_last_error("string argument is not valid UTF-8".into());
            PpaStatus::InvalidUtf8
        }
        Ok(Err(Fail::Core(e))) => {
            set_last_error(e.to_string());
            status_of(&e)
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(format!("panic: {msg}"));
            PpaStatus::Panic
        }
    }
}

unsafe fn out<'a, T>(p: *mut T, what: &'static str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or(Fail::Null(what))
}

unsafe fn handle<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or(Fail::Null(what))
}

unsafe fn c_str<'a>(p: *const c_char, what: &'static str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(Fail::Null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Fail::Utf8)
}

/// Copies the calling thread's last error message into `buf` (NUL
/// terminated, truncated to `len - 1` bytes) and returns the full message
/// length excluding the terminator. Pass `buf = NULL` to query the length.
#[no_mangle]
pub unsafe extern "C" fn ppa_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        let bytes = msg.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            ptr::copy_nonoverlapping(bytes.as_ptr(), buf as *mut u8, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// Static, NUL-terminated crate version.
#[no_mangle]
pub extern "C" fn ppa_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

#[no_mangle]
pub unsafe extern "C" fn ppa_rate_model_new(alpha: f64, model_out: *mut *mut PpaRateModel) -> PpaStatus {
    guard(|| {
        let slot = out(model_out, "model_out")?;
        let model = RateModel::new(alpha)?;
        *slot = Box::into_raw(Box::new(PpaRateModel(model)));
        Ok(())
    })
}

/// Accepts NULL.
#[no_mangle]
pub unsafe extern "C" fn ppa_rate_model_free(model: *mut PpaRateModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Exact mean rate for integer `1 ≤ k ≤ m`.
#[no_mangle]
pub unsafe extern "C" fn ppa_mean_rate_exact(
    model: *const PpaRateModel,
    m: u32,
    k: u32,
    rate_out: *mut PpaRate,
) -> PpaStatus {
    guard(|| {
        let model = handle(model, "model")?;
        let slot = out(rate_out, "rate_out")?;
        let r = model.0.mean_rate_exact(m, k)?;
        *slot = PpaRate {
            mean_rate: r.mean_rate,
            is_lower_bound: r.is_lower_bound,
            quadrature_error_estimate: r.quadrature_error_estimate,
        };
        Ok(())
    })
}

/// Lower bound on the mean rate; real `0 < k ≤ m`.
#[no_mangle]
pub unsafe extern "C" fn ppa_mean_rate_lower_bound(
    model: *const PpaRateModel,
    m: f64,
    k: f64,
    rate_out: *mut PpaRate,
) -> PpaStatus {
    guard(|| {
        let model = handle(model, "model")?;
        let slot = out(rate_out, "rate_out")?;
        let r = model.0.mean_rate_lower_bound(m, k)?;
        *slot = PpaRate {
            mean_rate: r.mean_rate,
            is_lower_bound: r.is_lower_bound,
            quadrature_error_estimate: r.quadrature_error_estimate,
        };
        Ok(())
    })
}

/// ASE in nats/s/Hz/km². With `lower_bound = false`, `m` and `k` must be integers.
#[no_mangle]
pub unsafe extern "C" fn ppa_ase(
    model: *const PpaRateModel,
    lambda_b: f64,
    m: f64,
    k: f64,
    lower_bound: bool,
    ase_out: *mut f64,
) -> PpaStatus {
    guard(|| {
        let model = handle(model, "model")?;
        let slot = out(ase_out, "ase_out")?;
        let cfg = NetworkConfig::new(lambda_b, m, k, model.0.alpha())?;
        *slot = if lower_bound { model.0.ase_lower_bound(&cfg)? } else { model.0.ase_exact(&cfg)? };
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn ppa_optimal_user_fraction(alpha: f64, loading_out: *mut PpaLoading) -> PpaStatus {
    guard(|| {
        let slot = out(loading_out, "loading_out")?;
        let s = ase_optimizer::optimal_user_fraction(alpha)?;
        *slot = PpaLoading { u_star: s.u_star, gapa: s.gapa, alpha: s.alpha };
        Ok(())
    })
}

/// ASE-maximizing `K` for `m` antennas by exhaustive exact evaluation.
#[no_mangle]
pub unsafe extern "C" fn ppa_optimal_k_exact(m: u32, alpha: f64, k_out: *mut u32) -> PpaStatus {
    guard(|| {
        let slot = out(k_out, "k_out")?;
        *slot = ase_optimizer::optimal_k_exact(m, alpha)?;
        Ok(())
    })
}

/// Built-in profile: "macro", "micro", "pico", "macro-nominal" or "micro-nominal".
#[no_mangle]
pub unsafe extern "C" fn ppa_profile_builtin(name: *const c_char, profile_out: *mut *mut PpaProfile) -> PpaStatus {
    guard(|| {
        let slot = out(profile_out, "profile_out")?;
        let name = c_str(name, "name")?;
        *slot = Box::into_raw(Box::new(PpaProfile(BsPowerProfile::builtin(name)?)));
        Ok(())
    })
}

/// Profile from explicit values: `p` W, `eta` in (0, 1], `pc`, `ppre`, `p0` W.
#[no_mangle]
pub unsafe extern "C" fn ppa_profile_new(
    p: f64,
    eta: f64,
    pc: f64,
    ppre: f64,
    p0: f64,
    profile_out: *mut *mut PpaProfile,
) -> PpaStatus {
    guard(|| {
        let slot = out(profile_out, "profile_out")?;
        *slot = Box::into_raw(Box::new(PpaProfile(BsPowerProfile::new(p, eta, pc, ppre, p0)?)));
        Ok(())
    })
}

/// Accepts NULL.
#[no_mangle]
pub unsafe extern "C" fn ppa_profile_free(profile: *mut PpaProfile) {
    if !profile.is_null() {
        drop(Box::from_raw(profile));
    }
}

/// Per-BS power in W.
#[no_mangle]
pub unsafe extern "C" fn ppa_bs_energy(profile: *const PpaProfile, m: u32, k: u32, watts_out: *mut f64) -> PpaStatus {
    guard(|| {
        let profile = handle(profile, "profile")?;
        let slot = out(watts_out, "watts_out")?;
        *slot = ppp_ase::energy_planner::bs_energy(&profile.0, m, k)?;
        Ok(())
    })
}

fn plan_record(sol: &PlanningSolution) -> PpaPlan {
    use ppp_ase::energy_planner::PlanningMethod as M;
    let (m_relaxed, k_relaxed) = sol.relaxed.unwrap_or((f64::NAN, f64::NAN));
    PpaPlan {
        lambda_b_star: sol.lambda_b_star,
        m_star: sol.m_star,
        k_star: sol.k_star,
        nec: sol.nec,
        energy_efficiency: sol.energy_efficiency,
        iterations: sol.iterations as u64,
        method: match sol.method {
            M::Optimal => PpaPlanMethod::Optimal,
            M::Suboptimal => PpaPlanMethod::Suboptimal,
            M::SuMimoBaseline => PpaPlanMethod::SuMimoBaseline,
            M::SingleAntennaBaseline => PpaPlanMethod::SingleAntennaBaseline,
        },
        converged: sol.converged,
        m_relaxed,
        k_relaxed,
    }
}

/// Energy plan for ASE target `t_target` (nats/s/Hz/km²). The suboptimal
/// method starts its alternation from K = 1.
#[no_mangle]
pub unsafe extern "C" fn ppa_plan(
    profile: *const PpaProfile,
    alpha: f64,
    t_target: f64,
    method: PpaPlanMethod,
    plan_out: *mut PpaPlan,
) -> PpaStatus {
    guard(|| {
        let profile = handle(profile, "profile")?;
        let slot = out(plan_out, "plan_out")?;
        let problem = PlanningProblem::new(profile.0, alpha, t_target)?;
        let planner = Planner::new(alpha)?;
        let sol = match method {
            PpaPlanMethod::Optimal => planner.plan_optimal(&problem)?,
            PpaPlanMethod::Suboptimal => planner.plan_suboptimal(&problem, 1.0)?,
            PpaPlanMethod::SuMimoBaseline => planner.plan_baseline(&problem, BaselineKind::SuMimo)?,
            PpaPlanMethod::SingleAntennaBaseline => planner.plan_baseline(&problem, BaselineKind::SingleAntenna)?,
        };
        *slot = plan_record(&sol);
        Ok(())
    })
}

/// Monte Carlo rate of the typical user at unit density with the default
/// window. Results are a function of the arguments only.
#[no_mangle]
pub unsafe extern "C" fn ppa_simulate(
    m: u32,
    k: u32,
    alpha: f64,
    trials: u64,
    seed: u64,
    mode: PpaSimMode,
    result_out: *mut PpaSimResult,
) -> PpaStatus {
    guard(|| {
        let slot = out(result_out, "result_out")?;
        let mode = match mode {
            PpaSimMode::FullZf => SimulationMode::FullZf,
            PpaSimMode::GammaApprox => SimulationMode::GammaApprox,
        };
        let cfg = SimulationConfig::new(m, k, alpha, trials as usize, seed, mode);
        let r = mc_sim::simulate_typical_user(&cfg)?;
        *slot = PpaSimResult {
            mean_rate: r.mean_rate,
            std_error: r.std_error,
            trials_used: r.trials_used as u64,
            sir_q05: r.sir_quantiles.q05,
            sir_q50: r.sir_quantiles.q50,
            sir_q95: r.sir_quantiles.q95,
            g00_mean: r.g00_moments.0,
            g00_variance: r.g00_moments.1,
            gi0_mean: r.gi0_moments.0,
            gi0_variance: r.gi0_moments.1,
        };
        Ok(())
    })
}
