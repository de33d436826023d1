//! Energy-minimal deployment: BS density, antennas and scheduled users that
//! meet an ASE target at the lowest network power per km².
//!
//! Per-BS power is `EC = P/η + M·Pc + K³·Ppre + P0`. Meeting the target with
//! equality gives `λ_b = T/(K·E[R])`, so the network power is
//! `NEC = T·EC/(K·E[R])` and minimizing it means maximizing the energy
//! efficiency `K·E[R]/EC`, independent of `T`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ase_optimizer::{optimal_user_fraction, optimal_user_fraction_with, LoadingSolution, U_BRACKET_INSET};
use crate::error::{Error, Result};
use crate::numerics::{bisect, BisectionOptions};
use crate::rate_model::RateModel;

/// Bracket doublings allowed beyond the caller's `m_hi`.
pub const MAX_BRACKET_DOUBLINGS: u32 = 16;
/// Alternation cap for the suboptimal planner.
pub const MAX_ALTERNATIONS: usize = 50;
/// `|ΔM| + |ΔK|` below which the alternation is considered converged.
pub const ALTERNATION_TOLERANCE: f64 = 1e-6;

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BsPowerProfile {
    /// Transmit power, W.
    pub p: f64,
    /// Power-amplifier efficiency in `(0, 1]`.
    pub eta: f64,
    /// Circuit power per antenna, W.
    pub pc: f64,
    /// Precoding power coefficient, W (multiplies `K³`).
    pub ppre: f64,
    /// Static power, W.
    pub p0: f64,
}

/// Names accepted by [`BsPowerProfile::builtin`].
pub const BUILTIN_PROFILES: &[&str] = &["macro", "micro", "pico", "macro-nominal", "micro-nominal"];

/// Static power of the macro and micro built-ins.
///
/// The tier table lists 65.8 W, but the reported ratios `(P/η + P0)/Pc` of
/// 39.03 (macro) and 11.42 (micro), and `(P/η + P0)/Ppre` of 379.13 and 87.3,
/// all imply `P0 ≈ 12.2 W`, and so do the reported optima. The `-nominal`
/// built-ins keep 65.8 W.
pub const MACRO_MICRO_P0: f64 = 12.2;
pub const NOMINAL_MACRO_MICRO_P0: f64 = 65.8;

impl BsPowerProfile {
    pub fn new(p: f64, eta: f64, pc: f64, ppre: f64, p0: f64) -> Result<Self> {
        let prof = Self { p, eta, pc, ppre, p0 };
        prof.validate()?;
        Ok(prof)
    }

    pub fn from_dbm(p_dbm: f64, eta: f64, pc: f64, ppre: f64, p0: f64) -> Result<Self> {
        Self::new(dbm_to_watts(p_dbm), eta, pc, ppre, p0)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("P", self.p), ("eta", self.eta), ("Pc", self.pc), ("Ppre", self.ppre), ("P0", self.p0)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::domain(format!("power profile field {name} = {v} must be positive")));
            }
        }
        if self.eta > 1.0 {
            return Err(Error::domain(format!("amplifier efficiency eta = {} exceeds 1", self.eta)));
        }
        Ok(())
    }

    pub fn builtin(name: &str) -> Result<Self> {
        match name {
            "macro" => Self::from_dbm(54.0, 0.388, 16.9, 1.74, MACRO_MICRO_P0),
            "micro" => Self::from_dbm(46.0, 0.285, 13.3, 1.74, MACRO_MICRO_P0),
            "pico" => Self::from_dbm(33.0, 0.08, 6.8, 1.74, 1.5),
            "macro-nominal" => Self::from_dbm(54.0, 0.388, 16.9, 1.74, NOMINAL_MACRO_MICRO_P0),
            "micro-nominal" => Self::from_dbm(46.0, 0.285, 13.3, 1.74, NOMINAL_MACRO_MICRO_P0),
            other => Err(Error::Config(format!(
                "unknown profile {other:?}; built-ins are {}",
                BUILTIN_PROFILES.join(", ")
            ))),
        }
    }

    /// `EC` for real-valued `M, K`.
    pub fn power(&self, m: f64, k: f64) -> f64 {
        self.p / self.eta + m * self.pc + k * k * k * self.ppre + self.p0
    }

    /// `P/η + P0`, the part of `EC` that does not scale with `M` or `K`.
    pub fn fixed_power(&self) -> f64 {
        self.p / self.eta + self.p0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlanningProblem {
    pub profile: BsPowerProfile,
    pub alpha: f64,
    /// ASE target, nats/s/Hz/km².
    pub t_target: f64,
    pub k_search_max: u32,
    pub m_search_max: u32,
}

impl PlanningProblem {
    pub fn new(profile: BsPowerProfile, alpha: f64, t_target: f64) -> Result<Self> {
        let p = Self { profile, alpha, t_target, k_search_max: 64, m_search_max: 512 };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        self.profile.validate()?;
        if !(self.alpha > 2.0 && self.alpha.is_finite()) {
            return Err(Error::domain(format!("alpha = {} must exceed 2", self.alpha)));
        }
        if !(self.t_target > 0.0 && self.t_target.is_finite()) {
            return Err(Error::domain(format!("ASE target {} must be positive", self.t_target)));
        }
        if self.k_search_max < 1 || self.k_search_max > self.m_search_max {
            return Err(Error::domain(format!(
                "need 1 ≤ k_search_max ({}) ≤ m_search_max ({})",
                self.k_search_max, self.m_search_max
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlanningMethod {
    Optimal,
    Suboptimal,
    SuMimoBaseline,
    SingleAntennaBaseline,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaselineKind {
    SuMimo,
    SingleAntenna,
}

/// One alternation of the suboptimal planner: `M` solved for the previous
/// `K`, then `K` solved for that `M`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlternationStep {
    pub m: f64,
    pub k: f64,
    /// `K·E̲[R]/EC` at `(m, k)`.
    pub ee_lower_bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanningSolution {
    /// BS/km².
    pub lambda_b_star: f64,
    pub m_star: u32,
    pub k_star: u32,
    /// W/km².
    pub nec: f64,
    /// nats/s/Hz/W.
    pub energy_efficiency: f64,
    pub iterations: usize,
    pub method: PlanningMethod,
    /// False only when the suboptimal alternation hit its cap.
    pub converged: bool,
    /// Real-valued optimum before rounding (suboptimal planner only).
    pub relaxed: Option<(f64, f64)>,
    pub trace: Vec<AlternationStep>,
}

/// Planner bound to one rate model and bisection setting.
#[derive(Debug, Clone, Copy)]
pub struct Planner {
    model: RateModel,
    bisection: BisectionOptions,
    loading: LoadingSolution,
}

impl Planner {
    pub fn new(alpha: f64) -> Result<Self> {
        let model = RateModel::new(alpha)?;
        Ok(Self { model, bisection: BisectionOptions::default(), loading: optimal_user_fraction(alpha)? })
    }

    pub fn with_settings(model: RateModel, bisection: BisectionOptions) -> Result<Self> {
        bisection.validate()?;
        let loading = if model == RateModel::new(model.alpha())? {
            optimal_user_fraction(model.alpha())?
        } else {
            optimal_user_fraction_with(&model, &bisection)?
        };
        Ok(Self { model, bisection, loading })
    }

    pub fn model(&self) -> &RateModel {
        &self.model
    }

    pub fn loading(&self) -> &LoadingSolution {
        &self.loading
    }

    fn check_alpha(&self, alpha: f64) -> Result<()> {
        if alpha == self.model.alpha() {
            Ok(())
        } else {
            Err(Error::domain(format!("problem alpha {alpha} differs from planner alpha {}", self.model.alpha())))
        }
    }

    fn rate(&self, m: u32, k: u32) -> Result<f64> {
        Ok(self.model.mean_rate_exact(m, k)?.mean_rate)
    }

    /// `T/(K·E[R])`.
    pub fn required_density(&self, t_target: f64, m: u32, k: u32) -> Result<f64> {
        if !(t_target > 0.0 && t_target.is_finite()) {
            return Err(Error::domain(format!("ASE target {t_target} must be positive")));
        }
        Ok(t_target / (k as f64 * self.rate(m, k)?))
    }

    /// `K·E[R]/EC`.
    pub fn energy_efficiency(&self, profile: &BsPowerProfile, m: u32, k: u32) -> Result<f64> {
        let ec = bs_energy(profile, m, k)?;
        Ok(k as f64 * self.rate(m, k)? / ec)
    }

    /// `F(M) = ∂E[R]/∂M · EC − E[R]·Pc`, decreasing in `M ≥ K − 1`.
    pub fn optimal_m_objective(&self, profile: &BsPowerProfile, k: u32, m: f64) -> Result<f64> {
        let de = self.model.d_mean_rate_exact_dm(m, k)?;
        let e = self.model.mean_rate_exact_relaxed_m(m, k)?.mean_rate;
        Ok(de * profile.power(m, k as f64) - e * profile.pc)
    }

    /// Real root `M̃` of `F(M) = 0` on `[K − 1, ∞)`.
    pub fn optimal_m_relaxed(&self, profile: &BsPowerProfile, k: u32, m_hi: u32) -> Result<f64> {
        profile.validate()?;
        if k == 0 {
            return Err(Error::domain("K must be at least 1"));
        }
        let lo = k as f64 - 1.0;
        let hi = expand_upper_bracket(lo, (m_hi.max(k)) as f64, |m| self.optimal_m_objective(profile, k, m))?;
        bisect(|m| self.optimal_m_objective(profile, k, m), lo, hi, &self.bisection)
    }

    /// Integer `M` for a given `K`: the better of `⌊M̃⌋, ⌈M̃⌉` by energy
    /// efficiency, never below `K`; ties go to the smaller `M`.
    pub fn optimal_m_given_k(&self, profile: &BsPowerProfile, k: u32, m_hi: u32) -> Result<u32> {
        let m_tilde = self.optimal_m_relaxed(profile, k, m_hi)?;
        let lo = (m_tilde.floor() as u32).max(k);
        let hi = (m_tilde.ceil() as u32).max(k);
        if lo == hi {
            return Ok(lo);
        }
        let ee_hi = self.energy_efficiency(profile, hi, k)?;
        let ee_lo = self.energy_efficiency(profile, lo, k)?;
        Ok(if ee_hi > ee_lo { hi } else { lo })
    }

    fn solution(
        &self,
        problem: &PlanningProblem,
        m: u32,
        k: u32,
        method: PlanningMethod,
    ) -> Result<PlanningSolution> {
        let rate = self.rate(m, k)?;
        let ec = bs_energy(&problem.profile, m, k)?;
        let lambda = problem.t_target / (k as f64 * rate);
        Ok(PlanningSolution {
            lambda_b_star: lambda,
            m_star: m,
            k_star: k,
            nec: lambda * ec,
            energy_efficiency: k as f64 * rate / ec,
            iterations: 0,
            method,
            converged: true,
            relaxed: None,
            trace: Vec::new(),
        })
    }

    /// Exhaustive over `K = 1..=k_search_max` with the best `M` for each.
    pub fn plan_optimal(&self, problem: &PlanningProblem) -> Result<PlanningSolution> {
        problem.validate()?;
        self.check_alpha(problem.alpha)?;
        let candidates: Vec<(u32, u32, f64)> = (1..=problem.k_search_max)
            .into_par_iter()
            .map(|k| {
                let m = self.optimal_m_given_k(&problem.profile, k, problem.m_search_max)?;
                Ok((m, k, self.energy_efficiency(&problem.profile, m, k)?))
            })
            .collect::<Result<_>>()?;
        // Sequential scan keeps the tie-break (smallest K) independent of threading.
        let mut best = candidates[0];
        for c in &candidates[1..] {
            if c.2 > best.2 {
                best = *c;
            }
        }
        let mut sol = self.solution(problem, best.0, best.1, PlanningMethod::Optimal)?;
        sol.iterations = candidates.len();
        Ok(sol)
    }

    /// `F̲_K(M, K) = ∂(K·E̲[R])/∂K · EC − 3K³·E̲[R]·Ppre`, decreasing in `K`.
    pub fn suboptimal_k_objective(&self, profile: &BsPowerProfile, m: f64, k: f64) -> Result<f64> {
        let dk = self.model.d_k_rate_lb_dk(m, k)?;
        let e = self.model.mean_rate_lower_bound(m, k)?.mean_rate;
        Ok(dk * profile.power(m, k) - 3.0 * k * k * k * e * profile.ppre)
    }

    /// Real `K` solving `F̲_K = 0` on `(0, u*·M)`.
    pub fn suboptimal_k_given_m(&self, profile: &BsPowerProfile, m: f64) -> Result<f64> {
        profile.validate()?;
        if !(m >= 1.0 && m.is_finite()) {
            return Err(Error::domain(format!("M = {m} must be at least 1")));
        }
        let lo = U_BRACKET_INSET * m;
        let hi = self.loading.u_star * m;
        bisect(|k| self.suboptimal_k_objective(profile, m, k), lo, hi, &self.bisection)
    }

    /// `F̲_M(M, K) = ∂E̲[R]/∂M · EC − E̲[R]·Pc`, decreasing in `M > K`.
    pub fn suboptimal_m_objective(&self, profile: &BsPowerProfile, k: f64, m: f64) -> Result<f64> {
        let dm = self.model.d_rate_lb_dm(m, k)?;
        if dm.is_infinite() {
            return Ok(dm);
        }
        let e = self.model.mean_rate_lower_bound(m, k)?.mean_rate;
        Ok(dm * profile.power(m, k) - e * profile.pc)
    }

    /// Real `M` solving `F̲_M = 0` on `(K, ∞)`, starting from `(K, m_hi)`.
    pub fn suboptimal_m_given_k(&self, profile: &BsPowerProfile, k: f64, m_hi: f64) -> Result<f64> {
        profile.validate()?;
        if !(k > 0.0 && k.is_finite()) {
            return Err(Error::domain(format!("K = {k} must be positive")));
        }
        let hi = expand_upper_bracket(k, m_hi.max(2.0 * k), |m| self.suboptimal_m_objective(profile, k, m))?;
        bisect(|m| self.suboptimal_m_objective(profile, k, m), k, hi, &self.bisection)
    }

    /// `K·E̲[R]/EC` for real `(M, K)`.
    pub fn energy_efficiency_lower_bound(&self, profile: &BsPowerProfile, m: f64, k: f64) -> Result<f64> {
        Ok(k * self.model.mean_rate_lower_bound(m, k)?.mean_rate / profile.power(m, k))
    }

    /// Alternating optimization on the lower bound, then integer rounding
    /// judged by the exact energy efficiency.
    pub fn plan_suboptimal(&self, problem: &PlanningProblem, initial_k: f64) -> Result<PlanningSolution> {
        problem.validate()?;
        self.check_alpha(problem.alpha)?;
        if !(initial_k >= 1.0 && initial_k.is_finite()) {
            return Err(Error::domain(format!("initial K = {initial_k} must be at least 1")));
        }
        let profile = &problem.profile;
        let m_hi = problem.m_search_max as f64;
        let mut k = initial_k;
        let mut m = f64::NAN;
        let mut trace = Vec::new();
        let mut converged = false;
        for _ in 0..MAX_ALTERNATIONS {
            let m_new = self.suboptimal_m_given_k(profile, k, m_hi)?;
            let k_new = self.suboptimal_k_given_m(profile, m_new)?;
            let step = (m_new - m).abs() + (k_new - k).abs();
            trace.push(AlternationStep {
                m: m_new,
                k: k_new,
                ee_lower_bound: self.energy_efficiency_lower_bound(profile, m_new, k_new)?,
            });
            m = m_new;
            k = k_new;
            if step < ALTERNATION_TOLERANCE {
                converged = true;
                break;
            }
        }
        if !converged {
            log::warn!(
                "alternating optimization stopped after {MAX_ALTERNATIONS} alternations without converging"
            );
        }
        let (m_int, k_int) = self.round_pair(profile, m, k)?;
        let mut sol = self.solution(problem, m_int, k_int, PlanningMethod::Suboptimal)?;
        sol.iterations = trace.len();
        sol.converged = converged;
        sol.relaxed = Some((m, k));
        sol.trace = trace;
        Ok(sol)
    }

    /// Best feasible integer neighbour of `(m, k)` by exact energy efficiency;
    /// ties go to the smaller `M`, then the smaller `K`.
    pub fn round_pair(&self, profile: &BsPowerProfile, m: f64, k: f64) -> Result<(u32, u32)> {
        let ms = [m.floor().max(1.0) as u32, m.ceil().max(1.0) as u32];
        let ks = [k.floor().max(1.0) as u32, k.ceil().max(1.0) as u32];
        let mut best: Option<(u32, u32, f64)> = None;
        for &mm in &ms {
            for &kk in &ks {
                if kk > mm {
                    continue;
                }
                if let Some((bm, bk, _)) = best {
                    if (bm, bk) == (mm, kk) {
                        continue;
                    }
                }
                let ee = self.energy_efficiency(profile, mm, kk)?;
                if best.map_or(true, |(_, _, b)| ee > b) {
                    best = Some((mm, kk, ee));
                }
            }
        }
        match best {
            Some((mm, kk, _)) => Ok((mm, kk)),
            // Only reachable for K̃ > M̃, which the K bracket rules out.
            None => Err(Error::domain(format!("no feasible integer point near (M, K) = ({m}, {k})"))),
        }
    }

    pub fn plan_baseline(&self, problem: &PlanningProblem, kind: BaselineKind) -> Result<PlanningSolution> {
        problem.validate()?;
        self.check_alpha(problem.alpha)?;
        match kind {
            BaselineKind::SuMimo => {
                let m = self.optimal_m_given_k(&problem.profile, 1, problem.m_search_max)?;
                self.solution(problem, m, 1, PlanningMethod::SuMimoBaseline)
            }
            BaselineKind::SingleAntenna => self.solution(problem, 1, 1, PlanningMethod::SingleAntennaBaseline),
        }
    }
}

/// Doubles `hi` until `f(hi) < 0`, at most [`MAX_BRACKET_DOUBLINGS`] times.
fn expand_upper_bracket<F>(lo: f64, hi: f64, mut f: F) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut hi = hi.max(lo + 1.0);
    for _ in 0..=MAX_BRACKET_DOUBLINGS {
        if f(hi)? < 0.0 {
            return Ok(hi);
        }
        hi *= 2.0;
    }
    Err(Error::BracketCap { cap: hi / 2.0 })
}

fn check_mk(m: u32, k: u32) -> Result<()> {
    if m == 0 || k == 0 {
        return Err(Error::domain("M and K must be at least 1"));
    }
    if k > m {
        return Err(Error::domain(format!("K = {k} exceeds M = {m}")));
    }
    Ok(())
}

/// Per-BS power `EC`, W.
pub fn bs_energy(profile: &BsPowerProfile, m: u32, k: u32) -> Result<f64> {
    check_mk(m, k)?;
    profile.validate()?;
    Ok(profile.power(m as f64, k as f64))
}

/// `λ_b·EC`, W/km².
pub fn network_energy(lambda_b: f64, profile: &BsPowerProfile, m: u32, k: u32) -> Result<f64> {
    if !(lambda_b >= 0.0 && lambda_b.is_finite()) {
        return Err(Error::domain(format!("lambda_b = {lambda_b} must be non-negative")));
    }
    Ok(lambda_b * bs_energy(profile, m, k)?)
}

pub fn required_density(t_target: f64, m: u32, k: u32, alpha: f64) -> Result<f64> {
    check_mk(m, k)?;
    let model = RateModel::new(alpha)?;
    if !(t_target > 0.0 && t_target.is_finite()) {
        return Err(Error::domain(format!("ASE target {t_target} must be positive")));
    }
    Ok(t_target / (k as f64 * model.mean_rate_exact(m, k)?.mean_rate))
}

pub fn optimal_m_given_k(profile: &BsPowerProfile, k: u32, alpha: f64, m_hi: u32) -> Result<u32> {
    Planner::new(alpha)?.optimal_m_given_k(profile, k, m_hi)
}

pub fn plan_optimal(problem: &PlanningProblem) -> Result<PlanningSolution> {
    Planner::new(problem.alpha)?.plan_optimal(problem)
}

pub fn suboptimal_k_given_m(profile: &BsPowerProfile, m: f64, alpha: f64) -> Result<f64> {
    Planner::new(alpha)?.suboptimal_k_given_m(profile, m)
}

pub fn suboptimal_m_given_k(profile: &BsPowerProfile, k: f64, alpha: f64, m_hi: f64) -> Result<f64> {
    Planner::new(alpha)?.suboptimal_m_given_k(profile, k, m_hi)
}

pub fn plan_suboptimal(problem: &PlanningProblem, initial_k: f64) -> Result<PlanningSolution> {
    Planner::new(problem.alpha)?.plan_suboptimal(problem, initial_k)
}

pub fn energy_efficiency(profile: &BsPowerProfile, m: u32, k: u32, alpha: f64) -> Result<f64> {
    Planner::new(alpha)?.energy_efficiency(profile, m, k)
}

pub fn plan_baseline(problem: &PlanningProblem, kind: BaselineKind) -> Result<PlanningSolution> {
    Planner::new(problem.alpha)?.plan_baseline(problem, kind)
}
