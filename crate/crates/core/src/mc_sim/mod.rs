//! Monte Carlo oracle for the typical user's rate.
//!
//! Each trial draws a PPP of BSs around the origin, serves the typical user
//! from the nearest BS, and evaluates `SIR = g₀₀·r₀^(−α) / Σᵢ gᵢ₀·rᵢ^(−α)`.
//! Trial `t` takes geometry from ChaCha stream `2t` and fading from stream
//! `2t + 1` of the configured seed, so results do not depend on how trials
//! are spread over threads, and two modes run with the same seed share
//! their geometry.

mod stats;
mod zf;

use std::io::Write;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, Gamma};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use stats::{ks_two_sample, pairwise_sum, quantile_sorted};
pub use zf::{zf_precoder, ZfWorkspace};

/// Expected BS count of the default simulation window.
pub const DEFAULT_EXPECTED_BS: f64 = 1000.0;
/// Below this expected BS count a warning is logged.
pub const MIN_RECOMMENDED_BS: f64 = 200.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SimulationMode {
    /// ZF precoders built from drawn `M × K` Rayleigh channels at every BS.
    FullZf,
    /// `g₀₀ ~ Gamma(M+1−K, 1)`, `gᵢ₀ ~ Gamma(K, 1)`.
    GammaApprox,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig {
    /// BS/km².
    pub lambda_b: f64,
    pub m: u32,
    pub k: u32,
    pub alpha: f64,
    /// km.
    pub window_radius: f64,
    pub trials: usize,
    pub seed: u64,
    pub mode: SimulationMode,
    /// W. Scales signal and interference alike.
    pub transmit_power: f64,
}

impl SimulationConfig {
    /// Unit density, unit power, and a window holding
    /// [`DEFAULT_EXPECTED_BS`] BSs on average.
    pub fn new(m: u32, k: u32, alpha: f64, trials: usize, seed: u64, mode: SimulationMode) -> Self {
        Self {
            lambda_b: 1.0,
            m,
            k,
            alpha,
            window_radius: default_window_radius(1.0),
            trials,
            seed,
            mode,
            transmit_power: 1.0,
        }
    }

    /// Changes the density and rescales the window to keep the expected count.
    pub fn with_density(mut self, lambda_b: f64) -> Self {
        let count = self.expected_bs_count();
        self.lambda_b = lambda_b;
        self.window_radius = (count / (std::f64::consts::PI * lambda_b)).sqrt();
        self
    }

    pub fn expected_bs_count(&self) -> f64 {
        self.lambda_b * std::f64::consts::PI * self.window_radius * self.window_radius
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 2.0 && self.alpha.is_finite()) {
            return Err(Error::domain(format!("alpha = {} must exceed 2", self.alpha)));
        }
        if self.k == 0 || self.k > self.m {
            return Err(Error::domain(format!("need 1 ≤ K ≤ M, got M = {}, K = {}", self.m, self.k)));
        }
        for (name, v) in [
            ("lambda_b", self.lambda_b),
            ("window_radius", self.window_radius),
            ("transmit_power", self.transmit_power),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::domain(format!("{name} = {v} must be positive")));
            }
        }
        if self.trials == 0 {
            return Err(Error::domain("trials must be at least 1"));
        }
        let count = self.expected_bs_count();
        if count < 2.0 {
            // A trial needs a serving BS and an interferer.
            return Err(Error::domain(format!("expected BS count {count:.3} in the window is below 2")));
        }
        if count < MIN_RECOMMENDED_BS {
            log::warn!(
                "expected BS count {count:.1} is below {MIN_RECOMMENDED_BS}; finite-window bias may be visible"
            );
        }
        Ok(())
    }
}

/// Radius of the disk holding `DEFAULT_EXPECTED_BS` BSs on average.
pub fn default_window_radius(lambda_b: f64) -> f64 {
    (DEFAULT_EXPECTED_BS / (std::f64::consts::PI * lambda_b)).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SirQuantiles {
    pub q05: f64,
    pub q25: f64,
    pub q50: f64,
    pub q75: f64,
    pub q95: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationResult {
    /// nats/s/Hz.
    pub mean_rate: f64,
    pub std_error: f64,
    pub trials_used: usize,
    pub sir_quantiles: SirQuantiles,
    /// Mean and unbiased variance of the serving-link gain.
    pub g00_moments: (f64, f64),
    /// Mean and unbiased variance of the nearest interferer's gain.
    pub gi0_moments: (f64, f64),
    /// Geometries redrawn because fewer than two BSs fell in the window.
    pub geometry_redraws: u64,
}

/// Per-trial record.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialSample {
    pub trial: usize,
    pub sir: f64,
    pub rate: f64,
    pub n_bs: usize,
    pub r0: f64,
    pub g00: f64,
    pub g_nearest: f64,
}

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Sorted BS distances of a PPP on the disk, drawn as successive arrivals:
/// `π·λ·rᵢ²` are partial sums of unit exponentials. The count is
/// Poisson(λπR²) and, given the count, points are uniform on the disk.
fn sample_distances<R: Rng + ?Sized>(lambda_b: f64, radius: f64, rng: &mut R, out: &mut Vec<f64>) {
    out.clear();
    let scale = 1.0 / (std::f64::consts::PI * lambda_b);
    let r2_max = radius * radius;
    let mut s = 0.0;
    loop {
        let e: f64 = Exp1.sample(rng);
        s += e;
        let r2 = s * scale;
        if r2 > r2_max {
            break;
        }
        out.push(r2.sqrt());
    }
}

/// PPP of density `lambda_b` on the disk of radius `window_radius` (km),
/// as `[x, y]` points sorted by distance from the origin.
pub fn sample_ppp<R: Rng + ?Sized>(lambda_b: f64, window_radius: f64, rng: &mut R) -> Result<Vec<[f64; 2]>> {
    if !(lambda_b > 0.0 && lambda_b.is_finite() && window_radius > 0.0 && window_radius.is_finite()) {
        return Err(Error::domain("sample_ppp needs positive density and window radius"));
    }
    let mut dist = Vec::new();
    sample_distances(lambda_b, window_radius, rng, &mut dist);
    Ok(dist
        .into_iter()
        .map(|r| {
            let theta = rng.random::<f64>() * std::f64::consts::TAU;
            [r * theta.cos(), r * theta.sin()]
        })
        .collect())
}

struct TrialWorkspace {
    dist: Vec<f64>,
    zf: ZfWorkspace,
}

impl TrialWorkspace {
    fn new(m: usize, k: usize) -> Self {
        Self { dist: Vec::new(), zf: ZfWorkspace::new(m, k) }
    }
}

struct GainSampler {
    serving: Gamma<f64>,
    interferer: Gamma<f64>,
    /// `Gamma(M − j, 1)` for `j < K`: squared diagonal of the Gram factor.
    bartlett: Vec<Gamma<f64>>,
}

impl GainSampler {
    fn new(m: u32, k: u32) -> Result<Self> {
        let gamma = |shape: u32| Gamma::new(shape as f64, 1.0).map_err(|e| Error::domain(e.to_string()));
        Ok(Self {
            serving: gamma(m + 1 - k)?,
            interferer: gamma(k)?,
            bartlett: (0..k).map(|j| gamma(m - j)).collect::<Result<_>>()?,
        })
    }
}

struct TrialOutcome {
    sample: TrialSample,
    geometry_redraws: u64,
}

fn run_trial(cfg: &SimulationConfig, gammas: &GainSampler, trial: usize, ws: &mut TrialWorkspace) -> TrialOutcome {
    let mut geo = stream_rng(cfg.seed, 2 * trial as u64);
    let mut fading = stream_rng(cfg.seed, 2 * trial as u64 + 1);

    let mut geometry_redraws = 0;
    loop {
        sample_distances(cfg.lambda_b, cfg.window_radius, &mut geo, &mut ws.dist);
        if ws.dist.len() >= 2 {
            break;
        }
        geometry_redraws += 1;
    }

    let p = cfg.transmit_power;
    let path = |r: f64| r.powf(-cfg.alpha);
    let r0 = ws.dist[0];
    let (g00, g_nearest, interference) = match cfg.mode {
        SimulationMode::FullZf => {
            ws.zf.draw_factor(&mut fading, &gammas.bartlett);
            let g00 = ws.zf.own_gain(0);
            let mut interference = Vec::with_capacity(ws.dist.len() - 1);
            let mut g_nearest = 0.0;
            for i in 1..ws.dist.len() {
                ws.zf.draw_factor(&mut fading, &gammas.bartlett);
                let g = ws.zf.leakage_white(&mut fading);
                if i == 1 {
                    g_nearest = g;
                }
                interference.push(p * g * path(ws.dist[i]));
            }
            (g00, g_nearest, pairwise_sum(&interference))
        }
        SimulationMode::GammaApprox => {
            let g00 = gammas.serving.sample(&mut fading);
            let mut interference = Vec::with_capacity(ws.dist.len() - 1);
            let mut g_nearest = 0.0;
            for i in 1..ws.dist.len() {
                let g = gammas.interferer.sample(&mut fading);
                if i == 1 {
                    g_nearest = g;
                }
                interference.push(p * g * path(ws.dist[i]));
            }
            (g00, g_nearest, pairwise_sum(&interference))
        }
    };
    let sir = p * g00 * path(r0) / interference;
    TrialOutcome {
        sample: TrialSample {
            trial,
            sir,
            rate: sir.ln_1p(),
            n_bs: ws.dist.len(),
            r0,
            g00,
            g_nearest,
        },
        geometry_redraws,
    }
}

/// Runs all trials and returns the summary together with per-trial records.
pub fn simulate_with_samples(cfg: &SimulationConfig) -> Result<(SimulationResult, Vec<TrialSample>)> {
    cfg.validate()?;
    let (m, k) = (cfg.m as usize, cfg.k as usize);
    let gammas = GainSampler::new(cfg.m, cfg.k)?;
    let outcomes: Vec<TrialOutcome> = (0..cfg.trials)
        .into_par_iter()
        .map_init(|| TrialWorkspace::new(m, k), |ws, t| run_trial(cfg, &gammas, t, ws))
        .collect();

    let samples: Vec<TrialSample> = outcomes.iter().map(|o| o.sample).collect();
    let rates: Vec<f64> = samples.iter().map(|s| s.rate).collect();
    let g00: Vec<f64> = samples.iter().map(|s| s.g00).collect();
    let gi0: Vec<f64> = samples.iter().map(|s| s.g_nearest).collect();
    let mut sirs: Vec<f64> = samples.iter().map(|s| s.sir).collect();
    sirs.sort_by(f64::total_cmp);

    let n = rates.len();
    let result = SimulationResult {
        mean_rate: stats::mean(&rates),
        std_error: (stats::variance(&rates) / n as f64).sqrt(),
        trials_used: n,
        sir_quantiles: SirQuantiles {
            q05: quantile_sorted(&sirs, 0.05),
            q25: quantile_sorted(&sirs, 0.25),
            q50: quantile_sorted(&sirs, 0.50),
            q75: quantile_sorted(&sirs, 0.75),
            q95: quantile_sorted(&sirs, 0.95),
        },
        g00_moments: (stats::mean(&g00), stats::variance(&g00)),
        gi0_moments: (stats::mean(&gi0), stats::variance(&gi0)),
        geometry_redraws: outcomes.iter().map(|o| o.geometry_redraws).sum(),
    };
    Ok((result, samples))
}

pub fn simulate_typical_user(cfg: &SimulationConfig) -> Result<SimulationResult> {
    Ok(simulate_with_samples(cfg)?.0)
}

/// `(mean_rate, std_error)`.
pub fn estimate_mean_rate(cfg: &SimulationConfig) -> Result<(f64, f64)> {
    let r = simulate_typical_user(cfg)?;
    Ok((r.mean_rate, r.std_error))
}

/// Writes per-trial records as CSV with columns `trial,sir,rate,n_bs,r0`.
pub fn write_samples_csv<W: Write>(out: W, samples: &[TrialSample]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::Io(std::io::Error::other(e));
    w.write_record(["trial", "sir", "rate", "n_bs", "r0"]).map_err(io)?;
    for s in samples {
        w.write_record([
            s.trial.to_string(),
            format!("{:e}", s.sir),
            format!("{:e}", s.rate),
            s.n_bs.to_string(),
            format!("{:e}", s.r0),
        ])
        .map_err(io)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_samples_csv_file(path: &Path, samples: &[TrialSample]) -> Result<()> {
    write_samples_csv(std::fs::File::create(path)?, samples)
}

/// Nearest-interferer gain statistics under full ZF compared with the
/// `Gamma(K, 1)` model, plus the mean-rate gap between the two modes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaApproxReport {
    pub k: u32,
    pub gi0_mean: f64,
    pub gi0_mean_std_error: f64,
    pub gi0_variance: f64,
    /// `(mean − K)/K`.
    pub mean_relative_deviation: f64,
    /// `(variance − K)/K`.
    pub variance_relative_deviation: f64,
    pub rate_full_zf: f64,
    pub rate_full_zf_std_error: f64,
    pub rate_gamma: f64,
    pub rate_gamma_std_error: f64,
    /// `(rate_full_zf − rate_gamma)/rate_gamma`.
    pub rate_gap_relative: f64,
    /// Two-sample KS test of nearest-interferer gains, full ZF vs Gamma.
    pub ks_statistic: f64,
    pub ks_p_value: f64,
}

/// Minimum trial count accepted by [`validate_gamma_approx`].
pub const MIN_VALIDATION_TRIALS: usize = 10_000;

pub fn validate_gamma_approx(cfg: &SimulationConfig) -> Result<GammaApproxReport> {
    if cfg.mode != SimulationMode::FullZf {
        return Err(Error::domain("validate_gamma_approx needs a full_zf configuration"));
    }
    if cfg.trials < MIN_VALIDATION_TRIALS {
        return Err(Error::domain(format!(
            "validate_gamma_approx needs at least {MIN_VALIDATION_TRIALS} trials, got {}",
            cfg.trials
        )));
    }
    let (zf, zf_samples) = simulate_with_samples(cfg)?;
    let gamma_cfg = SimulationConfig { mode: SimulationMode::GammaApprox, ..*cfg };
    let (gm, gm_samples) = simulate_with_samples(&gamma_cfg)?;
    let a: Vec<f64> = zf_samples.iter().map(|s| s.g_nearest).collect();
    let b: Vec<f64> = gm_samples.iter().map(|s| s.g_nearest).collect();
    let (ks_statistic, ks_p_value) = ks_two_sample(&a, &b);
    let kf = cfg.k as f64;
    let (mean, var) = zf.gi0_moments;
    Ok(GammaApproxReport {
        k: cfg.k,
        gi0_mean: mean,
        gi0_mean_std_error: (var / zf.trials_used as f64).sqrt(),
        gi0_variance: var,
        mean_relative_deviation: (mean - kf) / kf,
        variance_relative_deviation: (var - kf) / kf,
        rate_full_zf: zf.mean_rate,
        rate_full_zf_std_error: zf.std_error,
        rate_gamma: gm.mean_rate,
        rate_gamma_std_error: gm.std_error,
        rate_gap_relative: (zf.mean_rate - gm.mean_rate) / gm.mean_rate,
        ks_statistic,
        ks_p_value,
    })
}
