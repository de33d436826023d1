//! Command-line front end.
//!
//! Exit codes: 0 success, 1 bad input (usage, domain or configuration
//! error), 2 a solver failed to converge.

mod profile;
pub mod sweep;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{Map, Value};

use crate::ase_optimizer::{optimal_k_exact, optimal_k_lower_bound, optimal_user_fraction};
use crate::energy_planner::{BaselineKind, PlanningProblem, PlanningSolution, Planner};
use crate::error::{Error, Result};
use crate::mc_sim::{
    simulate_with_samples, validate_gamma_approx, write_samples_csv_file, SimulationConfig, SimulationMode,
};
use crate::rate_model::{NetworkConfig, RateModel};

pub use profile::{load_profile, parse_profile};
use sweep::{parse_fixed, parse_range, Axis, Fixed, Format, Quantity, Range, SweepRequest};

/// Default directory for files written by `sweep` when `--output` is absent.
pub const OUT_DIR_ENV: &str = "PPP_ASE_OUT_DIR";

#[derive(Debug, Parser)]
#[command(name = "ppp-ase", version, about = "ASE and energy-optimal deployment of Poisson MU-MIMO networks")]
struct Cli {
    /// Print a JSON object instead of key=value lines.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Mean per-user rate (nats/s/Hz), exact or lower bound.
    Rate {
        #[arg(short = 'M', long = "m")]
        m: f64,
        #[arg(short = 'K', long = "k")]
        k: f64,
        #[arg(long, default_value_t = 4.0)]
        alpha: f64,
        /// Evaluate the lower bound (real M, K allowed).
        #[arg(long)]
        lower_bound: bool,
    },
    /// Area spectral efficiency (nats/s/Hz/km^2).
    Ase {
        #[arg(long, default_value_t = 1.0)]
        lambda_b: f64,
        #[arg(short = 'M', long = "m")]
        m: f64,
        #[arg(short = 'K', long = "k")]
        k: f64,
        #[arg(long, default_value_t = 4.0)]
        alpha: f64,
        #[arg(long)]
        lower_bound: bool,
    },
    /// ASE-maximizing number of scheduled users for M antennas.
    OptimalK {
        #[arg(short = 'M', long = "m")]
        m: u32,
        #[arg(long, default_value_t = 4.0)]
        alpha: f64,
        #[arg(long, value_enum, default_value_t = KMethod::Exact)]
        method: KMethod,
    },
    /// Optimal loading fraction u* and the gain per antenna G(u*).
    Gapa {
        #[arg(long, default_value_t = 4.0)]
        alpha: f64,
    },
    /// Energy-optimal plan (exhaustive over K).
    Plan(PlanArgs),
    /// Energy plan by alternating optimization on the lower bound.
    PlanSub {
        #[command(flatten)]
        plan: PlanArgs,
        #[arg(long, default_value_t = 1.0)]
        initial_k: f64,
    },
    /// SU-MIMO or single-antenna reference plan.
    Baseline {
        #[command(flatten)]
        plan: PlanArgs,
        #[arg(long, value_enum)]
        kind: BaselineArg,
    },
    /// Monte Carlo estimate of the typical user's rate.
    Simulate {
        #[command(flatten)]
        sim: SimArgs,
        /// Write per-trial samples (trial,sir,rate,n_bs,r0) to this CSV file.
        #[arg(long)]
        samples_csv: Option<PathBuf>,
    },
    /// Compare full-ZF interferer gains with the Gamma(K,1) model.
    ValidateApprox {
        #[command(flatten)]
        sim: SimArgs,
    },
    /// Evaluate a quantity over a parameter range and write a table.
    Sweep {
        #[arg(long, value_enum)]
        quantity: Quantity,
        #[arg(long, value_enum)]
        axis: Axis,
        /// start:stop:step, inclusive.
        #[arg(long, value_parser = parse_range)]
        range: Range,
        /// Comma-separated key=value pairs (M, K, u, alpha, lambda_b, t_target, profile).
        #[arg(long, value_parser = parse_fixed, default_value = "")]
        fixed: Fixed,
        /// Output file; defaults to $PPP_ASE_OUT_DIR/sweep_<quantity>_<axis>.<ext>, else stdout.
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum KMethod {
    Exact,
    LowerBound,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum BaselineArg {
    SuMimo,
    SingleAntenna,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    FullZf,
    GammaApprox,
}

#[derive(Debug, Args)]
struct PlanArgs {
    /// Built-in profile name (macro, micro, pico, macro-nominal, micro-nominal) or TOML file.
    #[arg(long)]
    profile: String,
    #[arg(long, default_value_t = 4.0)]
    alpha: f64,
    /// ASE target, nats/s/Hz/km^2.
    #[arg(long)]
    target: f64,
    #[arg(long, default_value_t = 64)]
    k_max: u32,
    #[arg(long, default_value_t = 512)]
    m_max: u32,
}

#[derive(Debug, Args)]
struct SimArgs {
    #[arg(short = 'M', long = "m")]
    m: u32,
    #[arg(short = 'K', long = "k")]
    k: u32,
    #[arg(long, default_value_t = 4.0)]
    alpha: f64,
    #[arg(long, default_value_t = 10_000)]
    trials: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = ModeArg::FullZf)]
    mode: ModeArg,
    #[arg(long, default_value_t = 1.0)]
    lambda_b: f64,
    /// km; defaults to a disk holding 1000 BSs on average.
    #[arg(long)]
    window_radius: Option<f64>,
    /// W.
    #[arg(long, default_value_t = 1.0)]
    transmit_power: f64,
}

impl PlanArgs {
    fn problem(&self) -> Result<PlanningProblem> {
        let profile = load_profile(&self.profile)?;
        let problem = PlanningProblem {
            profile,
            alpha: self.alpha,
            t_target: self.target,
            k_search_max: self.k_max,
            m_search_max: self.m_max,
        };
        problem.validate()?;
        Ok(problem)
    }
}

impl SimArgs {
    fn config(&self) -> SimulationConfig {
        let mode = match self.mode {
            ModeArg::FullZf => SimulationMode::FullZf,
            ModeArg::GammaApprox => SimulationMode::GammaApprox,
        };
        let mut cfg = SimulationConfig::new(self.m, self.k, self.alpha, self.trials, self.seed, mode)
            .with_density(self.lambda_b);
        if let Some(r) = self.window_radius {
            cfg.window_radius = r;
        }
        cfg.transmit_power = self.transmit_power;
        cfg
    }
}

/// Ordered key/value output, printed as `key=value` lines or one JSON object.
struct Output(Map<String, Value>);

impl Output {
    fn new() -> Self {
        Self(Map::new())
    }

    fn put(&mut self, key: &str, value: impl Into<Value>) -> &mut Self {
        self.0.insert(key.to_string(), value.into());
        self
    }

    fn emit(&self, out: &mut dyn Write, as_json: bool) -> std::io::Result<()> {
        if as_json {
            writeln!(out, "{}", Value::Object(self.0.clone()))
        } else {
            for (k, v) in &self.0 {
                match v {
                    Value::String(s) => writeln!(out, "{k}={s}")?,
                    other => writeln!(out, "{k}={other}")?,
                }
            }
            Ok(())
        }
    }
}

fn plan_output(sol: &PlanningSolution, problem: &PlanningProblem) -> Output {
    let mut o = Output::new();
    o.put("method", serde_json::to_value(sol.method).unwrap_or(Value::Null))
        .put("alpha", problem.alpha)
        .put("t_target", problem.t_target)
        .put("m_star", sol.m_star)
        .put("k_star", sol.k_star)
        .put("lambda_b_star_per_km2", sol.lambda_b_star)
        .put("nec_w_per_km2", sol.nec)
        .put("energy_efficiency_nats_per_hz_per_w", sol.energy_efficiency)
        .put("iterations", sol.iterations)
        .put("converged", sol.converged);
    if let Some((m, k)) = sol.relaxed {
        o.put("m_relaxed", m).put("k_relaxed", k);
    }
    o
}

fn integer_arg(v: f64, name: &str) -> Result<u32> {
    if v.fract() == 0.0 && v >= 1.0 && v <= u32::MAX as f64 {
        Ok(v as u32)
    } else {
        Err(Error::domain(format!("{name} = {v} must be a positive integer (use --lower-bound for real values)")))
    }
}

fn default_output_path(quantity: Quantity, axis: Axis, format: Format) -> Option<PathBuf> {
    let dir = std::env::var_os(OUT_DIR_ENV)?;
    let ext = match format {
        Format::Csv => "csv",
        Format::Json => "json",
    };
    Some(Path::new(&dir).join(format!("sweep_{}_{}.{ext}", quantity.name(), axis.name())))
}

fn execute(cli: Cli, out: &mut dyn Write) -> Result<()> {
    let as_json = cli.json;
    let o = match cli.command {
        Command::Rate { m, k, alpha, lower_bound } => {
            let model = RateModel::new(alpha)?;
            let r = if lower_bound {
                model.mean_rate_lower_bound(m, k)?
            } else {
                model.mean_rate_exact(integer_arg(m, "M")?, integer_arg(k, "K")?)?
            };
            let mut o = Output::new();
            o.put("M", m)
                .put("K", k)
                .put("alpha", alpha)
                .put("is_lower_bound", r.is_lower_bound)
                .put("mean_rate_nats_per_s_per_hz", r.mean_rate)
                .put("quadrature_error_estimate", r.quadrature_error_estimate);
            o
        }
        Command::Ase { lambda_b, m, k, alpha, lower_bound } => {
            let model = RateModel::new(alpha)?;
            let cfg = NetworkConfig::new(lambda_b, m, k, alpha)?;
            let t = if lower_bound { model.ase_lower_bound(&cfg)? } else { model.ase_exact(&cfg)? };
            let mut o = Output::new();
            o.put("lambda_b_per_km2", lambda_b)
                .put("M", m)
                .put("K", k)
                .put("alpha", alpha)
                .put("is_lower_bound", lower_bound)
                .put("ase_nats_per_s_per_hz_per_km2", t);
            o
        }
        Command::OptimalK { m, alpha, method } => {
            let k = match method {
                KMethod::Exact => optimal_k_exact(m, alpha)?,
                KMethod::LowerBound => optimal_k_lower_bound(m, alpha)?,
            };
            let mut o = Output::new();
            o.put("M", m)
                .put("alpha", alpha)
                .put("method", if matches!(method, KMethod::Exact) { "exact" } else { "lower_bound" })
                .put("k_star", k);
            o
        }
        Command::Gapa { alpha } => {
            let sol = optimal_user_fraction(alpha)?;
            let mut o = Output::new();
            o.put("alpha", alpha).put("u_star", sol.u_star).put("gapa", sol.gapa);
            o
        }
        Command::Plan(args) => {
            let problem = args.problem()?;
            let sol = Planner::new(problem.alpha)?.plan_optimal(&problem)?;
            plan_output(&sol, &problem)
        }
        Command::PlanSub { plan, initial_k } => {
            let problem = plan.problem()?;
            let sol = Planner::new(problem.alpha)?.plan_suboptimal(&problem, initial_k)?;
            if !sol.converged {
                writeln!(out, "# warning: alternating optimization hit its iteration cap")?;
            }
            plan_output(&sol, &problem)
        }
        Command::Baseline { plan, kind } => {
            let problem = plan.problem()?;
            let kind = match kind {
                BaselineArg::SuMimo => BaselineKind::SuMimo,
                BaselineArg::SingleAntenna => BaselineKind::SingleAntenna,
            };
            let sol = Planner::new(problem.alpha)?.plan_baseline(&problem, kind)?;
            plan_output(&sol, &problem)
        }
        Command::Simulate { sim, samples_csv } => {
            let cfg = sim.config();
            let (r, samples) = simulate_with_samples(&cfg)?;
            if let Some(path) = &samples_csv {
                write_samples_csv_file(path, &samples)?;
            }
            let mut o = Output::new();
            o.put("M", cfg.m)
                .put("K", cfg.k)
                .put("alpha", cfg.alpha)
                .put("mode", serde_json::to_value(cfg.mode).unwrap_or(Value::Null))
                .put("seed", cfg.seed)
                .put("trials", r.trials_used)
                .put("mean_rate_nats_per_s_per_hz", r.mean_rate)
                .put("std_error", r.std_error)
                .put("sir_q05", r.sir_quantiles.q05)
                .put("sir_q25", r.sir_quantiles.q25)
                .put("sir_q50", r.sir_quantiles.q50)
                .put("sir_q75", r.sir_quantiles.q75)
                .put("sir_q95", r.sir_quantiles.q95)
                .put("g00_mean", r.g00_moments.0)
                .put("g00_variance", r.g00_moments.1)
                .put("gi0_mean", r.gi0_moments.0)
                .put("gi0_variance", r.gi0_moments.1);
            if let Some(path) = samples_csv {
                o.put("samples_csv", path.display().to_string());
            }
            o
        }
        Command::ValidateApprox { sim } => {
            let mut cfg = sim.config();
            cfg.mode = SimulationMode::FullZf;
            let rep = validate_gamma_approx(&cfg)?;
            let mut o = Output::new();
            if let Value::Object(map) = serde_json::to_value(rep).map_err(|e| Error::Io(std::io::Error::other(e)))? {
                o.0 = map;
            }
            o
        }
        Command::Sweep { quantity, axis, range, fixed, output, format } => {
            let table = SweepRequest { quantity, axis, range, fixed }.run()?;
            let path = output.or_else(|| default_output_path(quantity, axis, format));
            match path {
                Some(path) => {
                    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
                        std::fs::create_dir_all(parent)?;
                    }
                    let file = std::io::BufWriter::new(std::fs::File::create(&path)?);
                    match format {
                        Format::Csv => table.write_csv(file)?,
                        Format::Json => table.write_json(file)?,
                    }
                    let mut o = Output::new();
                    o.put("wrote", path.display().to_string()).put("rows", table.rows.len());
                    o
                }
                None => {
                    match format {
                        Format::Csv => table.write_csv(&mut *out)?,
                        Format::Json => table.write_json(&mut *out)?,
                    }
                    return Ok(());
                }
            }
        }
    };
    o.emit(out, as_json)?;
    Ok(())
}

/// Exit code for an error.
pub fn exit_code(err: &Error) -> i32 {
    if err.is_convergence_failure() {
        2
    } else {
        1
    }
}

/// Parses `argv` (program name first) and runs the command.
pub fn run_with_io<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{}", e.render());
                    return 0;
                }
                _ => 1,
            };
            let _ = write!(err, "{}", e.render());
            return code;
        }
    };
    match execute(cli, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}
