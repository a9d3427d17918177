//! Command-line front door: thin subcommands over the library engines and
//! the experiment runner.
//!
//! Exit codes: 0 on success, 1 on usage/validation errors, 2 on runtime or
//! solver errors. The `fixed-points:` seed syntax injects a literal sample
//! so worked examples double as shell-level golden tests. The environment
//! variable `LOGLAW_OUT` overrides the default output directory.

use crate::density::{Density, Sample};
use crate::error::{Error, Result};
use crate::experiment::{
    self, emit, DensitySpec, ExperimentConfig, ExperimentId, NetSpec, RunOutput,
};
use crate::functions::{interval_net, FunctionDescriptor, Kernel1d};
use crate::limit::{strassen_rate_1d, LimitBallModel};
use crate::process::{
    kde, kde_band, local_empirical, log_spaced_ns, oscillation_modulus, validate_schedule,
    BandwidthSchedule, IndexedSample, Normalization,
};
use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;

#[derive(Parser, Debug)]
#[command(
    name = "loglaw",
    about = "Monte Carlo laboratory for local empirical processes and kernel density estimators",
    version
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Check a bandwidth sequence against the three validity conditions.
    ValidateSchedule(ValidateScheduleArgs),
    /// Oscillation modulus of the uniform empirical process.
    Osc(OscArgs),
    /// Kernel density estimate at a point.
    Kde(KdeArgs),
    /// Kernel density estimate with plug-in confidence band over a grid.
    Band(BandArgs),
    /// Local empirical process over an interval net.
    Local(LocalArgs),
    /// Sup-norm distance to the unit ball of a Gram matrix.
    Dist(DistArgs),
    /// Rate function of a value vector (pseudoinverse or 1d closed form).
    Rate(RateArgs),
    /// Poissonization diagnostics (covariance, decoupling, gaussian, ldp).
    Poisson(PoissonArgs),
    /// Run a declarative experiment from a JSON config.
    Experiment(ExperimentArgs),
}

#[derive(Args, Debug)]
pub struct ValidateScheduleArgs {
    /// Power-schedule exponent for h_n = n^{-alpha}.
    #[arg(long, default_value_t = 0.5)]
    pub alpha: f64,
    /// Explicit table "n:h,n:h,..." overriding the power schedule.
    #[arg(long)]
    pub table: Option<String>,
    /// Range of n, two values: smallest and largest.
    #[arg(long, num_args = 2, required = true)]
    pub n: Vec<u64>,
    /// Number of log-spaced evaluation points.
    #[arg(long, default_value_t = 24)]
    pub points: usize,
}

#[derive(Args, Debug)]
pub struct OscArgs {
    /// Sample size (ignored under fixed-points seeds).
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    /// Window length h in (0, 1).
    #[arg(long)]
    pub h: f64,
    /// Integer seed, or "fixed-points:0.2,0.3" for a literal sample.
    #[arg(long, default_value = "0")]
    pub seed: String,
}

#[derive(Args, Debug)]
pub struct KdeArgs {
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    #[arg(long)]
    pub h: f64,
    /// Evaluation point.
    #[arg(long)]
    pub z: f64,
    #[arg(long, value_enum, default_value_t = KernelChoice::Epanechnikov)]
    pub kernel: KernelChoice,
    #[arg(long, default_value = "0")]
    pub seed: String,
    #[command(flatten)]
    pub density: DensityArgs,
}

#[derive(Args, Debug)]
pub struct BandArgs {
    #[arg(long, default_value_t = 10000)]
    pub n: usize,
    #[arg(long)]
    pub h: f64,
    #[arg(long, value_enum, default_value_t = KernelChoice::Epanechnikov)]
    pub kernel: KernelChoice,
    #[arg(long, default_value = "0")]
    pub seed: String,
    /// Grid over [grid-lo, grid-hi] with grid-count points.
    #[arg(long = "grid-lo", default_value_t = 0.1)]
    pub grid_lo: f64,
    #[arg(long = "grid-hi", default_value_t = 0.9)]
    pub grid_hi: f64,
    #[arg(long = "grid-count", default_value_t = 50)]
    pub grid_count: usize,
    /// Output directory for band.csv (defaults to $LOGLAW_OUT or ./loglaw-out).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub density: DensityArgs,
}

#[derive(Args, Debug)]
pub struct LocalArgs {
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    #[arg(long)]
    pub h: f64,
    /// Evaluation point z.
    #[arg(long)]
    pub z: f64,
    /// Interval net endpoints, e.g. "0.25,0.5,1.0".
    #[arg(long, default_value = "0.25,0.5,0.75,1.0")]
    pub ts: String,
    #[arg(long, value_enum, default_value_t = ModeChoice::Raw)]
    pub mode: ModeChoice,
    #[arg(long, default_value = "0")]
    pub seed: String,
    #[command(flatten)]
    pub density: DensityArgs,
}

#[derive(Args, Debug)]
pub struct DistArgs {
    /// Gram matrix, rows separated by ';': "0.25,0;0,0.25".
    #[arg(long)]
    pub sigma: String,
    /// Value vector: "1,1".
    #[arg(long)]
    pub psi: String,
    #[arg(long = "solver-tol", default_value_t = 1e-6)]
    pub solver_tol: f64,
}

#[derive(Args, Debug)]
pub struct RateArgs {
    /// Gram matrix (pseudoinverse route).
    #[arg(long)]
    pub sigma: Option<String>,
    /// Interval endpoints (1d closed-form route).
    #[arg(long = "t-grid")]
    pub t_grid: Option<String>,
    #[arg(long)]
    pub psi: String,
}

#[derive(Args, Debug)]
pub struct PoissonArgs {
    /// Which diagnostic to run.
    #[arg(long, value_enum)]
    pub diag: DiagChoice,
    /// Sample-size list.
    #[arg(long, num_args = 1.., required = true)]
    pub n: Vec<u64>,
    /// Power-schedule exponent.
    #[arg(long, default_value_t = 0.5)]
    pub alpha: f64,
    /// Evaluation point.
    #[arg(long, default_value_t = 0.5)]
    pub z: f64,
    /// Interval net endpoints ("" for a single uniform kernel).
    #[arg(long, default_value = "")]
    pub ts: String,
    #[arg(long, default_value_t = 20000)]
    pub reps: u64,
    #[arg(long, num_args = 1.., default_values_t = [1u64])]
    pub seeds: Vec<u64>,
    /// Threshold for the ldp diagnostic.
    #[arg(long, default_value_t = 1.0)]
    pub lambda: f64,
    /// Evaluation points for the fact6 diagnostic, e.g. "0.3,0.6".
    #[arg(long = "z-list", default_value = "0.3,0.6")]
    pub z_list: String,
    /// Event radii for fact6 (one per z).
    #[arg(long, default_value = "0.9,0.9")]
    pub radii: String,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ExperimentArgs {
    /// Path to the JSON experiment config.
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory (defaults to $LOGLAW_OUT or ./loglaw-out).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Validate and print the resolved plan without sampling.
    #[arg(long, default_value_t = false)]
    pub dry_run: bool,
    /// Worker thread count (default: rayon's choice).
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(clap::ValueEnum, Clone, Copy, Debug)]
pub enum KernelChoice {
    Uniform,
    Epanechnikov,
}

impl From<KernelChoice> for Kernel1d {
    fn from(k: KernelChoice) -> Self {
        match k {
            KernelChoice::Uniform => Kernel1d::Uniform,
            KernelChoice::Epanechnikov => Kernel1d::Epanechnikov,
        }
    }
}

#[derive(clap::ValueEnum, Clone, Copy, Debug)]
pub enum ModeChoice {
    Raw,
    Log,
    LogDensity,
}

impl From<ModeChoice> for Normalization {
    fn from(m: ModeChoice) -> Self {
        match m {
            ModeChoice::Raw => Normalization::Raw,
            ModeChoice::Log => Normalization::Log,
            ModeChoice::LogDensity => Normalization::LogDensity,
        }
    }
}

#[derive(clap::ValueEnum, Clone, Copy, Debug)]
pub enum DiagChoice {
    Cov,
    Fact6,
    Gauss,
    Ldp,
}

/// Shared density flags for the small subcommands (1d only).
#[derive(Args, Debug)]
pub struct DensityArgs {
    #[arg(long = "density", value_enum, default_value_t = DensityChoice::Uniform)]
    pub density_kind: DensityChoice,
    #[arg(long = "density-lo", default_value_t = 0.0)]
    pub density_lo: f64,
    #[arg(long = "density-hi", default_value_t = 1.0)]
    pub density_hi: f64,
    #[arg(long = "density-mode", default_value_t = 0.5)]
    pub density_mode: f64,
}

#[derive(clap::ValueEnum, Clone, Copy, Debug)]
pub enum DensityChoice {
    Uniform,
    Triangular,
}

impl DensityArgs {
    fn build(&self) -> Result<Density> {
        match self.density_kind {
            DensityChoice::Uniform => {
                Density::uniform_box(vec![self.density_lo], vec![self.density_hi])
            }
            DensityChoice::Triangular => {
                Density::triangular(self.density_lo, self.density_hi, self.density_mode)
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Parsing helpers

fn parse_f64_list(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|e| Error::InvalidParameter(format!("bad number {s:?}: {e}")))
        })
        .collect()
}

fn parse_matrix(text: &str) -> Result<(Vec<f64>, usize)> {
    let rows: Vec<Vec<f64>> = text
        .split(';')
        .map(parse_f64_list)
        .collect::<Result<_>>()?;
    let q = rows.len();
    if rows.iter().any(|r| r.len() != q) {
        return Err(Error::InvalidParameter("matrix must be square".into()));
    }
    Ok((rows.into_iter().flatten().collect(), q))
}

/// Seed syntax: a plain integer, or `fixed-points:v1,v2,...` injecting a
/// literal one-dimensional sample.
enum SeedSpec {
    Seeded(u64),
    Fixed(Vec<f64>),
}

fn parse_seed(text: &str) -> Result<SeedSpec> {
    if let Some(rest) = text.strip_prefix("fixed-points:") {
        return Ok(SeedSpec::Fixed(parse_f64_list(rest)?));
    }
    text.parse::<u64>()
        .map(SeedSpec::Seeded)
        .map_err(|e| Error::InvalidParameter(format!("bad seed {text:?}: {e}")))
}

fn resolve_sample(density: &Density, n: usize, seed: &str) -> Result<(Sample, String)> {
    match parse_seed(seed)? {
        SeedSpec::Seeded(s) => Ok((density.sample(n, s), format!("\"seed\":{s}"))),
        SeedSpec::Fixed(points) => {
            let echo = format!("\"fixed_points\":{points:?}");
            Ok((Sample::from_points(1, points)?, echo))
        }
    }
}

fn out_dir(flag: &Option<PathBuf>) -> PathBuf {
    flag.clone()
        .or_else(|| std::env::var_os("LOGLAW_OUT").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("loglaw-out"))
}

// ---------------------------------------------------------------------------
// Dispatch

/// Run a parsed invocation, returning the stdout text.
pub fn dispatch(cli: Cli) -> Result<String> {
    match cli.command {
        Command::ValidateSchedule(a) => {
            let schedule = match &a.table {
                Some(t) => {
                    let pairs: Vec<(u64, f64)> = t
                        .split(',')
                        .map(|p| {
                            let (n, h) = p.split_once(':').ok_or_else(|| {
                                Error::InvalidParameter(format!("bad table entry {p:?}"))
                            })?;
                            Ok((
                                n.trim().parse::<u64>().map_err(|e| {
                                    Error::InvalidParameter(format!("bad n {n:?}: {e}"))
                                })?,
                                h.trim().parse::<f64>().map_err(|e| {
                                    Error::InvalidParameter(format!("bad h {h:?}: {e}"))
                                })?,
                            ))
                        })
                        .collect::<Result<_>>()?;
                    BandwidthSchedule::Table { pairs }
                }
                None => BandwidthSchedule::Power { alpha: a.alpha },
            };
            let ns = match &a.table {
                Some(_) => match &schedule {
                    BandwidthSchedule::Table { pairs } => pairs.iter().map(|&(n, _)| n).collect(),
                    _ => unreachable!(),
                },
                None => log_spaced_ns(a.n[0], a.n[1], a.points),
            };
            let report = validate_schedule(&schedule, &ns)?;
            let mut out = String::new();
            out.push_str(&format!(
                "{{\"schedule\":{},\"n\":[{},{}]}}\n",
                serde_json::to_string(&schedule).unwrap(),
                ns.first().unwrap(),
                ns.last().unwrap()
            ));
            out.push_str(&format!(
                "H.i {}, H.ii {}, H.iii {}\n",
                if report.h1_pass { "pass" } else { "FAIL" },
                if report.h2_pass { "pass" } else { "FAIL" },
                if report.h3_pass { "pass" } else { "FAIL" },
            ));
            if !report.all_pass() {
                return Err(Error::Config(format!("schedule is invalid\n{out}")));
            }
            Ok(out)
        }
        Command::Osc(a) => {
            let density = Density::uniform_box(vec![0.0], vec![1.0])?;
            let (sample, echo) = resolve_sample(&density, a.n, &a.seed)?;
            let value = oscillation_modulus(&sample.points, a.h);
            let ratio = value / (2.0 * a.h * (1.0 / a.h).ln()).sqrt();
            Ok(format!(
                "{{\"n\":{},\"h\":{},{echo}}}\n{value}\nratio {ratio}\n",
                sample.n, a.h
            ))
        }
        Command::Kde(a) => {
            let density = a.density.build()?;
            let (sample, echo) = resolve_sample(&density, a.n, &a.seed)?;
            let idx = IndexedSample::new(&sample);
            let kernel = FunctionDescriptor::kernel(a.kernel.into(), 1)?;
            let value = kde(&idx, &kernel, a.h, &[a.z])?;
            Ok(format!(
                "{{\"n\":{},\"h\":{},\"z\":{},\"kernel\":\"{:?}\",{echo}}}\n{value}\n",
                sample.n, a.h, a.z, a.kernel
            ))
        }
        Command::Band(a) => {
            let density = a.density.build()?;
            let (sample, echo) = resolve_sample(&density, a.n, &a.seed)?;
            let idx = IndexedSample::new(&sample);
            let kernel = FunctionDescriptor::kernel(a.kernel.into(), 1)?;
            if a.grid_count < 2 || !(a.grid_lo < a.grid_hi) {
                return Err(Error::InvalidParameter("bad band grid".into()));
            }
            let grid: Vec<Vec<f64>> = (0..a.grid_count)
                .map(|k| {
                    vec![
                        a.grid_lo
                            + (a.grid_hi - a.grid_lo) * k as f64 / (a.grid_count - 1) as f64,
                    ]
                })
                .collect();
            let band = kde_band(&idx, &kernel, a.h, &grid)?;
            let dir = out_dir(&a.out);
            std::fs::create_dir_all(&dir).map_err(|e| Error::Io {
                path: dir.clone(),
                source: e,
            })?;
            let path = dir.join("band.csv");
            let mut text = String::from("z,f_n,halfwidth\n");
            for p in &band {
                text.push_str(&format!("{},{},{}\n", p.z[0], p.f_n, p.halfwidth));
            }
            std::fs::write(&path, text).map_err(|e| Error::Io {
                path: path.clone(),
                source: e,
            })?;
            Ok(format!(
                "{{\"n\":{},\"h\":{},\"grid\":[{},{},{}],{echo}}}\nwrote {}\n",
                sample.n,
                a.h,
                a.grid_lo,
                a.grid_hi,
                a.grid_count,
                path.display()
            ))
        }
        Command::Local(a) => {
            let density = a.density.build()?;
            let (sample, echo) = resolve_sample(&density, a.n, &a.seed)?;
            let idx = IndexedSample::new(&sample);
            let net = interval_net(&parse_f64_list(&a.ts)?)?;
            let eval = local_empirical(&idx, &[a.z], a.h, &net, &density, a.mode.into())?;
            Ok(format!(
                "{{\"n\":{},\"h\":{},\"z\":{},\"mode\":\"{:?}\",{echo}}}\npsi {:?}\n",
                sample.n, a.h, a.z, a.mode, eval.psi
            ))
        }
        Command::Dist(a) => {
            let (gram, q) = parse_matrix(&a.sigma)?;
            let psi = parse_f64_list(&a.psi)?;
            if psi.len() != q {
                return Err(Error::InvalidParameter("psi length must match sigma".into()));
            }
            let model = LimitBallModel::with_options(
                &gram,
                q,
                crate::limit::DEFAULT_RANK_CUTOFF,
                a.solver_tol,
            )?;
            let p = model.dist_to_unit_ball(&psi)?;
            Ok(format!(
                "{{\"q\":{q},\"solver_tol\":{}}}\ndist {}\nbracket [{}, {}]\nwitness {:?}\n",
                a.solver_tol, p.dist, p.lower, p.upper, p.witness
            ))
        }
        Command::Rate(a) => {
            let psi = parse_f64_list(&a.psi)?;
            match (&a.sigma, &a.t_grid) {
                (Some(sigma), None) => {
                    let (gram, q) = parse_matrix(sigma)?;
                    if psi.len() != q {
                        return Err(Error::InvalidParameter(
                            "psi length must match sigma".into(),
                        ));
                    }
                    let model = LimitBallModel::new(&gram, q)?;
                    Ok(format!("{{\"q\":{q}}}\nrate {}\n", model.rate(&psi)))
                }
                (None, Some(tg)) => {
                    let ts = parse_f64_list(tg)?;
                    Ok(format!(
                        "{{\"q\":{}}}\nrate {}\n",
                        ts.len(),
                        strassen_rate_1d(&ts, &psi)?
                    ))
                }
                _ => Err(Error::InvalidParameter(
                    "rate needs exactly one of --sigma or --t-grid".into(),
                )),
            }
        }
        Command::Poisson(a) => {
            let net = if a.ts.is_empty() {
                NetSpec::SingleKernel {
                    kernel: Kernel1d::Uniform,
                    dim: 1,
                }
            } else {
                NetSpec::Intervals {
                    ts: parse_f64_list(&a.ts)?,
                }
            };
            let (id, z_list, event_radii, lambda) = match a.diag {
                DiagChoice::Cov => (ExperimentId::DiagCov, None, None, None),
                DiagChoice::Gauss => (ExperimentId::DiagGauss, None, None, None),
                DiagChoice::Ldp => (ExperimentId::DiagLdp, None, None, Some(a.lambda)),
                DiagChoice::Fact6 => {
                    let zs: Vec<Vec<f64>> = parse_f64_list(&a.z_list)?
                        .into_iter()
                        .map(|z| vec![z])
                        .collect();
                    let radii = vec![parse_f64_list(&a.radii)?];
                    (ExperimentId::DiagFact6, Some(zs), Some(radii), None)
                }
            };
            let config = ExperimentConfig {
                experiment_id: id,
                density: DensitySpec::UniformBox {
                    lo: vec![0.0],
                    hi: vec![1.0],
                    region: None,
                },
                net,
                schedule: BandwidthSchedule::Power { alpha: a.alpha },
                n_list: a.n.clone(),
                t_grid: None,
                z_grid: None,
                target_theta: None,
                seeds: a.seeds.clone(),
                reps_per_seed: 1,
                mc_reps: Some(a.reps),
                z_point: Some(vec![a.z]),
                z_list,
                event_radii,
                lambda,
            };
            let out = experiment::run(&config)?;
            let paths = emit(&out, &out_dir(&a.out))?;
            Ok(format!(
                "{}\n{}\nwrote {} and {}\n",
                config.to_json(),
                serde_json::to_string_pretty(&out.summary["medians"]).unwrap(),
                paths.csv.display(),
                paths.summary.display()
            ))
        }
        Command::Experiment(a) => {
            let text = std::fs::read_to_string(&a.config).map_err(|e| Error::Io {
                path: a.config.clone(),
                source: e,
            })?;
            let config = ExperimentConfig::from_json(&text)?;
            if a.dry_run {
                let plan = experiment::dry_run(&config)?;
                return Ok(format!(
                    "{}\n{}\n",
                    config.to_json(),
                    serde_json::to_string_pretty(&plan).unwrap()
                ));
            }
            let run_it = || -> Result<RunOutput> { experiment::run(&config) };
            let out = match a.threads {
                Some(k) => {
                    let pool = rayon::ThreadPoolBuilder::new()
                        .num_threads(k)
                        .build()
                        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
                    pool.install(run_it)?
                }
                None => run_it()?,
            };
            let paths = emit(&out, &out_dir(&a.out))?;
            Ok(format!(
                "{}\nwrote {} and {}\n",
                config.to_json(),
                paths.csv.display(),
                paths.summary.display()
            ))
        }
    }
}

/// Exit code classification: parameter/config/domain problems are 1,
/// runtime and solver failures are 2.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::InvalidParameter(_) | Error::Config(_) | Error::Domain(_) => 1,
        Error::Quadrature { .. } | Error::Solver { .. } | Error::Io { .. } | Error::Csv { .. } => 2,
    }
}

/// Parse arguments, dispatch, print, and return the process exit code.
pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(text) => {
            print!("{text}");
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
