//! Command-line front end.
//!
//! Exit codes: 0 success, 2 input error, 3 numerical non-convergence or
//! blow-up, 4 schema violation in a JSON config.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use crate::brownian::{self, BrownianSample, WongZakaiOptions};
use crate::error::{Error, Result};
use crate::flows::{convergence_table, table_slope, ApproxFlow, ConvergenceRow, FnFlow};
use crate::path::{fmt_f64, write_table, PiecewisePath};
use crate::path_lift::{pure_area, signature, RoughPathGrid};
use crate::rde::step::milstein_step;
use crate::rde::{solve_path, RdeGenerator, SolveOptions, VectorFieldSet};
use crate::sewing::{young_integral, SewOptions};
use crate::stats::depth_slope;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_NOT_CONVERGED: i32 = 3;
pub const EXIT_SCHEMA: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "roughpath", version, about = "Rough-path signatures, sewing and RDE solvers")]
pub struct Cli {
    /// Output file (stdout when absent).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Leave the timestamp comment out of CSV outputs.
    #[arg(long, global = true)]
    pub no_timestamp: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Signature of a piecewise-linear path read from CSV, as rough-path JSON.
    Signature {
        input: PathBuf,
        /// Truncation level N (1, 2 or 3).
        #[arg(long, short = 'N', default_value_t = 2)]
        level: usize,
        /// Nominal roughness stored in the output (default N + 1/2).
        #[arg(long)]
        p: Option<f64>,
    },
    /// Solves the RDE of a problem file; writes the trajectory CSV.
    Solve {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        tol: Option<f64>,
        /// Largest dyadic depth per flow step.
        #[arg(long)]
        depth: Option<usize>,
    },
    /// Dyadic convergence table of the flow generator over `[t0, t1]`.
    Convergence {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        tol: Option<f64>,
        /// Deepest row (rows `0..=depth`).
        #[arg(long)]
        depth: Option<usize>,
    },
    /// Gap between piecewise-linear ODE solutions and the Stratonovich RDE.
    WongZakai {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Monte-Carlo statistics of the Lévy area.
    LevyStats {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        depth: Option<usize>,
        #[arg(long)]
        horizon: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// A Brownian sample on a dyadic grid as CSV.
    BrownianSample {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        dim: Option<usize>,
        #[arg(long)]
        depth: Option<usize>,
        #[arg(long)]
        horizon: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Young integral `int x dy` of two CSV paths on a common grid.
    Young {
        x: PathBuf,
        y: PathBuf,
        /// Default 1e-6.
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        depth: Option<usize>,
        /// Richardson extrapolation for sums converging like `2^{-(a-1) n}`.
        #[arg(long, value_name = "A")]
        extrapolate: Option<f64>,
    },
}

/// The JSON problem file.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub dim: usize,
    pub driver_dim: usize,
    /// `fields[i][r]`: component `r` of the field `V_{i+1}`.
    pub fields: Vec<Vec<String>>,
    #[serde(default)]
    pub drift: Option<Vec<String>>,
    pub p: f64,
    pub driver: DriverConfig,
    pub t0: f64,
    pub t1: f64,
    pub x0: Vec<f64>,
    #[serde(default)]
    pub tol: Option<f64>,
    #[serde(default)]
    pub max_depth: Option<usize>,
    #[serde(default)]
    pub ode_substeps: Option<usize>,
    /// Uniform output grid with this many steps (default: the driver nodes).
    #[serde(default)]
    pub output_steps: Option<usize>,
    #[serde(default)]
    pub convergence: Option<ConvergenceConfig>,
    #[serde(default)]
    pub wong_zakai: Option<WongZakaiConfig>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DriverConfig {
    /// A sampled path, lifted by its piecewise-linear signature. Relative
    /// paths resolve against the config file.
    Csv { path: PathBuf },
    PureArea { steps: usize },
    Brownian {
        depth: usize,
        #[serde(default)]
        seed: u64,
        #[serde(default)]
        lift: BrownianLift,
        #[serde(default)]
        extra_depth: Option<usize>,
    },
}

#[derive(Clone, Copy, Debug, Default, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum BrownianLift {
    #[default]
    Stratonovich,
    Ito,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvergenceConfig {
    #[serde(default)]
    pub depths: Option<Vec<usize>>,
    #[serde(default)]
    pub scheme: Scheme,
}

#[derive(Clone, Copy, Debug, Default, Deserialize, PartialEq, Eq, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    #[default]
    LogOde,
    Milstein,
    /// `x + F(x) X_ts + V(x)(t-s)`: first order, needs `p < 2`.
    Euler,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WongZakaiConfig {
    pub depths: Vec<usize>,
    #[serde(default)]
    pub extra_depth: Option<usize>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LevyConfig {
    #[serde(default)]
    pub samples: Option<usize>,
    #[serde(default)]
    pub depth: Option<usize>,
    #[serde(default)]
    pub horizon: Option<f64>,
    #[serde(default)]
    pub seed: Option<u64>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleConfig {
    #[serde(default)]
    pub dim: Option<usize>,
    #[serde(default)]
    pub depth: Option<usize>,
    #[serde(default)]
    pub horizon: Option<f64>,
    #[serde(default)]
    pub seed: Option<u64>,
}

/// Failure of a subcommand with its exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::Json(j) if j.classify() == serde_json::error::Category::Data => EXIT_SCHEMA,
            Error::NotConverged { .. } | Error::BlowUp { .. } => EXIT_NOT_CONVERGED,
            _ => EXIT_INPUT,
        };
        CliError {
            code,
            message: e.to_string(),
        }
    }
}

fn not_converged(message: String) -> CliError {
    CliError {
        code: EXIT_NOT_CONVERGED,
        message,
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    }
}

/// Runs a parsed command.
pub fn execute(cli: &Cli) -> CliResult<()> {
    let out = Output {
        path: cli.out.clone(),
        timestamp: !cli.no_timestamp,
    };
    match &cli.command {
        Command::Signature { input, level, p } => cmd_signature(input, *level, *p, &out),
        Command::Solve { config, seed, tol, depth } => cmd_solve(config, *seed, *tol, *depth, &out),
        Command::Convergence { config, seed, tol, depth } => cmd_convergence(config, *seed, *tol, *depth, &out),
        Command::WongZakai { config, seed, tol } => cmd_wong_zakai(config, *seed, *tol, &out),
        Command::LevyStats {
            config,
            samples,
            depth,
            horizon,
            seed,
        } => {
            let mut c: LevyConfig = read_optional_config(config.as_deref())?;
            c.samples = samples.or(c.samples);
            c.depth = depth.or(c.depth);
            c.horizon = horizon.or(c.horizon);
            c.seed = seed.or(c.seed);
            cmd_levy_stats(&c, &out)
        }
        Command::BrownianSample {
            config,
            dim,
            depth,
            horizon,
            seed,
        } => {
            let mut c: SampleConfig = read_optional_config(config.as_deref())?;
            c.dim = dim.or(c.dim);
            c.depth = depth.or(c.depth);
            c.horizon = horizon.or(c.horizon);
            c.seed = seed.or(c.seed);
            cmd_brownian_sample(&c, &out)
        }
        Command::Young {
            x,
            y,
            tol,
            depth,
            extrapolate,
        } => cmd_young(x, y, *tol, *depth, *extrapolate, &out),
    }
}

struct Output {
    path: Option<PathBuf>,
    timestamp: bool,
}

impl Output {
    fn write(&self, bytes: &[u8]) -> CliResult<()> {
        match &self.path {
            Some(p) => fs::write(p, bytes).map_err(|e| Error::Io(e).into()),
            None => std::io::stdout().write_all(bytes).map_err(|e| Error::Io(e).into()),
        }
    }

    fn header(&self, command: &str) -> Vec<String> {
        let mut c = vec![format!("roughpath {command}")];
        if self.timestamp {
            c.push(format!("generated {}", chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true)));
        }
        c
    }
}

fn read_config<T: for<'de> Deserialize<'de>>(path: &Path) -> CliResult<T> {
    let text = fs::read_to_string(path).map_err(|e| CliError {
        code: EXIT_INPUT,
        message: format!("cannot read {}: {e}", path.display()),
    })?;
    serde_json::from_str(&text).map_err(|e| {
        let mut err = CliError::from(Error::Json(e));
        err.message = format!("{}: {}", path.display(), err.message);
        err
    })
}

fn read_optional_config<T: for<'de> Deserialize<'de> + Default>(path: Option<&Path>) -> CliResult<T> {
    path.map_or_else(|| Ok(T::default()), read_config)
}

fn read_csv_path(path: &Path) -> CliResult<PiecewisePath> {
    let file = fs::File::open(path).map_err(|e| CliError {
        code: EXIT_INPUT,
        message: format!("cannot read {}: {e}", path.display()),
    })?;
    PiecewisePath::read_csv(file).map_err(|e| CliError {
        code: EXIT_INPUT,
        message: format!("{}: {e}", path.display()),
    })
}

fn table_bytes(comments: &[String], header: &[String], rows: &[Vec<String>], trailer: &[String]) -> CliResult<Vec<u8>> {
    let mut buf = Vec::new();
    for c in comments {
        writeln!(buf, "# {c}").map_err(Error::Io)?;
    }
    {
        let mut wtr = csv::Writer::from_writer(&mut buf);
        wtr.write_record(header).map_err(crate::path::csv_err)?;
        for r in rows {
            wtr.write_record(r).map_err(crate::path::csv_err)?;
        }
        wtr.flush().map_err(Error::Io)?;
    }
    for c in trailer {
        writeln!(buf, "# {c}").map_err(Error::Io)?;
    }
    Ok(buf)
}

fn cmd_signature(input: &Path, level: usize, p: Option<f64>, out: &Output) -> CliResult<()> {
    let path = read_csv_path(input)?;
    let mut lift = signature(&path, level)?;
    if let Some(p) = p {
        lift = lift.with_p(p)?;
    }
    let mut json = lift.to_json()?;
    json.push('\n');
    out.write(json.as_bytes())
}

/// Problem file with its parsed fields and driver.
pub struct Problem {
    pub config: ProblemConfig,
    pub fields: VectorFieldSet,
    pub driver: RoughPathGrid,
}

impl Problem {
    /// Reads and validates a problem file; `seed` replaces the Brownian seed.
    pub fn load(path: &Path, seed: Option<u64>) -> CliResult<Self> {
        let config: ProblemConfig = read_config(path)?;
        let base = path.parent().unwrap_or(Path::new("."));
        Ok(Self::from_config(config, base, seed)?)
    }

    pub fn from_config(mut config: ProblemConfig, base: &Path, seed: Option<u64>) -> Result<Self> {
        if let (Some(s), DriverConfig::Brownian { seed, .. }) = (seed, &mut config.driver) {
            *seed = s;
        }
        let drift = config.drift.as_deref();
        let fields = VectorFieldSet::parse(config.dim, &config.fields, drift)?;
        if fields.driver_dim() != config.driver_dim {
            return Err(Error::DimensionMismatch {
                expected: config.driver_dim,
                found: fields.driver_dim(),
            });
        }
        if config.x0.len() != config.dim {
            return Err(Error::DimensionMismatch {
                expected: config.dim,
                found: config.x0.len(),
            });
        }
        if !(config.t1 > config.t0) {
            return Err(Error::InvalidInput(format!("need t1 > t0, got [{}, {}]", config.t0, config.t1)));
        }
        let p = config.p;
        let driver = match &config.driver {
            DriverConfig::Csv { path } => {
                let full = if path.is_absolute() { path.clone() } else { base.join(path) };
                let file = fs::File::open(&full)?;
                let sampled = PiecewisePath::read_csv(file)?;
                let level = (p.floor() as usize).max(2);
                signature(&sampled, level)?.with_p(p)?
            }
            DriverConfig::PureArea { steps } => {
                if config.t0 < 0.0 {
                    return Err(Error::InvalidInput("pure-area driver lives on [0, t1]".into()));
                }
                pure_area(config.t1, *steps)?.with_p(p)?
            }
            DriverConfig::Brownian {
                depth,
                seed,
                lift,
                extra_depth,
            } => {
                if config.t0 < 0.0 {
                    return Err(Error::InvalidInput("Brownian driver lives on [0, t1]".into()));
                }
                let sample = BrownianSample::new(config.driver_dim, *depth, config.t1, *seed)?;
                let strat = brownian::stratonovich_lift(&sample, extra_depth.unwrap_or(brownian::DEFAULT_EXTRA_DEPTH), p)?;
                match lift {
                    BrownianLift::Stratonovich => strat,
                    BrownianLift::Ito => brownian::ito_lift(&strat)?,
                }
            }
        };
        if driver.dim() != config.driver_dim {
            return Err(Error::DimensionMismatch {
                expected: config.driver_dim,
                found: driver.dim(),
            });
        }
        Ok(Problem { config, fields, driver })
    }

    pub fn solve_options(&self, tol: Option<f64>, depth: Option<usize>) -> SolveOptions {
        let mut opts = SolveOptions::default();
        opts.tol = tol.or(self.config.tol).unwrap_or(opts.tol);
        opts.max_depth = depth.or(self.config.max_depth).unwrap_or(opts.max_depth);
        opts.ode_substeps = self.config.ode_substeps.unwrap_or(opts.ode_substeps);
        opts
    }

    /// Output times: a uniform grid, or the driver nodes inside `[t0, t1]`.
    pub fn output_times(&self) -> Result<Vec<f64>> {
        let (t0, t1) = (self.config.t0, self.config.t1);
        if let Some(n) = self.config.output_steps {
            return crate::path::uniform_grid(t0, t1, n);
        }
        let mut times = vec![t0];
        times.extend(self.driver.times().iter().copied().filter(|&t| t > t0 && t < t1));
        times.push(t1);
        times.dedup_by(|a, b| (*a - *b).abs() <= 1e-13 * (t1 - t0));
        Ok(times)
    }
}

fn cmd_solve(config: &Path, seed: Option<u64>, tol: Option<f64>, depth: Option<usize>, out: &Output) -> CliResult<()> {
    let problem = Problem::load(config, seed)?;
    let opts = problem.solve_options(tol, depth);
    let sol = solve_path(&problem.fields, &problem.driver, &problem.config.x0, &problem.output_times()?, opts)?;
    if !sol.converged {
        return Err(not_converged(format!(
            "solver did not reach tol {:e} within depth {} (last_delta {:e})",
            opts.tol, opts.max_depth, sol.max_delta
        )));
    }
    let mut comments = out.header("solve");
    comments.push(format!("tol = {:e}", opts.tol));
    comments.push(format!("max depth used = {}", sol.max_depth));
    comments.push(format!("last_delta = {:e}", sol.max_delta));
    let mut buf = Vec::new();
    write_table(&mut buf, sol.path.times(), sol.path.values(), &comments)?;
    out.write(&buf)
}

/// Flow generator of a problem for the chosen scheme.
pub fn scheme_generator<'a>(problem: &'a Problem, scheme: Scheme, ode_substeps: usize) -> Result<Box<dyn ApproxFlow + 'a>> {
    let (f, x) = (&problem.fields, &problem.driver);
    let p = x.p();
    Ok(match scheme {
        Scheme::LogOde => Box::new(RdeGenerator::new(f, x, ode_substeps)?),
        Scheme::Milstein => {
            let map = move |s: f64, t: f64, y: &[f64]| {
                milstein_step(f, &x.increment_at(s, t), s, t, y, ode_substeps).unwrap_or_else(|e| {
                    log::error!("milstein step failed: {e}");
                    vec![f64::NAN; y.len()]
                })
            };
            Box::new(FnFlow::new(f.dim(), 3.0 / p, map)?)
        }
        Scheme::Euler => {
            let map = move |s: f64, t: f64, y: &[f64]| {
                let inc = x.increment_at(s, t);
                let mut out = y.to_vec();
                let mut buf = vec![0.0; y.len()];
                for (k, dx) in inc.level(1).iter().enumerate() {
                    crate::rde::fields::eval_field(f.field(k), y, &mut buf);
                    out.iter_mut().zip(&buf).for_each(|(o, b)| *o += dx * b);
                }
                if let Some(v) = f.drift() {
                    crate::rde::fields::eval_field(v, y, &mut buf);
                    out.iter_mut().zip(&buf).for_each(|(o, b)| *o += (t - s) * b);
                }
                out
            };
            Box::new(FnFlow::new(f.dim(), 2.0 / p, map).map_err(|_| {
                Error::InvalidInput(format!("the Euler scheme needs p < 2, got {p}"))
            })?)
        }
    })
}

fn cmd_convergence(config: &Path, seed: Option<u64>, tol: Option<f64>, depth: Option<usize>, out: &Output) -> CliResult<()> {
    let problem = Problem::load(config, seed)?;
    let opts = problem.solve_options(tol, depth);
    let block = problem.config.convergence.clone().unwrap_or(ConvergenceConfig {
        depths: None,
        scheme: Scheme::LogOde,
    });
    let depths = match (depth, block.depths) {
        (None, Some(d)) => d,
        (Some(n), _) => (0..=n).collect(),
        (None, None) => (0..=opts.max_depth.min(12)).collect(),
    };
    let gen = scheme_generator(&problem, block.scheme, opts.ode_substeps)?;
    let (t0, t1) = (problem.config.t0, problem.config.t1);
    let rows: Vec<ConvergenceRow> = convergence_table(&gen.as_ref(), t0, t1, &problem.config.x0, &depths)?;
    if rows.iter().any(|r| r.value.iter().any(|v| !v.is_finite())) {
        return Err(not_converged("non-finite values in the convergence table".into()));
    }
    let mut comments = out.header("convergence");
    comments.push(format!("scheme = {:?}", block.scheme));
    comments.push(format!("interval = [{t0}, {t1}]"));
    let d = problem.config.dim;
    let mut header = vec!["depth".to_string(), "delta".to_string()];
    header.extend((1..=d).map(|k| format!("x{k}")));
    let body: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            let mut row = vec![r.depth.to_string(), r.delta.map(fmt_f64).unwrap_or_default()];
            row.extend(r.value.iter().map(|v| fmt_f64(*v)));
            row
        })
        .collect();
    let trailer = match table_slope(&rows) {
        Some(fit) => vec![format!("slope = {:.6} (residual {:.3e})", fit.slope, fit.residual)],
        None => vec!["slope = n/a".to_string()],
    };
    out.write(&table_bytes(&comments, &header, &body, &trailer)?)?;
    match rows.last().and_then(|r| r.delta) {
        Some(last) if !(last <= opts.tol) => Err(not_converged(format!(
            "last delta {last:e} exceeds tol {:e} at depth {}",
            opts.tol,
            rows[rows.len() - 1].depth
        ))),
        _ => Ok(()),
    }
}

fn cmd_wong_zakai(config: &Path, seed: Option<u64>, tol: Option<f64>, out: &Output) -> CliResult<()> {
    let config_data: ProblemConfig = read_config(config)?;
    let DriverConfig::Brownian {
        seed: driver_seed,
        extra_depth,
        lift,
        ..
    } = config_data.driver.clone()
    else {
        return Err(Error::InvalidInput("wong-zakai needs a brownian driver".into()).into());
    };
    if lift != BrownianLift::Stratonovich {
        return Err(Error::InvalidInput("wong-zakai compares against the stratonovich lift".into()).into());
    }
    let block = config_data
        .wong_zakai
        .clone()
        .ok_or_else(|| Error::InvalidInput("missing `wong_zakai` block".into()))?;
    let fields = VectorFieldSet::parse(config_data.dim, &config_data.fields, config_data.drift.as_deref())?;
    if config_data.t0 != 0.0 {
        return Err(Error::InvalidInput("wong-zakai runs on [0, t1]".into()).into());
    }
    let seed = seed.unwrap_or(driver_seed);
    let mut opts = WongZakaiOptions {
        p: config_data.p,
        extra_depth: block.extra_depth.or(extra_depth).unwrap_or(brownian::DEFAULT_EXTRA_DEPTH),
        ..WongZakaiOptions::default()
    };
    if let Some(t) = tol.or(config_data.tol) {
        opts.solve.tol = t;
    }
    if let Some(d) = config_data.max_depth {
        opts.solve.max_depth = d;
    }
    let rows = brownian::wong_zakai_experiment(&fields, &config_data.x0, &block.depths, seed, config_data.t1, opts)?;
    let mut comments = out.header("wong-zakai");
    comments.push(format!("seed = {seed}"));
    comments.push(format!("reference depth = {}", block.depths.iter().max().copied().unwrap_or(0)));
    let header = vec!["depth".to_string(), "gap".to_string()];
    let body: Vec<Vec<String>> = rows.iter().map(|r| vec![r.depth.to_string(), fmt_f64(r.gap)]).collect();
    let depths: Vec<usize> = rows.iter().map(|r| r.depth).collect();
    let gaps: Vec<f64> = rows.iter().map(|r| r.gap).collect();
    let inversions = gaps.windows(2).filter(|w| w[1] > w[0]).count();
    let mut trailer = vec![format!("inversions = {inversions}")];
    if let Some(fit) = depth_slope(&depths, &gaps) {
        trailer.push(format!("slope = {:.6} (residual {:.3e})", fit.slope, fit.residual));
    }
    out.write(&table_bytes(&comments, &header, &body, &trailer)?)
}

fn cmd_levy_stats(c: &LevyConfig, out: &Output) -> CliResult<()> {
    let samples = c.samples.unwrap_or(100_000);
    let depth = c.depth.unwrap_or(10);
    let horizon = c.horizon.unwrap_or(1.0);
    let seed = c.seed.unwrap_or(0);
    let mc = brownian::levy_area_stats(samples, depth, horizon, seed)?;
    let expected = 0.25 * horizon * horizon;
    let (lo, hi) = mc.variance_ci();
    let (mlo, mhi) = mc.mean_ci();
    let mut comments = out.header("levy-stats");
    comments.push(format!("seed = {seed}"));
    comments.push(format!("depth = {depth}"));
    let header: Vec<String> = ["samples", "depth", "horizon", "mean", "mean_stderr", "variance", "variance_stderr", "expected_variance"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let row = vec![
        samples.to_string(),
        depth.to_string(),
        fmt_f64(horizon),
        fmt_f64(mc.mean),
        fmt_f64(mc.mean_stderr),
        fmt_f64(mc.variance),
        fmt_f64(mc.variance_stderr),
        fmt_f64(expected),
    ];
    let trailer = vec![
        format!("mean within 3 sigma of 0: {}", mlo <= 0.0 && 0.0 <= mhi),
        format!("variance within 3 sigma of T^2/4: {}", lo <= expected && expected <= hi),
    ];
    out.write(&table_bytes(&comments, &header, &[row], &trailer)?)
}

fn cmd_brownian_sample(c: &SampleConfig, out: &Output) -> CliResult<()> {
    let seed = c.seed.unwrap_or(0);
    let depth = c.depth.unwrap_or(10);
    let sample = BrownianSample::new(c.dim.unwrap_or(1), depth, c.horizon.unwrap_or(1.0), seed)?;
    let mut comments = out.header("brownian-sample");
    comments.push(format!("seed = {seed}"));
    comments.push(format!("depth = {depth}"));
    let path = sample.path();
    let mut buf = Vec::new();
    write_table(&mut buf, path.times(), path.values(), &comments)?;
    out.write(&buf)
}

fn cmd_young(x: &Path, y: &Path, tol: Option<f64>, depth: Option<usize>, extrapolate: Option<f64>, out: &Output) -> CliResult<()> {
    let xp = read_csv_path(x)?;
    let yp = read_csv_path(y)?;
    let mut opts = SewOptions::default();
    opts.tol = tol.unwrap_or(1e-6);
    opts.max_depth = depth.unwrap_or(opts.max_depth);
    opts.extrapolate = extrapolate;
    let (s, t) = (xp.times()[0], xp.times()[xp.len() - 1]);
    let sewn = young_integral(&xp, &yp, s, t, opts)?;
    let mut comments = out.header("young");
    comments.push(format!("interval = [{s}, {t}]"));
    comments.push(format!("depth = {}", sewn.depth));
    comments.push(format!("last_delta = {:e}", sewn.last_delta));
    let header = vec!["component".to_string(), "value".to_string()];
    let body: Vec<Vec<String>> = sewn
        .value
        .iter()
        .enumerate()
        .map(|(k, v)| vec![(k + 1).to_string(), fmt_f64(*v)])
        .collect();
    out.write(&table_bytes(&comments, &header, &body, &[])?)?;
    if !sewn.converged {
        return Err(not_converged(format!(
            "Young sums did not settle to tol {:e} (last_delta {:e})",
            opts.tol, sewn.last_delta
        )));
    }
    Ok(())
}
