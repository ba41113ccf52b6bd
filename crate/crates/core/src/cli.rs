//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 for infeasible or invalid inputs (with an
//! error JSON `{"error": <code>, "detail": <text>}` on stderr), 2 when the
//! config file cannot be read or parsed.

use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use crate::error::Error;
use crate::model::SystemConfig;
use crate::oracle::verify::verify_closed_form;
use crate::policy::{expand_assignment, problem_for, Baseline};
use crate::tradeoff::{self, SweepParam, SweepSpec};
use crate::units::{self, Dimension};

/// Environment variable capping the worker count.
pub const THREADS_ENV: &str = "EDGE3C_THREADS";

#[derive(Debug, Parser)]
#[command(name = "edge3c", version, about = "Bandwidth-optimal caching and computing for mobile edge tasks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Optimal route counts and bandwidth for a config.
    Solve(SolveArgs),
    /// Sweep one parameter and emit a table.
    Sweep(SweepArgs),
    /// Compare closed form against exhaustive enumeration on random configs.
    Verify(VerifyArgs),
    /// Regime and binding constraints for a config.
    Regions(CommonArgs),
    /// Device frequencies at which the optimal policy changes regime.
    TurningPoints(CommonArgs),
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// JSON config file.
    #[arg(long, short)]
    pub config: PathBuf,
    /// Write output here instead of stdout.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Include the per-task caching/computing vectors.
    #[arg(long)]
    pub assignment: bool,
    /// Render bandwidths with units instead of raw Hz.
    #[arg(long)]
    pub human: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// cache_bits, device_cpu_hz, avg_power_w, deadline_s or server_cpu_hz.
    #[arg(long, value_parser = parse_param)]
    pub param: SweepParam,
    /// First grid value; SI number or quantity such as "1 GHz".
    #[arg(long, allow_hyphen_values = true)]
    pub start: String,
    #[arg(long, allow_hyphen_values = true)]
    pub stop: String,
    #[arg(long, default_value_t = 100)]
    pub steps: usize,
    /// Comma-separated: mec_only, local_only, local_no_cache.
    #[arg(long, value_delimiter = ',', value_parser = parse_baseline)]
    pub baselines: Vec<Baseline>,
    #[arg(long)]
    pub log_scale: bool,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = 1000)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Largest task count drawn.
    #[arg(long, default_value_t = 200)]
    pub max_task_count: u64,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

fn parse_param(s: &str) -> Result<SweepParam, String> {
    SweepParam::from_id(s).ok_or_else(|| format!("unknown sweep parameter {s:?}"))
}

fn parse_baseline(s: &str) -> Result<Baseline, String> {
    Baseline::from_id(s.trim()).ok_or_else(|| format!("unknown baseline {s:?}"))
}

fn dimension(param: SweepParam) -> Dimension {
    match param {
        SweepParam::CacheBits => Dimension::Bits,
        SweepParam::DeviceCpuHz | SweepParam::ServerCpuHz => Dimension::Hertz,
        SweepParam::AvgPowerW => Dimension::Watts,
        SweepParam::DeadlineS => Dimension::Seconds,
    }
}

/// Failure of a subcommand, mapped to an exit code.
enum Failure {
    Parse(String),
    Domain(Error),
    Io(io::Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Domain(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e)
    }
}

/// Runs a parsed invocation, writing results to `out` (unless redirected by
/// `--output`) and diagnostics to `err`. Returns the process exit code.
pub fn run(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let result = match &cli.command {
        Command::Solve(args) => solve(args, out, err),
        Command::Sweep(args) => sweep(args, out, err),
        Command::Verify(args) => verify(args, out),
        Command::Regions(args) => regions(args, out, err),
        Command::TurningPoints(args) => turning_points(args, out, err),
    };
    match result {
        Ok(code) => code,
        Err(failure) => {
            let (code, body) = match failure {
                Failure::Parse(detail) => (2, json!({"error": "config_parse", "detail": detail})),
                Failure::Domain(e) => {
                    let mut body = json!({"error": e.code(), "detail": e.to_string()});
                    if let Error::Infeasible(c) = &e {
                        body["constraint"] = json!(c);
                    }
                    if let Error::InvalidConfig(v) = &e {
                        body["violations"] = json!(v);
                    }
                    (1, body)
                }
                Failure::Io(e) => (1, json!({"error": "io", "detail": e.to_string()})),
            };
            let _ = writeln!(err, "{body}");
            code
        }
    }
}

fn load(path: &Path, err: &mut dyn Write) -> Result<SystemConfig, Failure> {
    let config = SystemConfig::from_path(path).map_err(Failure::Parse)?;
    for warning in config.warnings() {
        let _ = writeln!(err, "warning: {warning}");
    }
    Ok(config.validate()?)
}

fn emit(output: &Option<PathBuf>, out: &mut dyn Write, write: impl FnOnce(&mut dyn Write) -> io::Result<()>) -> Result<i32, Failure> {
    match output {
        Some(path) => {
            let mut file = io::BufWriter::new(File::create(path)?);
            write(&mut file)?;
            file.flush()?;
        }
        None => write(out)?,
    }
    Ok(0)
}

fn emit_json<T: Serialize>(output: &Option<PathBuf>, out: &mut dyn Write, value: &T) -> Result<i32, Failure> {
    emit(output, out, |w| {
        serde_json::to_writer_pretty(&mut *w, value)?;
        writeln!(w)
    })
}

fn solve(args: &SolveArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, Failure> {
    let config = load(&args.common.config, err)?;
    let problem = problem_for(&config)?;
    let solution = problem.solve()?;
    let mut body = serde_json::to_value(&solution).expect("solution serializes");
    if args.human {
        body["b_total_hz"] = json!(units::human_hertz(solution.b_total));
        body["b_avg_hz"] = json!(units::human_hertz(solution.b_avg));
    }
    if args.assignment {
        let a = expand_assignment(solution.x1, solution.x2, solution.x3, &config)?;
        body["assignment"] = json!({
            "cache": a.cache.iter().map(|&c| c as u8).collect::<Vec<_>>(),
            "local": a.local.iter().map(|&d| d as u8).collect::<Vec<_>>(),
            "route": a.route.iter().map(|r| r.index()).collect::<Vec<_>>(),
        });
    }
    emit_json(&args.common.output, out, &body)
}

fn sweep(args: &SweepArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, Failure> {
    let config = load(&args.common.config, err)?;
    let dim = dimension(args.param);
    let bound = |name: &str, text: &str| {
        units::parse_quantity(text, dim).map_err(|e| Failure::Domain(Error::invalid(name, e)))
    };
    let spec = SweepSpec {
        parameter: args.param,
        start: bound("start", &args.start)?,
        stop: bound("stop", &args.stop)?,
        steps: args.steps,
        baselines: args.baselines.clone(),
        log_scale: args.log_scale,
    };
    let rows = tradeoff::sweep(&config, &spec)?;
    match args.format {
        Format::Csv => emit(&args.common.output, out, |w| tradeoff::write_csv(&rows, &spec, w)),
        Format::Json => emit_json(&args.common.output, out, &rows),
    }
}

fn verify(args: &VerifyArgs, out: &mut dyn Write) -> Result<i32, Failure> {
    let report = verify_closed_form(args.trials, args.seed, args.max_task_count);
    emit_json(&args.output, out, &report)?;
    Ok(if report.passed { 0 } else { 1 })
}

fn regions(args: &CommonArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, Failure> {
    let config = load(&args.config, err)?;
    let problem = problem_for(&config)?;
    let solution = problem.solve()?;
    let body = json!({
        "regime": solution.regime.id(),
        "description": solution.regime.description(),
        "binding": solution.binding,
        "k1_w": problem.k1,
        "k2_w": problem.k2,
        "cache_slots": problem.cache_slots(),
        "task_count": problem.task_count,
    });
    emit_json(&args.output, out, &body)
}

fn turning_points(args: &CommonArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, Failure> {
    let config = load(&args.config, err)?;
    let points = tradeoff::turning_points(&config)?;
    emit_json(&args.output, out, &points)
}
