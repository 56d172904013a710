//! The `fracgrad` command line.
//!
//! Exit codes: 0 success, 1 malformed input or I/O failure, 2 domain error in
//! `derive`, 3 `optimize` run ended by a series domain error, 4 audit tail
//! unavailable, 5 counterexample search exhausted.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::audit::{
    audit_trajectory, counterexample_gamma_domain, counterexample_geometric, counterexample_sigma_sign, AuditConfig,
    GeometricGrid, DEFAULT_INDEX_CAP, DEFAULT_SIGMA_SAMPLES,
};
use crate::caputo::{caputo_quadrature, caputo_series, TruncationPolicy, DEFAULT_QUADRATURE_NODES};
use crate::config::{ExperimentConfig, OutputFormat};
use crate::error::Error;
use crate::functions::DifferentiableFunction;
use crate::io::{audit_csv, audit_json, fmt_num, trajectory_csv, TrajectorySidecar};
use crate::optimize::{run, FractionalConfig, TerminalStatus};
use crate::special_fn::GammaMode;

pub const GAMMA_MODE_ENV: &str = "FRACGRAD_GAMMA_MODE";

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DOMAIN: i32 = 2;
pub const EXIT_SERIES_DOMAIN: i32 = 3;
pub const EXIT_INSUFFICIENT_TAIL: i32 = 4;
pub const EXIT_NOT_FOUND: i32 = 5;

#[derive(Debug, Parser)]
#[command(name = "fracgrad", version, about = "Caputo-series fractional gradient descent lab")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate a Caputo derivative by its series (and optionally by quadrature).
    Derive(DeriveArgs),
    /// Run the optimizers described by one or more config files.
    Optimize(OptimizeArgs),
    /// Audit the inequality chain along a recorded trajectory.
    Audit(AuditArgs),
    /// Emit one of the counterexample reports.
    Counterexample {
        #[command(subcommand)]
        kind: CounterexampleKind,
    },
}

#[derive(Debug, Args)]
struct DeriveArgs {
    /// Function descriptor, e.g. `poly:0,0,1`, `exp:1,2`, `pole:-1,1`, `sq:3,1`, `const:5`.
    #[arg(long)]
    function: String,
    #[arg(long)]
    alpha: f64,
    #[arg(long, allow_negative_numbers = true)]
    lower: f64,
    #[arg(long, allow_negative_numbers = true)]
    upper: f64,
    /// strict or extended; defaults to $FRACGRAD_GAMMA_MODE, then extended.
    #[arg(long)]
    mode: Option<String>,
    /// Also evaluate the integral definition and print the difference.
    #[arg(long)]
    quadrature: bool,
    #[arg(long, default_value_t = DEFAULT_QUADRATURE_NODES)]
    nodes: usize,
    #[arg(long, default_value_t = 1e-14)]
    abs_tol: f64,
    #[arg(long, default_value_t = 64)]
    max_terms: usize,
}

#[derive(Debug, Args)]
struct OptimizeArgs {
    /// Config files; each is run independently and reported in the given order.
    #[arg(required = true)]
    configs: Vec<PathBuf>,
    /// Output prefix override (single config only).
    #[arg(long)]
    out: Option<String>,
    /// Worker threads for multiple configs.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

#[derive(Debug, Args)]
struct AuditArgs {
    /// Trajectory CSV written by `optimize`; its JSON sidecar must sit next to it.
    trajectory: PathBuf,
    #[arg(long, allow_negative_numbers = true)]
    x_star: Option<f64>,
    /// Claimed limit X (defaults to the last iterate).
    #[arg(long, allow_negative_numbers = true)]
    limit: Option<f64>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    tail_start: Option<usize>,
    #[arg(long)]
    index_cap: Option<usize>,
    /// Output prefix; defaults to `<trajectory stem>.audit`.
    #[arg(long)]
    out: Option<String>,
}

#[derive(Debug, Subcommand)]
enum CounterexampleKind {
    /// Signs and growth of the σ coefficients of f(x) = -1/(1-x).
    SigmaSign {
        #[arg(long, default_value_t = 0.5)]
        alpha: f64,
        /// Sample interval `lo:hi` inside (0, 1).
        #[arg(long, default_value = "0.1:0.9")]
        range: String,
        #[arg(long, default_value_t = DEFAULT_SIGMA_SAMPLES)]
        samples: usize,
        #[arg(long, default_value_t = DEFAULT_INDEX_CAP)]
        index_cap: usize,
        #[arg(long)]
        json: bool,
    },
    /// Grid search for a step with |x_k - x_(k-K)| >= 1.
    Geometric {
        #[arg(long, default_value = "poly:0,0,1")]
        function: String,
        #[arg(long, default_value_t = 0.5)]
        alpha: f64,
        #[arg(long, value_delimiter = ',')]
        mus: Option<Vec<f64>>,
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        x0s: Option<Vec<f64>>,
        #[arg(long, value_delimiter = ',')]
        lags: Option<Vec<usize>>,
        #[arg(long)]
        json: bool,
    },
    /// Strict vs extended evaluation of (α-1 choose i-1) for i = 2..6.
    GammaDomain {
        #[arg(long, default_value_t = 0.5)]
        alpha: f64,
        #[arg(long)]
        json: bool,
    },
}

/// Failure carrying its exit code.
struct Exit {
    code: i32,
    message: String,
}

impl Exit {
    fn usage(message: impl std::fmt::Display) -> Self {
        Exit {
            code: EXIT_USAGE,
            message: message.to_string(),
        }
    }
}

impl From<std::io::Error> for Exit {
    fn from(e: std::io::Error) -> Self {
        Exit::usage(e)
    }
}

type CliResult = Result<i32, Exit>;

/// Default Gamma mode from the environment, falling back to extended.
pub fn default_gamma_mode() -> Result<GammaMode, String> {
    match std::env::var(GAMMA_MODE_ENV) {
        Ok(v) if !v.trim().is_empty() => v.parse(),
        _ => Ok(GammaMode::Extended),
    }
}

/// Runs the command line with `args` (including the program name) and
/// returns the process exit code.
pub fn run_cli<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(err, "{}", e.render());
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let result = match cli.command {
        Command::Derive(a) => cmd_derive(a, out),
        Command::Optimize(a) => cmd_optimize(a, out),
        Command::Audit(a) => cmd_audit(a, out),
        Command::Counterexample { kind } => cmd_counterexample(kind, out),
    };
    match result {
        Ok(code) => code,
        Err(Exit { code, message }) => {
            let _ = writeln!(err, "error: {message}");
            code
        }
    }
}

fn parse_function(s: &str) -> Result<DifferentiableFunction, Exit> {
    s.parse().map_err(|e: Error| Exit::usage(e))
}

fn cmd_derive(a: DeriveArgs, out: &mut dyn Write) -> CliResult {
    let f = parse_function(&a.function)?;
    let mode = match &a.mode {
        Some(m) => m.parse(),
        None => default_gamma_mode(),
    }
    .map_err(Exit::usage)?;
    let policy = TruncationPolicy {
        abs_tol: a.abs_tol,
        max_terms: a.max_terms,
        ..Default::default()
    };
    let domain_exit = |e: Error| match e {
        Error::InvalidParameter(_) => Exit::usage(e),
        _ => Exit {
            code: EXIT_DOMAIN,
            message: e.to_string(),
        },
    };
    let series = caputo_series(&f, a.alpha, a.lower, a.upper, &policy, mode).map_err(domain_exit)?;
    writeln!(out, "value = {}", fmt_num(series.value))?;
    writeln!(out, "terms_used = {}", series.terms_used)?;
    writeln!(out, "status = {}", series.status.as_str())?;
    if a.quadrature {
        if a.alpha < 1.0 {
            let oracle = caputo_quadrature(&f, a.alpha, a.lower, a.upper, a.nodes).map_err(domain_exit)?;
            writeln!(out, "oracle = {}", fmt_num(oracle))?;
            writeln!(out, "abs_diff = {}", fmt_num((oracle - series.value).abs()))?;
        } else {
            writeln!(out, "oracle = n/a (quadrature needs alpha < 1)")?;
        }
    }
    Ok(EXIT_OK)
}

fn write_file(path: &Path, contents: &str) -> Result<(), Exit> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent)?;
    }
    std::fs::write(path, contents).map_err(|e| Exit::usage(format!("{}: {e}", path.display())))
}

struct RunOutcome {
    summary: String,
    status: TerminalStatus,
}

fn optimize_one(path: &Path, out_override: Option<&str>, mode: GammaMode) -> Result<RunOutcome, Exit> {
    let text = std::fs::read_to_string(path).map_err(|e| Exit::usage(format!("{}: {e}", path.display())))?;
    let mut cfg = ExperimentConfig::parse(&text, mode).map_err(|e| Exit::usage(format!("{}: {e}", path.display())))?;
    if let Some(prefix) = out_override {
        cfg.output = prefix.to_string();
    }
    let traj = run(&cfg.function, &cfg.fractional, cfg.algorithm).map_err(Exit::usage)?;
    if cfg.writes(OutputFormat::Csv) {
        write_file(Path::new(&format!("{}.csv", cfg.output)), &trajectory_csv(&traj))?;
    }
    if cfg.writes(OutputFormat::Json) {
        let sidecar = TrajectorySidecar::new(&cfg, &traj);
        write_file(Path::new(&format!("{}.json", cfg.output)), &sidecar.to_json())?;
    }
    let summary = format!(
        "{}: algorithm={} steps={} final={} status={}",
        path.display(),
        cfg.algorithm.as_str(),
        traj.steps.len(),
        fmt_num(traj.last()),
        traj.terminal_status.as_str()
    );
    Ok(RunOutcome {
        summary,
        status: traj.terminal_status,
    })
}

fn cmd_optimize(a: OptimizeArgs, out: &mut dyn Write) -> CliResult {
    if a.out.is_some() && a.configs.len() > 1 {
        return Err(Exit::usage("--out applies to a single config"));
    }
    let mode = default_gamma_mode().map_err(Exit::usage)?;
    let jobs = a.jobs.max(1).min(a.configs.len());
    let out_override = a.out.as_deref();
    let mut results: Vec<Option<Result<RunOutcome, Exit>>> = (0..a.configs.len()).map(|_| None).collect();
    std::thread::scope(|scope| {
        for (worker, chunk) in results.chunks_mut(a.configs.len().div_ceil(jobs)).enumerate() {
            let start = worker * a.configs.len().div_ceil(jobs);
            let configs = &a.configs;
            scope.spawn(move || {
                for (offset, slot) in chunk.iter_mut().enumerate() {
                    *slot = Some(optimize_one(&configs[start + offset], out_override, mode));
                }
            });
        }
    });
    let mut code = EXIT_OK;
    for result in results.into_iter().flatten() {
        let outcome = result?;
        writeln!(out, "{}", outcome.summary)?;
        if outcome.status == TerminalStatus::SeriesDomainError {
            code = EXIT_SERIES_DOMAIN;
        }
    }
    Ok(code)
}

fn cmd_audit(a: AuditArgs, out: &mut dyn Write) -> CliResult {
    let csv =
        std::fs::read_to_string(&a.trajectory).map_err(|e| Exit::usage(format!("{}: {e}", a.trajectory.display())))?;
    let sidecar_path = a.trajectory.with_extension("json");
    let sidecar_text =
        std::fs::read_to_string(&sidecar_path).map_err(|e| Exit::usage(format!("{}: {e}", sidecar_path.display())))?;
    let sidecar = TrajectorySidecar::from_json(&sidecar_text).map_err(Exit::usage)?;
    let traj = sidecar.trajectory(&csv).map_err(Exit::usage)?;
    let cfg = &sidecar.config;

    let base = cfg.audit;
    let x_star = a
        .x_star
        .or(base.map(|b| b.x_star))
        .or_else(|| cfg.function.known_extremum())
        .ok_or_else(|| Exit::usage("no --x-star given and the function has no known extremum"))?;
    let mut acfg = base.unwrap_or_else(|| AuditConfig::new(x_star));
    acfg.x_star = x_star;
    acfg.claimed_limit = a.limit.or(acfg.claimed_limit);
    acfg.epsilon = a.epsilon.or(acfg.epsilon);
    acfg.tail_start = a.tail_start.or(acfg.tail_start);
    acfg.index_cap = a.index_cap.unwrap_or(acfg.index_cap);

    let report = audit_trajectory(&traj, &cfg.function, &cfg.fractional, &acfg).map_err(|e| match e {
        Error::InsufficientTail(_) => Exit {
            code: EXIT_INSUFFICIENT_TAIL,
            message: e.to_string(),
        },
        _ => Exit::usage(e),
    })?;
    let prefix = a
        .out
        .unwrap_or_else(|| format!("{}.audit", a.trajectory.with_extension("").display()));
    write_file(Path::new(&format!("{prefix}.csv")), &audit_csv(&report))?;
    write_file(Path::new(&format!("{prefix}.json")), &audit_json(&report))?;
    let s = report.summary;
    writeln!(
        out,
        "audited_steps={} paper_direction_failures={} geometric_failures={} epsilon_failures={} \
         corrected_direction_failures={} sigma_paper={} sigma_abs={}",
        s.audited_steps,
        s.paper_direction_failures,
        s.geometric_failures,
        s.epsilon_failures,
        s.corrected_direction_failures,
        fmt_num(report.sigma.sigma_paper),
        fmt_num(report.sigma.sigma_abs)
    )?;
    Ok(EXIT_OK)
}

fn print_json<T: serde::Serialize>(out: &mut dyn Write, value: &T) -> Result<(), Exit> {
    let text = serde_json::to_string_pretty(value).map_err(Exit::usage)?;
    writeln!(out, "{text}")?;
    Ok(())
}

fn cmd_counterexample(kind: CounterexampleKind, out: &mut dyn Write) -> CliResult {
    match kind {
        CounterexampleKind::SigmaSign {
            alpha,
            range,
            samples,
            index_cap,
            json,
        } => {
            let (lo, hi) = range
                .split_once(':')
                .and_then(|(lo, hi)| Some((lo.trim().parse().ok()?, hi.trim().parse().ok()?)))
                .ok_or_else(|| Exit::usage(format!("bad --range `{range}` (expected lo:hi)")))?;
            let report = counterexample_sigma_sign(alpha, (lo, hi), samples, index_cap).map_err(Exit::usage)?;
            if json {
                print_json(out, &report)?;
                return Ok(EXIT_OK);
            }
            writeln!(out, "sigma_paper = {}", fmt_num(report.sigma_paper))?;
            writeln!(out, "sigma_abs = {}", fmt_num(report.sigma_abs))?;
            writeln!(out, "sign_discrepancy = {}", report.sign_discrepancy)?;
            writeln!(out, "alternating = {}", report.alternating)?;
            writeln!(out, "magnitude_grows = {}", report.magnitude_grows)?;
            writeln!(
                out,
                "i,sign,expected_sign,max_abs,running_sigma_paper,running_sigma_abs"
            )?;
            for p in &report.per_index {
                writeln!(
                    out,
                    "{},{},{},{},{},{}",
                    p.i,
                    p.uniform_sign(),
                    crate::audit::SigmaSignReport::expected_sign(p.i),
                    fmt_num(p.max_abs),
                    fmt_num(p.running_sigma_paper),
                    fmt_num(p.running_sigma_abs)
                )?;
            }
            Ok(EXIT_OK)
        }
        CounterexampleKind::Geometric {
            function,
            alpha,
            mus,
            x0s,
            lags,
            json,
        } => {
            let f = parse_function(&function)?;
            let mode = default_gamma_mode().map_err(Exit::usage)?;
            let base = FractionalConfig {
                alpha,
                gamma_mode: mode,
                ..FractionalConfig::default()
            };
            let defaults = GeometricGrid::default();
            let grid = GeometricGrid {
                mus: mus.unwrap_or(defaults.mus),
                x0s: x0s.unwrap_or(defaults.x0s),
                lags: lags.unwrap_or(defaults.lags),
            };
            let witness = match counterexample_geometric(&f, &base, &grid) {
                Ok(w) => w,
                Err(e @ Error::NotFound(_)) => {
                    return Err(Exit {
                        code: EXIT_NOT_FOUND,
                        message: e.to_string(),
                    })
                }
                Err(e) => return Err(Exit::usage(e)),
            };
            if json {
                print_json(out, &witness)?;
                return Ok(EXIT_OK);
            }
            writeln!(out, "mu = {}", fmt_num(witness.mu))?;
            writeln!(out, "x0 = {}", fmt_num(witness.x0))?;
            writeln!(out, "lag = {}", witness.lag)?;
            writeln!(out, "k,delta")?;
            for g in &witness.offending {
                writeln!(out, "{},{}", g.k, fmt_num(g.delta))?;
            }
            Ok(EXIT_OK)
        }
        CounterexampleKind::GammaDomain { alpha, json } => {
            let report = counterexample_gamma_domain(alpha).map_err(Exit::usage)?;
            if json {
                print_json(out, &report)?;
                return Ok(EXIT_OK);
            }
            writeln!(out, "i,gamma_argument,strict,extended_coefficient")?;
            for row in &report.rows {
                writeln!(
                    out,
                    "{},{},{},{}",
                    row.i,
                    fmt_num(row.gamma_argument),
                    row.strict_error.as_deref().unwrap_or("ok"),
                    fmt_num(row.extended_coefficient)
                )?;
            }
            Ok(EXIT_OK)
        }
    }
}
