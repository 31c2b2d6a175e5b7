//! Command-line front end of the `dfc` binary.
//!
//! Every report carries `schema_version`. Exit status is 0 on success, 1 on
//! a domain error (or a failed verification) and 2 on a usage error.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;

use crate::cycles::{find_cycles_with, Cycle, CycleSearch};
use crate::error::Error;
use crate::gains::{GainScheme, GainVector};
use crate::map::{parse_binding, MapSpec};
use crate::roots::poly_roots;
use crate::sim::{history_len, orbit_history, simulate, WINDOW_PERIODS};
use crate::spectrum::{build_jacobian, char_poly_closed, jacobian_via_chain};
use crate::stability::{
    gamma_t1, min_n_to_stabilize, spectral_radius, stable_mu_interval, MuInterval, RootEntry,
    StabilityReport, DEFAULT_MARGIN,
};
use crate::verify::{run_suite, Suite, SuiteOutcome};

pub const SCHEMA_VERSION: u32 = 1;

/// Largest number of points a sweep may evaluate.
const MAX_SWEEP_POINTS: usize = 1_000_000;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{flag}: {message}")]
    Usage { flag: String, message: String },
    #[error(transparent)]
    Core(#[from] Error),
    #[error("{0}")]
    Failed(String),
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage { .. } => 2,
            CliError::Core(e) if e.is_usage() || matches!(e, Error::DimensionCap { .. }) => 2,
            _ => 1,
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn usage(flag: &str, message: impl Into<String>) -> CliError {
    CliError::Usage {
        flag: flag.to_string(),
        message: message.into(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(
    name = "dfc",
    version,
    about = "Delayed feedback control of cycles in one-dimensional maps"
)]
pub struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Write the report here instead of standard output.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct MapArgs {
    /// Builtin designator such as `logistic:r=4`, or an expression in `x`.
    #[arg(long, value_name = "SPEC", allow_hyphen_values = true)]
    pub map: String,
    /// Parameter binding; repeatable.
    #[arg(long = "param", value_name = "KEY=VALUE", allow_hyphen_values = true)]
    pub params: Vec<String>,
    /// Search interval for cycles.
    #[arg(long, value_name = "LO,HI", allow_hyphen_values = true)]
    pub domain: Option<String>,
}

#[derive(Debug, Args)]
pub struct GainArgs {
    /// Number of gains (memory depth).
    #[arg(long = "N", value_name = "N")]
    pub n: Option<usize>,
    /// Gain scheme.
    #[arg(long, value_name = "uniform|dk2013|custom")]
    pub scheme: Option<String>,
    /// Explicit gains, summing to one.
    #[arg(long, value_name = "A1,A2,...", allow_hyphen_values = true)]
    pub gains: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Closed form in the product of the multipliers.
    Closed,
    /// Faddeev–LeVerrier on the tabulated Jacobian.
    Jacobian,
    /// Faddeev–LeVerrier on the chain-rule product of step Jacobians.
    Chain,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Periodic orbits of a map with their multipliers.
    Cycles {
        #[command(flatten)]
        map: MapArgs,
        #[arg(long = "period", visible_alias = "T", value_name = "T")]
        t: usize,
        /// Grid points of the sign-change scan.
        #[arg(long, default_value_t = 1000)]
        grid: usize,
        /// Orbit identification tolerance.
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
    /// Characteristic polynomial of the controlled cycle and its roots.
    Charpoly {
        #[command(flatten)]
        gains: GainArgs,
        #[arg(long = "T", visible_alias = "period", value_name = "T")]
        t: usize,
        /// Multipliers μ_1..μ_T along the orbit.
        #[arg(
            long,
            value_name = "M1,...",
            allow_hyphen_values = true,
            conflicts_with = "mu"
        )]
        multipliers: Option<String>,
        /// Product μ of the multipliers.
        #[arg(long, allow_negative_numbers = true)]
        mu: Option<f64>,
        #[arg(long, value_enum, default_value_t = Method::Closed)]
        method: Method,
    },
    /// Schur stability of the controlled cycle at one multiplier.
    Stability {
        #[command(flatten)]
        gains: GainArgs,
        #[arg(long = "T", visible_alias = "period", value_name = "T")]
        t: usize,
        #[arg(long, allow_negative_numbers = true)]
        mu: f64,
        /// Stable means spectral radius below `1 − margin`.
        #[arg(long, default_value_t = DEFAULT_MARGIN)]
        margin: f64,
    },
    /// Gain vector of a scheme.
    Gains {
        #[command(flatten)]
        gains: GainArgs,
    },
    /// Simulate the controlled map.
    Simulate {
        #[command(flatten)]
        map: MapArgs,
        #[command(flatten)]
        gains: GainArgs,
        #[arg(long = "period", visible_alias = "T", value_name = "T")]
        t: usize,
        /// Constant initial history.
        #[arg(long, allow_negative_numbers = true, conflicts_with = "history")]
        init: Option<f64>,
        /// Explicit initial history, oldest first, (N−1)T+1 values.
        #[arg(long, value_name = "V1,...", allow_hyphen_values = true)]
        history: Option<String>,
        #[arg(long, default_value_t = 5000)]
        steps: usize,
        #[arg(long, default_value_t = crate::sim::DEFAULT_TOL)]
        tol: f64,
        /// A point of the target orbit; by default the orbit nearest the
        /// final state.
        #[arg(long, allow_negative_numbers = true)]
        target: Option<f64>,
        /// Grid points used to locate the target orbit.
        #[arg(long, default_value_t = 1000)]
        grid: usize,
        /// With `--format csv`, where to write the JSON summary (default:
        /// standard error).
        #[arg(long, value_name = "PATH")]
        summary: Option<PathBuf>,
    },
    /// Spectral radius over a grid of multipliers.
    Sweep {
        #[command(flatten)]
        gains: GainArgs,
        #[arg(long = "T", visible_alias = "period", value_name = "T")]
        t: usize,
        #[arg(long = "mu-range", value_name = "LO,HI", allow_hyphen_values = true)]
        mu_range: String,
        #[arg(long = "mu-step")]
        mu_step: f64,
        #[arg(long, default_value_t = DEFAULT_MARGIN)]
        margin: f64,
    },
    /// Seeded self-checks of the structural identities.
    Verify {
        #[arg(
            long,
            default_value = "all",
            value_name = "lemma1|chain|rotation|jury|morgul|all"
        )]
        suite: String,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Interval of multipliers stabilised by a gain vector.
    Interval {
        #[command(flatten)]
        gains: GainArgs,
        #[arg(long = "T", visible_alias = "period", value_name = "T")]
        t: usize,
        /// Angular grid for the boundary-crossing scan (T = 1 only).
        #[arg(long = "theta-grid", default_value_t = 100_000)]
        theta_grid: usize,
    },
    /// Smallest memory depth N that stabilises a multiplier.
    MinN {
        #[arg(long = "T", visible_alias = "period", value_name = "T")]
        t: usize,
        #[arg(long, allow_negative_numbers = true)]
        mu: f64,
        #[arg(long, default_value = "uniform", value_name = "uniform|dk2013")]
        scheme: String,
        #[arg(long = "n-max", default_value_t = 20)]
        n_max: usize,
    },
    /// Find T-cycles, choose N for each, and confirm by simulation.
    Stabilize {
        #[command(flatten)]
        map: MapArgs,
        #[arg(long = "period", visible_alias = "T", value_name = "T")]
        t: usize,
        #[arg(long, default_value = "uniform", value_name = "uniform|dk2013")]
        scheme: String,
        #[arg(long = "n-max", default_value_t = 10)]
        n_max: usize,
        #[arg(long, default_value_t = 10_000)]
        steps: usize,
        #[arg(long, default_value_t = crate::sim::DEFAULT_TOL)]
        tol: f64,
        /// Offset added to the on-orbit initial history.
        #[arg(long, default_value_t = 1e-3, allow_negative_numbers = true)]
        perturb: f64,
        #[arg(long, default_value_t = 1000)]
        grid: usize,
    },
}

/// Parses arguments, runs, reports errors; returns the exit status.
pub fn main_with<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 {
                stdout.write_all(text.as_bytes())
            } else {
                stderr.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match run(&cli, stdout, stderr) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

pub fn run(cli: &Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> CliResult<()> {
    let out = Output {
        format: cli.format,
        path: cli.out.as_deref(),
    };
    match &cli.command {
        Command::Cycles { map, t, grid, tol } => cmd_cycles(&out, stdout, map, *t, *grid, *tol),
        Command::Charpoly {
            gains,
            t,
            multipliers,
            mu,
            method,
        } => cmd_charpoly(
            &out,
            stdout,
            gains,
            *t,
            multipliers.as_deref(),
            *mu,
            *method,
        ),
        Command::Stability {
            gains,
            t,
            mu,
            margin,
        } => cmd_stability(&out, stdout, gains, *t, *mu, *margin),
        Command::Gains { gains } => cmd_gains(&out, stdout, gains),
        Command::Simulate {
            map,
            gains,
            t,
            init,
            history,
            steps,
            tol,
            target,
            grid,
            summary,
        } => cmd_simulate(
            &out,
            stdout,
            stderr,
            SimulateArgs {
                map,
                gains,
                t: *t,
                init: *init,
                history: history.as_deref(),
                steps: *steps,
                tol: *tol,
                target: *target,
                grid: *grid,
                summary: summary.as_deref(),
            },
        ),
        Command::Sweep {
            gains,
            t,
            mu_range,
            mu_step,
            margin,
        } => cmd_sweep(&out, stdout, gains, *t, mu_range, *mu_step, *margin),
        Command::Verify {
            suite,
            trials,
            seed,
        } => cmd_verify(&out, stdout, suite, *trials, *seed),
        Command::Interval {
            gains,
            t,
            theta_grid,
        } => cmd_interval(&out, stdout, gains, *t, *theta_grid),
        Command::MinN {
            t,
            mu,
            scheme,
            n_max,
        } => cmd_min_n(&out, stdout, *t, *mu, scheme, *n_max),
        Command::Stabilize {
            map,
            t,
            scheme,
            n_max,
            steps,
            tol,
            perturb,
            grid,
        } => cmd_stabilize(
            &out,
            stdout,
            StabilizeArgs {
                map,
                t: *t,
                scheme,
                n_max: *n_max,
                steps: *steps,
                tol: *tol,
                perturb: *perturb,
                grid: *grid,
            },
        ),
    }
}

struct Output<'a> {
    format: Format,
    path: Option<&'a Path>,
}

impl Output<'_> {
    fn emit<R: Serialize>(
        &self,
        stdout: &mut dyn Write,
        report: &R,
        csv_header: &[&str],
        csv_rows: Vec<Vec<String>>,
    ) -> CliResult<()> {
        let bytes = match self.format {
            Format::Json => json_bytes(report)?,
            Format::Csv => csv_bytes(csv_header, &csv_rows)?,
        };
        self.write(stdout, &bytes)
    }

    fn write(&self, stdout: &mut dyn Write, bytes: &[u8]) -> CliResult<()> {
        match self.path {
            Some(p) => std::fs::write(p, bytes)?,
            None => stdout.write_all(bytes)?,
        }
        Ok(())
    }
}

fn json_bytes<R: Serialize>(report: &R) -> CliResult<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(report)?;
    bytes.push(b'\n');
    Ok(bytes)
}

fn csv_bytes(header: &[&str], rows: &[Vec<String>]) -> CliResult<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(row)?;
    }
    w.into_inner()
        .map_err(|e| CliError::Io(io::Error::other(e.to_string())))
}

fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:?}")
    } else {
        String::new()
    }
}

fn opt<T: ToString>(x: Option<T>) -> String {
    x.map_or_else(String::new, |v| v.to_string())
}

fn parse_list(flag: &str, text: &str) -> CliResult<Vec<f64>> {
    text.split(',')
        .map(|s| {
            let s = s.trim();
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| {
                    usage(
                        flag,
                        format!("`{s}` is not a finite number; expected v1,v2,..."),
                    )
                })
        })
        .collect()
}

fn check_period(flag: &str, t: usize) -> CliResult<()> {
    if t == 0 {
        return Err(usage(flag, "expected a positive integer"));
    }
    Ok(())
}

fn check_finite(flag: &str, x: f64) -> CliResult<()> {
    if !x.is_finite() {
        return Err(usage(flag, format!("`{x}` is not a finite number")));
    }
    Ok(())
}

fn check_positive(flag: &str, x: f64) -> CliResult<()> {
    if !(x.is_finite() && x > 0.0) {
        return Err(usage(flag, format!("`{x}` must be a positive number")));
    }
    Ok(())
}

impl MapArgs {
    fn resolve(&self) -> CliResult<MapSpec> {
        let mut params = BTreeMap::new();
        for text in &self.params {
            let (k, v) = parse_binding(text)
                .map_err(|e| usage("--param", format!("{e}; expected KEY=VALUE")))?;
            params.insert(k, v);
        }
        let mut m =
            MapSpec::parse(&self.map, &params).map_err(|e| usage("--map", e.to_string()))?;
        if let Some(d) = &self.domain {
            let v = parse_list("--domain", d)?;
            if v.len() != 2 {
                return Err(usage("--domain", "expected LO,HI"));
            }
            m = m
                .with_domain(v[0], v[1])
                .map_err(|e| usage("--domain", format!("{e}; expected LO,HI with LO < HI")))?;
        }
        Ok(m)
    }
}

impl GainArgs {
    /// Scheme name and gains. Explicit `--gains` means the custom scheme;
    /// otherwise `--N` with `uniform` (the default) or `dk2013`.
    fn resolve(&self) -> CliResult<(String, GainVector)> {
        if self.n == Some(0) {
            return Err(usage("--N", "expected a positive integer"));
        }
        match (self.scheme.as_deref(), &self.gains) {
            (None | Some("custom"), Some(text)) => {
                let v = parse_list("--gains", text)?;
                if let Some(n) = self.n.filter(|&n| n != v.len()) {
                    return Err(usage(
                        "--gains",
                        format!("{} values given but --N is {n}", v.len()),
                    ));
                }
                let a = GainVector::new(v)
                    .map_err(|e| usage("--gains", format!("{e}; expected values summing to 1")))?;
                Ok(("custom".into(), a))
            }
            (Some("custom"), None) => Err(usage(
                "--gains",
                "the custom scheme needs --gains A1,A2,...",
            )),
            (Some(_), Some(_)) => Err(usage("--gains", "only valid with --scheme custom")),
            (scheme, None) => {
                let scheme: GainScheme = scheme
                    .unwrap_or("uniform")
                    .parse()
                    .map_err(|_| usage("--scheme", "expected uniform, dk2013 or custom"))?;
                let n = self
                    .n
                    .ok_or_else(|| usage("--N", "required with a named scheme"))?;
                Ok((scheme.to_string(), scheme.gains(n)?))
            }
        }
    }
}

fn parse_scheme(text: &str) -> CliResult<GainScheme> {
    text.parse()
        .map_err(|_| usage("--scheme", "expected uniform or dk2013"))
}

#[derive(Serialize)]
struct CyclesReport<'a> {
    schema_version: u32,
    map: String,
    period: usize,
    grid: usize,
    cycles: &'a [Cycle],
}

fn cmd_cycles(
    out: &Output,
    stdout: &mut dyn Write,
    map: &MapArgs,
    t: usize,
    grid: usize,
    tol: f64,
) -> CliResult<()> {
    check_period("--period", t)?;
    check_positive("--tol", tol)?;
    if grid < 100 {
        return Err(usage("--grid", "expected an integer of at least 100"));
    }
    let m = map.resolve()?;
    let search = CycleSearch {
        orbit_tol: tol,
        ..CycleSearch::default()
    };
    let cycles = find_cycles_with(&m, t, grid, &search)?;
    let rows = cycles
        .iter()
        .enumerate()
        .flat_map(|(c, cyc)| {
            cyc.points
                .iter()
                .zip(&cyc.multipliers)
                .enumerate()
                .map(move |(j, (x, mu))| {
                    vec![
                        c.to_string(),
                        j.to_string(),
                        num(*x),
                        num(*mu),
                        num(cyc.multiplier_product),
                    ]
                })
        })
        .collect();
    let report = CyclesReport {
        schema_version: SCHEMA_VERSION,
        map: m.to_string(),
        period: t,
        grid,
        cycles: &cycles,
    };
    out.emit(
        stdout,
        &report,
        &["cycle", "j", "point", "multiplier", "product"],
        rows,
    )
}

#[derive(Serialize)]
struct CharpolyReport {
    schema_version: u32,
    #[serde(rename = "N")]
    n: usize,
    #[serde(rename = "T")]
    t: usize,
    scheme: String,
    gains: GainVector,
    mu: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    multipliers: Option<Vec<f64>>,
    method: Method,
    /// Ascending powers of λ.
    coefficients: Vec<f64>,
    roots: Vec<RootEntry>,
    reduced_precision: bool,
}

fn cmd_charpoly(
    out: &Output,
    stdout: &mut dyn Write,
    gains: &GainArgs,
    t: usize,
    multipliers: Option<&str>,
    mu: Option<f64>,
    method: Method,
) -> CliResult<()> {
    check_period("--T", t)?;
    let (scheme, a) = gains.resolve()?;
    let n = a.len();
    let mults = multipliers
        .map(|m| parse_list("--multipliers", m))
        .transpose()?;
    if let Some(m) = &mults {
        if m.len() != t {
            return Err(usage(
                "--multipliers",
                format!("expected {t} values M1,...,MT, got {}", m.len()),
            ));
        }
    }
    let mu = match (&mults, mu) {
        (Some(m), _) => m.iter().product(),
        (None, Some(mu)) => {
            check_finite("--mu", mu)?;
            mu
        }
        (None, None) => {
            return Err(usage(
                "--multipliers",
                "give --multipliers M1,...,MT or --mu M",
            ))
        }
    };
    let p = match (method, &mults) {
        (Method::Closed, _) => char_poly_closed(n, t, &a, mu)?,
        (_, None) => {
            return Err(usage(
                "--multipliers",
                "the jacobian and chain methods need M1,...,MT",
            ));
        }
        (Method::Jacobian, Some(m)) => build_jacobian(n, t, &a, m)?.char_poly_faddeev()?,
        (Method::Chain, Some(m)) => jacobian_via_chain(n, t, &a, m)?.char_poly_faddeev()?,
    };
    let set = poly_roots(&p)?;
    let reduced_precision = set.reduced_precision();
    let roots: Vec<RootEntry> = set.roots.into_iter().map(RootEntry::from).collect();
    let mut rows: Vec<Vec<String>> = p
        .coeffs()
        .iter()
        .enumerate()
        .map(|(k, c)| {
            vec![
                "coefficient".into(),
                k.to_string(),
                num(*c),
                "0.0".into(),
                num(c.abs()),
            ]
        })
        .collect();
    rows.extend(roots.iter().enumerate().map(|(k, r)| {
        vec![
            "root".into(),
            k.to_string(),
            num(r.re),
            num(r.im),
            num(r.modulus),
        ]
    }));
    let report = CharpolyReport {
        schema_version: SCHEMA_VERSION,
        n,
        t,
        scheme,
        gains: a,
        mu,
        multipliers: mults,
        method,
        coefficients: p.into_coeffs(),
        roots,
        reduced_precision,
    };
    out.emit(
        stdout,
        &report,
        &["kind", "index", "re", "im", "modulus"],
        rows,
    )
}

#[derive(Serialize)]
struct StabilityOutput {
    schema_version: u32,
    #[serde(rename = "N")]
    n: usize,
    #[serde(rename = "T")]
    t: usize,
    scheme: String,
    gains: GainVector,
    mu: f64,
    margin: f64,
    stable: bool,
    #[serde(flatten)]
    report: StabilityReport,
}

fn cmd_stability(
    out: &Output,
    stdout: &mut dyn Write,
    gains: &GainArgs,
    t: usize,
    mu: f64,
    margin: f64,
) -> CliResult<()> {
    check_period("--T", t)?;
    check_finite("--mu", mu)?;
    if !(margin.is_finite() && (0.0..1.0).contains(&margin)) {
        return Err(usage("--margin", "expected a number in [0, 1)"));
    }
    let (scheme, a) = gains.resolve()?;
    let report = StabilityReport::for_control(a.len(), t, &a, mu, margin)?;
    let row = vec![
        num(mu),
        num(report.spectral_radius),
        report.schur_stable.to_string(),
        report.jury_verdict.to_string(),
        report.marginal.to_string(),
    ];
    let doc = StabilityOutput {
        schema_version: SCHEMA_VERSION,
        n: a.len(),
        t,
        scheme,
        gains: a,
        mu,
        margin,
        stable: report.schur_stable,
        report,
    };
    out.emit(
        stdout,
        &doc,
        &["mu", "spectral_radius", "stable", "jury_stable", "marginal"],
        vec![row],
    )
}

#[derive(Serialize)]
struct GainsReport {
    schema_version: u32,
    scheme: String,
    #[serde(rename = "N")]
    n: usize,
    gains: GainVector,
    sum: f64,
}

fn cmd_gains(out: &Output, stdout: &mut dyn Write, gains: &GainArgs) -> CliResult<()> {
    let (scheme, a) = gains.resolve()?;
    let rows = a
        .as_slice()
        .iter()
        .enumerate()
        .map(|(j, g)| vec![(j + 1).to_string(), num(*g)])
        .collect();
    let report = GainsReport {
        schema_version: SCHEMA_VERSION,
        scheme,
        n: a.len(),
        sum: a.as_slice().iter().sum(),
        gains: a,
    };
    out.emit(stdout, &report, &["j", "gain"], rows)
}

struct SimulateArgs<'a> {
    map: &'a MapArgs,
    gains: &'a GainArgs,
    t: usize,
    init: Option<f64>,
    history: Option<&'a str>,
    steps: usize,
    tol: f64,
    target: Option<f64>,
    grid: usize,
    summary: Option<&'a Path>,
}

#[derive(Serialize)]
struct SimulationSummary {
    schema_version: u32,
    map: String,
    #[serde(rename = "N")]
    n: usize,
    #[serde(rename = "T")]
    t: usize,
    scheme: String,
    gains: GainVector,
    steps: usize,
    tol: f64,
    target: Cycle,
    converged: bool,
    settle_step: Option<usize>,
    diverged: bool,
    final_state: f64,
    /// Largest `|u(k)|` over the final `10·T` steps.
    max_final_control: f64,
}

fn cmd_simulate(
    out: &Output,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
    args: SimulateArgs,
) -> CliResult<()> {
    let t = args.t;
    check_period("--period", t)?;
    check_positive("--tol", args.tol)?;
    if args.steps < WINDOW_PERIODS * t {
        return Err(usage(
            "--steps",
            format!("expected at least 10T = {}", WINDOW_PERIODS * t),
        ));
    }
    if args.grid < 100 {
        return Err(usage("--grid", "expected an integer of at least 100"));
    }
    let m = args.map.resolve()?;
    let (scheme, a) = args.gains.resolve()?;
    let h = history_len(a.len(), t);
    let history = match (args.init, args.history) {
        (Some(x), None) => {
            check_finite("--init", x)?;
            vec![x; h]
        }
        (None, Some(text)) => {
            let v = parse_list("--history", text)?;
            if v.len() != h {
                return Err(usage(
                    "--history",
                    format!(
                        "expected (N-1)T+1 = {h} values V1,...,V{h}, got {}",
                        v.len()
                    ),
                ));
            }
            v
        }
        _ => return Err(usage("--init", "give --init V or --history V1,...")),
    };

    let cycles = find_cycles_with(&m, t, args.grid, &CycleSearch::default())?;
    if cycles.is_empty() {
        return Err(CliError::Failed(format!(
            "no {t}-cycle found on the map's domain"
        )));
    }
    let nearest = |x: f64| {
        cycles
            .iter()
            .min_by(|p, q| p.distance(x).total_cmp(&q.distance(x)))
            .expect("non-empty")
            .clone()
    };
    let target = match args.target {
        Some(x) => {
            let c = nearest(x);
            if c.distance(x) > 1e-6 {
                return Err(usage(
                    "--target",
                    format!("{x} is not within 1e-6 of any {t}-cycle"),
                ));
            }
            c
        }
        None => {
            // Provisional run to find which orbit the trajectory approaches.
            let probe = simulate(&m, &a, t, &history, args.steps, &cycles[0], args.tol)?;
            nearest(probe.final_state())
        }
    };
    let tr = simulate(&m, &a, t, &history, args.steps, &target, args.tol)?;

    let summary = SimulationSummary {
        schema_version: SCHEMA_VERSION,
        map: m.to_string(),
        n: a.len(),
        t,
        scheme,
        gains: a,
        steps: args.steps,
        tol: args.tol,
        converged: tr.converged,
        settle_step: tr.settle_step,
        diverged: tr.diverged,
        final_state: tr.final_state(),
        max_final_control: tr.max_recent_control(WINDOW_PERIODS * t),
        target,
    };
    match out.format {
        Format::Json => out.write(stdout, &json_bytes(&summary)?),
        Format::Csv => {
            let first = -(h as isize - 1);
            let rows: Vec<Vec<String>> = tr
                .states
                .iter()
                .enumerate()
                .map(|(i, x)| {
                    let k = first + i as isize;
                    let u = usize::try_from(k).ok().and_then(|k| tr.controls.get(k));
                    vec![
                        k.to_string(),
                        num(*x),
                        u.map_or_else(String::new, |u| num(*u)),
                    ]
                })
                .collect();
            out.write(stdout, &csv_bytes(&["k", "x", "u"], &rows)?)?;
            let bytes = json_bytes(&summary)?;
            match args.summary {
                Some(p) => std::fs::write(p, bytes)?,
                None => stderr.write_all(&bytes)?,
            }
            Ok(())
        }
    }
}

#[derive(Serialize)]
struct SweepRow {
    mu: f64,
    spectral_radius: f64,
    stable: bool,
}

#[derive(Serialize)]
struct SweepReport {
    schema_version: u32,
    #[serde(rename = "N")]
    n: usize,
    #[serde(rename = "T")]
    t: usize,
    scheme: String,
    gains: GainVector,
    margin: f64,
    rows: Vec<SweepRow>,
}

fn cmd_sweep(
    out: &Output,
    stdout: &mut dyn Write,
    gains: &GainArgs,
    t: usize,
    mu_range: &str,
    mu_step: f64,
    margin: f64,
) -> CliResult<()> {
    check_period("--T", t)?;
    let range = parse_list("--mu-range", mu_range)?;
    if range.len() != 2 || range[0] > range[1] {
        return Err(usage("--mu-range", "expected LO,HI with LO <= HI"));
    }
    check_positive("--mu-step", mu_step)?;
    if !(margin.is_finite() && (0.0..1.0).contains(&margin)) {
        return Err(usage("--margin", "expected a number in [0, 1)"));
    }
    let (lo, hi) = (range[0], range[1]);
    let count = ((hi - lo) / mu_step * (1.0 + 1e-12)).floor() + 1.0;
    if count > MAX_SWEEP_POINTS as f64 {
        return Err(usage(
            "--mu-step",
            format!("grid exceeds {MAX_SWEEP_POINTS} points"),
        ));
    }
    let (scheme, a) = gains.resolve()?;
    let n = a.len();
    let rows = (0..count as usize)
        .into_par_iter()
        .map(|i| {
            let mu = lo + i as f64 * mu_step;
            let rho = spectral_radius(&char_poly_closed(n, t, &a, mu)?)?;
            Ok(SweepRow {
                mu,
                spectral_radius: rho,
                stable: rho < 1.0 - margin,
            })
        })
        .collect::<Result<Vec<_>, Error>>()?;
    let csv_rows = rows
        .iter()
        .map(|r| vec![num(r.mu), num(r.spectral_radius), r.stable.to_string()])
        .collect();
    let report = SweepReport {
        schema_version: SCHEMA_VERSION,
        n,
        t,
        scheme,
        gains: a,
        margin,
        rows,
    };
    out.emit(
        stdout,
        &report,
        &["mu", "spectral_radius", "stable"],
        csv_rows,
    )
}

#[derive(Serialize)]
struct VerifyReport {
    schema_version: u32,
    seed: u64,
    trials: usize,
    passed: bool,
    suites: Vec<SuiteOutcome>,
}

fn cmd_verify(
    out: &Output,
    stdout: &mut dyn Write,
    suite: &str,
    trials: usize,
    seed: u64,
) -> CliResult<()> {
    if trials == 0 {
        return Err(usage("--trials", "expected a positive integer"));
    }
    let suites: Vec<Suite> = if suite == "all" {
        Suite::ALL.to_vec()
    } else {
        vec![suite.parse().map_err(|_| {
            usage(
                "--suite",
                "expected lemma1, chain, rotation, jury, morgul or all",
            )
        })?]
    };
    let outcomes = suites
        .into_iter()
        .map(|s| run_suite(s, trials, seed))
        .collect::<Result<Vec<_>, Error>>()?;
    let passed = outcomes.iter().all(|o| o.passed);
    let rows = outcomes
        .iter()
        .map(|o| {
            vec![
                o.suite.to_string(),
                o.trials.to_string(),
                o.seed.to_string(),
                o.failures.to_string(),
                num(o.max_error),
                num(o.tolerance),
                o.passed.to_string(),
            ]
        })
        .collect();
    let failed: Vec<String> = outcomes
        .iter()
        .filter(|o| !o.passed)
        .map(|o| o.suite.to_string())
        .collect();
    let report = VerifyReport {
        schema_version: SCHEMA_VERSION,
        seed,
        trials,
        passed,
        suites: outcomes,
    };
    out.emit(
        stdout,
        &report,
        &[
            "suite",
            "trials",
            "seed",
            "failures",
            "max_error",
            "tolerance",
            "passed",
        ],
        rows,
    )?;
    if passed {
        Ok(())
    } else {
        Err(CliError::Failed(format!(
            "verification failed: {}",
            failed.join(", ")
        )))
    }
}

#[derive(Serialize)]
struct IntervalReport {
    schema_version: u32,
    #[serde(flatten)]
    interval: MuInterval,
    gains: GainVector,
    /// Boundary-crossing value for `T = 1`; `null` otherwise or when
    /// unbounded.
    gamma: Option<f64>,
}

fn cmd_interval(
    out: &Output,
    stdout: &mut dyn Write,
    gains: &GainArgs,
    t: usize,
    theta_grid: usize,
) -> CliResult<()> {
    check_period("--T", t)?;
    if theta_grid < 10_000 {
        return Err(usage(
            "--theta-grid",
            "expected an integer of at least 10000",
        ));
    }
    let (scheme, a) = gains.resolve()?;
    let mut interval = stable_mu_interval(a.len(), t, &a)?;
    interval.scheme = scheme;
    let gamma = if t == 1 {
        match gamma_t1(&a, theta_grid) {
            Ok(g) if g.is_finite() => Some(g),
            Ok(_) | Err(Error::NoBoundaryCrossing) => None,
            Err(e) => return Err(e.into()),
        }
    } else {
        None
    };
    let row = vec![
        interval.scheme.clone(),
        interval.n.to_string(),
        interval.t.to_string(),
        num(interval.lo),
        num(interval.hi),
        gamma.map_or_else(String::new, num),
    ];
    let report = IntervalReport {
        schema_version: SCHEMA_VERSION,
        interval,
        gains: a,
        gamma,
    };
    out.emit(
        stdout,
        &report,
        &["scheme", "N", "T", "lo", "hi", "gamma"],
        vec![row],
    )
}

#[derive(Serialize)]
struct MinNReport {
    schema_version: u32,
    #[serde(rename = "T")]
    t: usize,
    mu: f64,
    scheme: GainScheme,
    n_max: usize,
    #[serde(rename = "N")]
    n: Option<usize>,
}

fn cmd_min_n(
    out: &Output,
    stdout: &mut dyn Write,
    t: usize,
    mu: f64,
    scheme: &str,
    n_max: usize,
) -> CliResult<()> {
    check_period("--T", t)?;
    check_finite("--mu", mu)?;
    if n_max == 0 {
        return Err(usage("--n-max", "expected a positive integer"));
    }
    let scheme = parse_scheme(scheme)?;
    let n = min_n_to_stabilize(t, mu, scheme, n_max)?;
    let row = vec![
        t.to_string(),
        num(mu),
        scheme.to_string(),
        n_max.to_string(),
        opt(n),
    ];
    let report = MinNReport {
        schema_version: SCHEMA_VERSION,
        t,
        mu,
        scheme,
        n_max,
        n,
    };
    out.emit(
        stdout,
        &report,
        &["T", "mu", "scheme", "n_max", "N"],
        vec![row],
    )
}

struct StabilizeArgs<'a> {
    map: &'a MapArgs,
    t: usize,
    scheme: &'a str,
    n_max: usize,
    steps: usize,
    tol: f64,
    perturb: f64,
    grid: usize,
}

pub const STATUS_STABILIZED: &str = "stabilized";
pub const STATUS_NOT_STABILIZABLE: &str = "not stabilizable by this control";
pub const STATUS_N_MAX: &str = "no stabilizing N up to n_max";
pub const STATUS_DISAGREE: &str = "prediction and simulation disagree";

#[derive(Serialize)]
struct StabilizeEntry {
    points: Vec<f64>,
    multipliers: Vec<f64>,
    mu: f64,
    #[serde(rename = "N")]
    n: Option<usize>,
    gains: Option<GainVector>,
    spectral_radius: Option<f64>,
    predicted_stable: Option<bool>,
    converged: Option<bool>,
    settle_step: Option<usize>,
    agree: Option<bool>,
    status: &'static str,
}

#[derive(Serialize)]
struct StabilizeReport {
    schema_version: u32,
    map: String,
    #[serde(rename = "T")]
    t: usize,
    scheme: GainScheme,
    n_max: usize,
    perturb: f64,
    steps: usize,
    tol: f64,
    cycles: Vec<StabilizeEntry>,
}

fn cmd_stabilize(out: &Output, stdout: &mut dyn Write, args: StabilizeArgs) -> CliResult<()> {
    let t = args.t;
    check_period("--period", t)?;
    check_positive("--tol", args.tol)?;
    check_finite("--perturb", args.perturb)?;
    if args.n_max == 0 {
        return Err(usage("--n-max", "expected a positive integer"));
    }
    if args.steps < WINDOW_PERIODS * t {
        return Err(usage(
            "--steps",
            format!("expected at least 10T = {}", WINDOW_PERIODS * t),
        ));
    }
    if args.grid < 100 {
        return Err(usage("--grid", "expected an integer of at least 100"));
    }
    let scheme = parse_scheme(args.scheme)?;
    let m = args.map.resolve()?;
    let cycles = find_cycles_with(&m, t, args.grid, &CycleSearch::default())?;
    let mut entries = Vec::with_capacity(cycles.len());
    for c in cycles {
        let mu = c.multiplier_product;
        let mut entry = StabilizeEntry {
            points: c.points.clone(),
            multipliers: c.multipliers.clone(),
            mu,
            n: None,
            gains: None,
            spectral_radius: None,
            predicted_stable: None,
            converged: None,
            settle_step: None,
            agree: None,
            status: STATUS_NOT_STABILIZABLE,
        };
        if mu >= 1.0 {
            entries.push(entry);
            continue;
        }
        let Some(n) = min_n_to_stabilize(t, mu, scheme, args.n_max)? else {
            entry.status = STATUS_N_MAX;
            entries.push(entry);
            continue;
        };
        let a = scheme.gains(n)?;
        let rho = spectral_radius(&char_poly_closed(n, t, &a, mu)?)?;
        let history: Vec<f64> = orbit_history(&c, history_len(n, t))
            .into_iter()
            .map(|x| x + args.perturb)
            .collect();
        let tr = simulate(&m, &a, t, &history, args.steps, &c, args.tol)?;
        let predicted = rho < 1.0;
        let agree = predicted == tr.converged;
        entry.status = match (agree, tr.converged) {
            (true, true) => STATUS_STABILIZED,
            _ => STATUS_DISAGREE,
        };
        entry.n = Some(n);
        entry.gains = Some(a);
        entry.spectral_radius = Some(rho);
        entry.predicted_stable = Some(predicted);
        entry.converged = Some(tr.converged);
        entry.settle_step = tr.settle_step;
        entry.agree = Some(agree);
        entries.push(entry);
    }
    let rows = entries
        .iter()
        .map(|e| {
            vec![
                num(e.points[0]),
                num(e.mu),
                opt(e.n),
                e.spectral_radius.map_or_else(String::new, num),
                opt(e.predicted_stable),
                opt(e.converged),
                opt(e.agree),
                e.status.to_string(),
            ]
        })
        .collect();
    let report = StabilizeReport {
        schema_version: SCHEMA_VERSION,
        map: m.to_string(),
        t,
        scheme,
        n_max: args.n_max,
        perturb: args.perturb,
        steps: args.steps,
        tol: args.tol,
        cycles: entries,
    };
    out.emit(
        stdout,
        &report,
        &[
            "anchor",
            "mu",
            "N",
            "spectral_radius",
            "predicted_stable",
            "converged",
            "agree",
            "status",
        ],
        rows,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = main_with(
            std::iter::once("dfc").chain(args.iter().copied()),
            &mut out,
            &mut err,
        );
        (
            code,
            String::from_utf8(out).unwrap(),
            String::from_utf8(err).unwrap(),
        )
    }

    #[test]
    fn stability_json() {
        let (code, out, _) = run_args(&[
            "stability",
            "--N",
            "3",
            "--T",
            "1",
            "--scheme",
            "uniform",
            "--mu",
            "-2",
        ]);
        assert_eq!(code, 0);
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["schema_version"], 1);
        assert_eq!(v["stable"], true);
        assert!(v["spectral_radius"].as_f64().unwrap() < 1.0);
    }

    #[test]
    fn usage_errors_exit_two() {
        let (code, _, err) = run_args(&["stability", "--N", "3", "--T", "0", "--mu", "-2"]);
        assert_eq!(code, 2);
        assert!(err.contains("--T"), "{err}");
        let (code, _, _) = run_args(&["gains", "--scheme", "bogus", "--N", "2"]);
        assert_eq!(code, 2);
        let (code, _, err) = run_args(&["cycles", "--map", "x^", "--period", "1"]);
        assert_eq!(code, 2);
        assert!(err.contains("--map"), "{err}");
        let (code, _, _) = run_args(&["nonsense"]);
        assert_eq!(code, 2);
    }

    #[test]
    fn help_exits_zero() {
        let (code, out, _) = run_args(&["--help"]);
        assert_eq!(code, 0);
        assert!(out.contains("stability"));
    }

    #[test]
    fn gains_csv() {
        let (code, out, _) = run_args(&[
            "gains", "--scheme", "uniform", "--N", "2", "--format", "csv",
        ]);
        assert_eq!(code, 0);
        assert_eq!(out, "j,gain\n1,0.5\n2,0.5\n");
    }
}
