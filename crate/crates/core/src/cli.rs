//! The `scaled-uniform` command line front end.
//!
//! Each subcommand renders its whole report into a `String`; [`main_with_args`]
//! only decides where it goes and which exit code to return.

use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::error::Error;
use crate::estimators::{self, Estimator};
use crate::fiducial::{confidence_interval, fiducial_dist, fiducial_sample_via_conditioning, LossKind};
use crate::model::{sample_suff_stat, Design, Sample, SuffStat};
use crate::parallel::default_workers;
use crate::pareto::TruncPareto;
use crate::quad::{self, Tolerance};
use crate::risklab::{self, ExperimentGrid, McOptions, Method, RiskReport};
use crate::stats::{ks_two_sample, ks_two_sample_pvalue};

pub const RISK_SCHEMA: &str = "# scaled-uniform risk v1";
pub const RISK_COLUMNS: &str = "estimator,n,k,theta,loss,method,value,stderr,reps,seed";
pub const COVERAGE_SCHEMA: &str = "# scaled-uniform coverage v1";
pub const COVERAGE_COLUMNS: &str = "gamma,theta,n,k,reps,hits,coverage,stderr,seed";
pub const ESTIMATE_SCHEMA: &str = "# scaled-uniform estimate v1";
pub const ESTIMATE_COLUMNS: &str = "quantity,name,value";

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_INFEASIBLE: i32 = 3;
pub const EXIT_SELFTEST: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("malformed data file {path}: {reason}")]
    Malformed { path: String, reason: String },
    #[error("{0}")]
    Infeasible(Error),
    #[error("cannot write {path}: {reason}")]
    Output { path: String, reason: String },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Infeasible(_) => EXIT_INFEASIBLE,
            _ => EXIT_USAGE,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Infeasible { .. } => CliError::Infeasible(e),
            other => CliError::Usage(other.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "scaled-uniform",
    version,
    about = "Estimation, fiducial intervals and risk for the scaled uniform model"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Every estimate, the sure interval and fiducial intervals for a data file.
    Estimate(EstimateArgs),
    /// Frequentist risk of estimators over a design grid.
    Risk(RiskArgs),
    /// Coverage of the equal-tailed fiducial intervals.
    Coverage(CoverageArgs),
    /// Oracle and identity checks at reduced scale.
    Selftest(SelftestArgs),
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    /// Whitespace separated observations; `#` starts a comment.
    pub data: PathBuf,
    #[arg(long)]
    pub k: f64,
    /// Comma separated interval levels; the interval has level 1-gamma.
    #[arg(long, default_value = "0.05")]
    pub gamma: String,
    /// Comma separated estimator names, or `all`.
    #[arg(long, default_value = "all")]
    pub estimators: String,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct RiskArgs {
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub mc: McArgs,
    /// Comma separated estimator names, or `all`.
    #[arg(long, default_value = "all")]
    pub estimators: String,
    /// Comma separated losses, or `all`.
    #[arg(long, default_value = "squared")]
    pub loss: String,
    #[arg(long, value_enum, default_value_t = MethodChoice::Both)]
    pub method: MethodChoice,
    #[arg(long, default_value_t = 1.0)]
    pub theta: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct CoverageArgs {
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub mc: McArgs,
    /// Comma separated interval levels; the interval has level 1-gamma.
    #[arg(long, default_value = "0.5,0.1,0.05")]
    pub gamma: String,
    #[arg(long, default_value_t = 1.0)]
    pub theta: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SelftestArgs {
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GridArgs {
    /// `default`, or comma separated `n:k` pairs.
    #[arg(long)]
    pub grid: Option<String>,
    /// Sample sizes, crossed with every `--k`.
    #[arg(long, value_delimiter = ',')]
    pub n: Vec<usize>,
    /// Spreads, crossed with every `--n`.
    #[arg(long, value_delimiter = ',')]
    pub k: Vec<f64>,
}

#[derive(Debug, Args)]
pub struct McArgs {
    #[arg(long, default_value_t = 100_000)]
    pub reps: u64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long)]
    pub workers: Option<usize>,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Write the report here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    /// Aligned text, 6 significant digits.
    Table,
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodChoice {
    Mc,
    Quad,
    Both,
}

impl MethodChoice {
    fn methods(self) -> Vec<Method> {
        match self {
            MethodChoice::Mc => vec![Method::Mc],
            MethodChoice::Quad => vec![Method::Quad],
            MethodChoice::Both => vec![Method::Quad, Method::Mc],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Task {
    Estimate { data: PathBuf, k: f64 },
    Risk,
    Coverage,
    Selftest,
}

/// A fully validated run.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub task: Task,
    pub designs: Vec<Design>,
    pub estimators: Vec<Estimator>,
    pub losses: Vec<LossKind>,
    pub methods: Vec<Method>,
    pub gammas: Vec<f64>,
    pub theta: f64,
    pub reps: u64,
    pub seed: u64,
    pub workers: usize,
    pub format: Format,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    fn base(task: Task, format: Format) -> Self {
        RunConfig {
            task,
            designs: Vec::new(),
            estimators: Vec::new(),
            losses: Vec::new(),
            methods: Vec::new(),
            gammas: Vec::new(),
            theta: 1.0,
            reps: 0,
            seed: 0,
            workers: 1,
            format,
            out: None,
        }
    }

    pub fn from_cli(cli: Cli) -> Result<Self, CliError> {
        match cli.command {
            Command::Estimate(a) => {
                Design::new(a.k, 1)?;
                let mut c = Self::base(
                    Task::Estimate {
                        data: a.data,
                        k: a.k,
                    },
                    a.output.format.unwrap_or(Format::Table),
                );
                c.estimators = parse_estimators(&a.estimators)?;
                c.gammas = parse_gammas(&a.gamma)?;
                c.out = a.output.out;
                Ok(c)
            }
            Command::Risk(a) => {
                let mut c = Self::base(Task::Risk, a.output.format.unwrap_or(Format::Csv));
                c.designs = parse_grid(&a.grid)?;
                c.estimators = parse_estimators(&a.estimators)?;
                c.losses = parse_losses(&a.loss)?;
                c.methods = a.method.methods();
                c.theta = parse_theta(a.theta)?;
                c.apply_mc(&a.mc, c.methods.contains(&Method::Mc))?;
                c.out = a.output.out;
                Ok(c)
            }
            Command::Coverage(a) => {
                let mut c = Self::base(Task::Coverage, a.output.format.unwrap_or(Format::Csv));
                c.designs = parse_grid(&a.grid)?;
                c.gammas = parse_gammas(&a.gamma)?;
                c.theta = parse_theta(a.theta)?;
                c.apply_mc(&a.mc, true)?;
                c.out = a.output.out;
                Ok(c)
            }
            Command::Selftest(a) => {
                let mut c = Self::base(Task::Selftest, Format::Table);
                c.seed = a.seed;
                c.workers = resolve_workers(a.workers)?;
                c.out = a.out;
                Ok(c)
            }
        }
    }

    fn apply_mc(&mut self, mc: &McArgs, needs_reps: bool) -> Result<(), CliError> {
        if needs_reps && mc.reps < risklab::MIN_REPS {
            return Err(CliError::Usage(format!(
                "--reps must be at least {}",
                risklab::MIN_REPS
            )));
        }
        self.reps = mc.reps;
        self.seed = mc.seed;
        self.workers = resolve_workers(mc.workers)?;
        Ok(())
    }
}

fn resolve_workers(w: Option<usize>) -> Result<usize, CliError> {
    match w {
        Some(0) => Err(CliError::Usage("--workers must be positive".into())),
        Some(w) => Ok(w),
        None => Ok(default_workers()),
    }
}

fn parse_theta(theta: f64) -> Result<f64, CliError> {
    if theta > 0.0 && theta.is_finite() {
        Ok(theta)
    } else {
        Err(CliError::Usage(format!("--theta must be positive, got {theta}")))
    }
}

fn list(s: &str) -> Vec<&str> {
    s.split(',').map(str::trim).filter(|t| !t.is_empty()).collect()
}

pub fn parse_estimators(s: &str) -> Result<Vec<Estimator>, CliError> {
    let names = list(s);
    if names.is_empty() {
        return Err(CliError::Usage("no estimators requested".into()));
    }
    if names == ["all"] {
        return Ok(estimators::catalog());
    }
    Ok(names
        .into_iter()
        .map(estimators::lookup)
        .collect::<Result<_, _>>()?)
}

pub fn parse_losses(s: &str) -> Result<Vec<LossKind>, CliError> {
    let names = list(s);
    if names.is_empty() {
        return Err(CliError::Usage("no losses requested".into()));
    }
    if names == ["all"] {
        return Ok(LossKind::ALL
            .into_iter()
            .filter(|l| l.scale_exponent().is_some())
            .collect());
    }
    names
        .into_iter()
        .map(|n| {
            let loss: LossKind = n.parse()?;
            if loss.scale_exponent().is_none() {
                return Err(CliError::Usage(format!(
                    "loss `{n}` has no frequentist risk"
                )));
            }
            Ok(loss)
        })
        .collect()
}

pub fn parse_gammas(s: &str) -> Result<Vec<f64>, CliError> {
    let items = list(s);
    if items.is_empty() {
        return Err(CliError::Usage("--gamma needs at least one level".into()));
    }
    items
        .into_iter()
        .map(|t| match t.parse::<f64>() {
            Ok(g) if g > 0.0 && g < 1.0 => Ok(g),
            _ => Err(CliError::Usage(format!(
                "gamma `{t}` must be a number strictly inside (0, 1)"
            ))),
        })
        .collect()
}

pub fn parse_grid(g: &GridArgs) -> Result<Vec<Design>, CliError> {
    if let Some(spec) = &g.grid {
        if !g.n.is_empty() || !g.k.is_empty() {
            return Err(CliError::Usage("use either --grid or --n/--k".into()));
        }
        if spec.trim() == "default" {
            return Ok(risklab::default_designs());
        }
        let pairs = list(spec);
        if pairs.is_empty() {
            return Err(CliError::Usage("--grid is empty".into()));
        }
        return pairs
            .into_iter()
            .map(|p| {
                let bad = || CliError::Usage(format!("grid entry `{p}` is not of the form n:k"));
                let (n, k) = p.split_once(':').ok_or_else(bad)?;
                let n = n.trim().parse().map_err(|_| bad())?;
                let k = k.trim().parse().map_err(|_| bad())?;
                Ok(Design::new(k, n)?)
            })
            .collect();
    }
    match (g.n.is_empty(), g.k.is_empty()) {
        (true, true) => Ok(risklab::default_designs()),
        (false, false) => {
            let mut out = Vec::new();
            for &n in &g.n {
                for &k in &g.k {
                    out.push(Design::new(k, n)?);
                }
            }
            Ok(out)
        }
        _ => Err(CliError::Usage("--n and --k must be given together".into())),
    }
}

/// Parses whitespace separated decimals, ignoring everything after `#` on a line.
pub fn parse_data(text: &str, path: &str) -> Result<Vec<f64>, CliError> {
    let malformed = |reason: String| CliError::Malformed {
        path: path.to_string(),
        reason,
    };
    let mut values = Vec::new();
    for (line_no, line) in text.lines().enumerate() {
        let content = line.split('#').next().unwrap_or("");
        for token in content.split_whitespace() {
            let v: f64 = token
                .parse()
                .map_err(|_| malformed(format!("line {}: `{token}` is not a number", line_no + 1)))?;
            if !(v > 0.0 && v.is_finite()) {
                return Err(malformed(format!(
                    "line {}: observations must be positive and finite, got {token}",
                    line_no + 1
                )));
            }
            values.push(v);
        }
    }
    if values.is_empty() {
        return Err(malformed("no observations".into()));
    }
    Ok(values)
}

/// Rounds to 6 significant digits for human tables.
pub fn sig6(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let magnitude = x.abs().log10().floor() as i32;
    if (-5..=9).contains(&magnitude) {
        let decimals = (5 - magnitude).max(0) as usize;
        let s = format!("{x:.decimals$}");
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    } else {
        format!("{x:.5e}")
    }
}

fn table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let mut out = String::new();
    let mut line = |cells: &mut dyn Iterator<Item = &str>| {
        let parts: Vec<String> = cells
            .zip(&widths)
            .map(|(c, w)| format!("{c:<w$}"))
            .collect();
        out.push_str(parts.join("  ").trim_end());
        out.push('\n');
    };
    line(&mut header.iter().copied());
    for row in rows {
        line(&mut row.iter().map(String::as_str));
    }
    out
}

fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

#[derive(Debug, Serialize)]
struct EstimateJson<'a> {
    schema: &'a str,
    n: usize,
    k: f64,
    y_min: f64,
    y_max: f64,
    theta_ml: f64,
    theta_mu: f64,
    s2: f64,
    b_star: f64,
    estimates: Vec<NamedValue>,
    fiducial_mean: f64,
    fiducial_median: f64,
    intervals: Vec<IntervalRow>,
}

#[derive(Debug, Serialize)]
struct NamedValue {
    estimator: String,
    value: f64,
}

#[derive(Debug, Serialize)]
struct IntervalRow {
    gamma: f64,
    lower: f64,
    upper: f64,
}

/// Estimates, sure interval and fiducial summary for observed data.
pub fn estimate_report(
    values: &[f64],
    k: f64,
    estimators: &[Estimator],
    gammas: &[f64],
    format: Format,
) -> Result<String, CliError> {
    let design = Design::new(k, values.len())?;
    let s = SuffStat::from_sample(&Sample::new(design, values.to_vec())?)?;
    let estimates = estimators
        .iter()
        .map(|e| {
            Ok(NamedValue {
                estimator: e.name().to_string(),
                value: e.estimate(&s)?,
            })
        })
        .collect::<Result<Vec<_>, Error>>()?;
    let fid = fiducial_dist(&s);
    let intervals = gammas
        .iter()
        .map(|&gamma| {
            let (lower, upper) = confidence_interval(&s, gamma)?;
            Ok(IntervalRow { gamma, lower, upper })
        })
        .collect::<Result<Vec<_>, Error>>()?;
    let report = EstimateJson {
        schema: ESTIMATE_SCHEMA.trim_start_matches("# "),
        n: s.n(),
        k,
        y_min: s.y_min(),
        y_max: s.y_max(),
        theta_ml: s.theta_ml(),
        theta_mu: s.theta_mu(),
        s2: s.s2(),
        b_star: s.b_star(),
        estimates,
        fiducial_mean: fid.dist().mean(),
        fiducial_median: fid.dist().median(),
        intervals,
    };
    Ok(match format {
        Format::Json => json(&report),
        Format::Csv => {
            let mut out = format!("{ESTIMATE_SCHEMA}\n{ESTIMATE_COLUMNS}\n");
            let stats = [
                ("n", report.n as f64),
                ("k", k),
                ("y_min", report.y_min),
                ("y_max", report.y_max),
                ("theta_ml", report.theta_ml),
                ("theta_mu", report.theta_mu),
                ("s2", report.s2),
                ("b_star", report.b_star),
            ];
            for (name, v) in stats {
                writeln!(out, "statistic,{name},{v:?}").unwrap();
            }
            for e in &report.estimates {
                writeln!(out, "estimate,{},{:?}", e.estimator, e.value).unwrap();
            }
            writeln!(out, "fiducial,mean,{:?}", report.fiducial_mean).unwrap();
            writeln!(out, "fiducial,median,{:?}", report.fiducial_median).unwrap();
            for i in &report.intervals {
                writeln!(out, "interval_lower,{:?},{:?}", i.gamma, i.lower).unwrap();
                writeln!(out, "interval_upper,{:?},{:?}", i.gamma, i.upper).unwrap();
            }
            out
        }
        Format::Table => {
            let mut out = format!(
                "n = {}  k = {}\nsure interval [{}, {}]  s2 = {}  b* = {}\n\n",
                report.n,
                sig6(k),
                sig6(report.theta_ml),
                sig6(report.theta_mu),
                sig6(report.s2),
                sig6(report.b_star)
            );
            let rows: Vec<Vec<String>> = report
                .estimates
                .iter()
                .map(|e| vec![e.estimator.clone(), sig6(e.value)])
                .collect();
            out.push_str(&table(&["estimator", "value"], &rows));
            writeln!(
                out,
                "\nfiducial mean {}  median {}\n",
                sig6(report.fiducial_mean),
                sig6(report.fiducial_median)
            )
            .unwrap();
            let rows: Vec<Vec<String>> = report
                .intervals
                .iter()
                .map(|i| {
                    vec![
                        sig6(i.gamma),
                        sig6(1.0 - i.gamma),
                        sig6(i.lower),
                        sig6(i.upper),
                    ]
                })
                .collect();
            out.push_str(&table(&["gamma", "level", "lower", "upper"], &rows));
            out
        }
    })
}

pub fn cmd_estimate(config: &RunConfig) -> Result<String, CliError> {
    let Task::Estimate { data, k } = &config.task else {
        return Err(CliError::Usage("not an estimate run".into()));
    };
    let path = data.display().to_string();
    let text = std::fs::read_to_string(data).map_err(|e| CliError::Malformed {
        path: path.clone(),
        reason: e.to_string(),
    })?;
    let values = parse_data(&text, &path)?;
    estimate_report(&values, *k, &config.estimators, &config.gammas, config.format)
}

fn opt_cell<T: ToString>(v: Option<T>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

#[derive(Debug, Serialize)]
struct RowsJson<'a, T> {
    schema: &'a str,
    rows: &'a [T],
}

/// Risk rows for the configured grid, estimators, losses and methods.
pub fn risk_rows(config: &RunConfig) -> Result<Vec<RiskReport>, CliError> {
    let grid = ExperimentGrid {
        designs: config.designs.clone(),
        losses: config.losses.clone(),
        estimators: config.estimators.clone(),
        methods: config.methods.clone(),
        reps: config.reps,
        seed: config.seed,
        workers: config.workers,
    };
    let rows = grid.risks()?;
    if config.theta == 1.0 {
        return Ok(rows);
    }
    Ok(rows
        .iter()
        .map(|r| r.at_theta(config.theta))
        .collect::<Result<_, _>>()?)
}

pub fn render_risk(rows: &[RiskReport], format: Format) -> String {
    match format {
        Format::Json => json(&RowsJson {
            schema: RISK_SCHEMA.trim_start_matches("# "),
            rows,
        }),
        Format::Csv => {
            let mut out = format!("{RISK_SCHEMA}\n{RISK_COLUMNS}\n");
            for r in rows {
                writeln!(
                    out,
                    "{},{},{:?},{:?},{},{},{:?},{:?},{},{}",
                    r.estimator,
                    r.n,
                    r.k,
                    r.theta,
                    r.loss,
                    r.method.name(),
                    r.value,
                    r.stderr,
                    opt_cell(r.reps),
                    opt_cell(r.seed)
                )
                .unwrap();
            }
            out
        }
        Format::Table => {
            let header: Vec<&str> = RISK_COLUMNS.split(',').collect();
            let cells: Vec<Vec<String>> = rows
                .iter()
                .map(|r| {
                    vec![
                        r.estimator.clone(),
                        r.n.to_string(),
                        sig6(r.k),
                        sig6(r.theta),
                        r.loss.to_string(),
                        r.method.name().to_string(),
                        sig6(r.value),
                        sig6(r.stderr),
                        opt_cell(r.reps),
                        opt_cell(r.seed),
                    ]
                })
                .collect();
            table(&header, &cells)
        }
    }
}

pub fn cmd_risk(config: &RunConfig) -> Result<String, CliError> {
    Ok(render_risk(&risk_rows(config)?, config.format))
}

pub fn cmd_coverage(config: &RunConfig) -> Result<String, CliError> {
    let mut rows = Vec::new();
    for &design in &config.designs {
        let opts = McOptions::new(config.reps, config.seed).with_workers(config.workers);
        rows.extend(risklab::coverage_many(
            &config.gammas,
            config.theta,
            design,
            opts,
        )?);
    }
    Ok(match config.format {
        Format::Json => json(&RowsJson {
            schema: COVERAGE_SCHEMA.trim_start_matches("# "),
            rows: &rows,
        }),
        Format::Csv => {
            let mut out = format!("{COVERAGE_SCHEMA}\n{COVERAGE_COLUMNS}\n");
            for r in &rows {
                writeln!(
                    out,
                    "{:?},{:?},{},{:?},{},{},{:?},{:?},{}",
                    r.gamma, r.theta, r.n, r.k, r.reps, r.hits, r.coverage, r.stderr, r.seed
                )
                .unwrap();
            }
            out
        }
        Format::Table => {
            let header: Vec<&str> = COVERAGE_COLUMNS.split(',').collect();
            let cells: Vec<Vec<String>> = rows
                .iter()
                .map(|r| {
                    vec![
                        sig6(r.gamma),
                        sig6(r.theta),
                        r.n.to_string(),
                        sig6(r.k),
                        r.reps.to_string(),
                        r.hits.to_string(),
                        sig6(r.coverage),
                        sig6(r.stderr),
                        r.seed.to_string(),
                    ]
                })
                .collect();
            table(&header, &cells)
        }
    })
}

/// One self-test result.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    pub tolerance: f64,
    /// `true` when `measured` must stay below `tolerance`, `false` when above.
    pub upper_bound: bool,
}

impl Check {
    fn below(name: impl Into<String>, measured: f64, tolerance: f64) -> Self {
        Check {
            name: name.into(),
            measured,
            tolerance,
            upper_bound: true,
        }
    }

    fn above(name: impl Into<String>, measured: f64, tolerance: f64) -> Self {
        Check {
            name: name.into(),
            measured,
            tolerance,
            upper_bound: false,
        }
    }

    pub fn passed(&self) -> bool {
        if self.upper_bound {
            self.measured <= self.tolerance
        } else {
            self.measured >= self.tolerance
        }
    }
}

fn rel_err(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
    }
}

fn random_stat(rng: &mut ChaCha8Rng) -> Result<SuffStat, Error> {
    let n = rng.random_range(1..=40);
    let k = rng.random_range(0.02..0.98);
    let theta = 10f64.powf(rng.random_range(-3.0..3.0));
    sample_suff_stat(theta, Design::new(k, n)?, rng)
}

/// Runs every self-test check.
pub fn selftest_checks(seed: u64, workers: usize) -> Result<Vec<Check>, Error> {
    let mut checks = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let (mut opt_err, mut gm_err) = (0.0f64, 0.0f64);
    const STATS: usize = 2000;
    for _ in 0..STATS {
        let s = random_stat(&mut rng)?;
        opt_err = opt_err.max(rel_err(estimators::opt(&s), estimators::bayes_p(&s, 3.0)?));
        gm_err = gm_err.max(rel_err(
            estimators::conditional_unbiased(&s)?,
            estimators::gm(&s),
        ));
    }
    checks.push(Check::below(
        format!("opt = bayes_p(3), max rel error over {STATS} statistics"),
        opt_err,
        1e-12,
    ));
    checks.push(Check::below(
        format!("phi(s2)*y_max = gm, max rel error over {STATS} statistics"),
        gm_err,
        1e-12,
    ));

    let d = TruncPareto::new(3.0, 0.8, 1.8)?;
    let by_quad = quad::integrate(
        |t| t.ln() * d.pdf(t),
        0.8,
        1.8,
        Tolerance::new(1e-14, 1e-13),
    );
    checks.push(Check::below(
        "E ln(theta) of Pareto(3,[0.8,1.8]): closed form vs quadrature",
        (d.log_moment() - by_quad.value).abs(),
        1e-10,
    ));
    let l = (1.8f64 / 0.8).ln();
    let flipped = 0.8f64.ln() + 1.0 / 3.0 + l / (2.25f64.powi(3) - 1.0);
    checks.push(Check::above(
        "E ln(theta): opposite sign of the L/(b*^a - 1) term is rejected",
        (flipped - by_quad.value).abs(),
        1e-3,
    ));

    let design = Design::new(0.5, 5)?;
    let theta_ml = 1.3;
    let near_tie = |delta: f64| {
        SuffStat::from_extremes(
            theta_ml * (1.0 + delta) * design.lower(),
            theta_ml * design.upper(),
            design,
        )
    };
    let s = near_tie(0.0)?;
    checks.push(Check::below(
        "sc at b* = 1 equals theta_ml, rel error",
        rel_err(estimators::sc(&s), s.theta_ml()),
        1e-15,
    ));
    let mut midpoint_gap = 0.0f64;
    for delta in [1e-4, 1e-6, 1e-8] {
        let s = near_tie(delta)?;
        let ratio = (estimators::sc(&s) - s.theta_ml()) / (s.theta_mu() - s.theta_ml());
        midpoint_gap = midpoint_gap.max((ratio - 0.5).abs());
    }
    checks.push(Check::below(
        "sc as b* -> 1, |(sc - ml)/(mu - ml) - 1/2| for b* - 1 in {1e-4, 1e-6, 1e-8}",
        midpoint_gap,
        1e-3,
    ));

    let s = SuffStat::from_extremes(0.9, 1.2, Design::new(0.5, 3)?)?;
    let fid = fiducial_dist(&s);
    const DRAWS: usize = 20_000;
    let mut direct: Vec<f64> = (0..DRAWS).map(|_| fid.sample(&mut rng)).collect();
    let mut routed: Vec<f64> = (0..DRAWS)
        .map(|_| fiducial_sample_via_conditioning(&s, &mut rng))
        .collect();
    let ks = ks_two_sample(&mut direct, &mut routed);
    checks.push(Check::above(
        format!("fiducial closed form vs conditioning, two-sample KS p-value, {DRAWS} draws"),
        ks_two_sample_pvalue(ks, DRAWS, DRAWS),
        0.01,
    ));

    let bias = risklab::quad_bias(&estimators::lookup("gm")?, design)?;
    checks.push(Check::below("quadrature bias of gm at n=5, k=0.5", bias.abs(), 1e-8));

    let reps = 20_000;
    let cov = risklab::coverage_with(0.1, 1.0, design, McOptions::new(reps, seed).with_workers(workers))?;
    checks.push(Check::below(
        format!("coverage of the 90% interval at n=5, k=0.5, |cov - 0.9| in binomial se, {reps} reps"),
        (cov.coverage - 0.9).abs() / cov.stderr,
        3.0,
    ));
    Ok(checks)
}

pub fn render_checks(checks: &[Check]) -> String {
    let mut out = String::new();
    for c in checks {
        let relation = if c.upper_bound { "<=" } else { ">=" };
        writeln!(
            out,
            "{}  {}: {:.3e} {relation} {:.0e}",
            if c.passed() { "PASS" } else { "FAIL" },
            c.name,
            c.measured,
            c.tolerance
        )
        .unwrap();
    }
    let passed = checks.iter().filter(|c| c.passed()).count();
    writeln!(out, "{passed}/{} checks passed", checks.len()).unwrap();
    out
}

/// Self-test report and whether every check passed.
pub fn cmd_selftest(config: &RunConfig) -> Result<(String, bool), CliError> {
    let checks = selftest_checks(config.seed, config.workers)?;
    Ok((render_checks(&checks), checks.iter().all(Check::passed)))
}

/// Report text and exit code for a validated configuration.
pub fn run(config: &RunConfig) -> Result<(String, i32), CliError> {
    match config.task {
        Task::Estimate { .. } => Ok((cmd_estimate(config)?, EXIT_OK)),
        Task::Risk => Ok((cmd_risk(config)?, EXIT_OK)),
        Task::Coverage => Ok((cmd_coverage(config)?, EXIT_OK)),
        Task::Selftest => {
            let (text, ok) = cmd_selftest(config)?;
            Ok((text, if ok { EXIT_OK } else { EXIT_SELFTEST }))
        }
    }
}

fn deliver(text: &str, out: Option<&PathBuf>) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| CliError::Output {
            path: path.display().to_string(),
            reason: e.to_string(),
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Parses `args`, runs, writes the report and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let result = RunConfig::from_cli(cli).and_then(|config| {
        let (text, code) = run(&config)?;
        deliver(&text, config.out.as_ref())?;
        Ok(code)
    });
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_digits() {
        assert_eq!(sig6(0.8), "0.8");
        assert_eq!(sig6(1.0125313283208), "1.01253");
        assert_eq!(sig6(123456789.0), "123456789");
        assert_eq!(sig6(0.000123456789), "0.000123457");
        assert_eq!(sig6(1.5e-9), "1.50000e-9");
        assert_eq!(sig6(-2.0), "-2");
    }

    #[test]
    fn data_parsing() {
        let v = parse_data("# header\n0.9 1.2\n1.0 # trailing\n\n", "x").unwrap();
        assert_eq!(v, vec![0.9, 1.2, 1.0]);
        assert!(matches!(parse_data("1.0 abc", "x"), Err(CliError::Malformed { .. })));
        assert!(matches!(parse_data("1.0 -2", "x"), Err(CliError::Malformed { .. })));
        assert!(matches!(parse_data("# only a comment", "x"), Err(CliError::Malformed { .. })));
    }

    #[test]
    fn list_parsing() {
        assert_eq!(parse_gammas("0.1, 0.5").unwrap(), vec![0.1, 0.5]);
        assert!(parse_gammas("").is_err());
        assert!(parse_gammas("1.5").is_err());
        assert_eq!(parse_estimators("all").unwrap().len(), estimators::catalog().len());
        assert!(matches!(parse_estimators("mle,bogus"), Err(CliError::Usage(m)) if m.contains("available")));
        assert_eq!(parse_losses("all").unwrap().len(), 4);
        assert!(parse_losses("dirac").is_err());
    }

    #[test]
    fn grid_parsing() {
        let g = |grid: Option<&str>, n: Vec<usize>, k: Vec<f64>| GridArgs {
            grid: grid.map(String::from),
            n,
            k,
        };
        assert_eq!(parse_grid(&g(None, vec![], vec![])).unwrap().len(), 25);
        let d = parse_grid(&g(Some("2:0.5, 10:0.9"), vec![], vec![])).unwrap();
        assert_eq!((d[1].n(), d[1].k()), (10, 0.9));
        assert_eq!(parse_grid(&g(None, vec![2, 3], vec![0.1, 0.2, 0.3])).unwrap().len(), 6);
        assert!(parse_grid(&g(Some("2-0.5"), vec![], vec![])).is_err());
        assert!(parse_grid(&g(Some("2:1.5"), vec![], vec![])).is_err());
        assert!(parse_grid(&g(None, vec![2], vec![])).is_err());
    }

    #[test]
    fn infeasible_maps_to_its_exit_code() {
        let err = estimate_report(&[1.0, 3.1], 0.5, &estimators::catalog(), &[0.05], Format::Table)
            .unwrap_err();
        assert_eq!(err.exit_code(), EXIT_INFEASIBLE);
        assert!(err.to_string().contains("y_max/(1+k)"));
    }
}
