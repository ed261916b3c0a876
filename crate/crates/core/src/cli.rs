//! Command-line front end.
//!
//! Exit codes: 0 success, 1 validation failure, 2 bad configuration,
//! 3 bad input data, 4 numerical failure.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use crate::averages::{cumulative_growth, AveragingOptions};
use crate::dynamics::{infer_sigma, EconomyInputs, Initial, Labour, Method, SolutionPath, Solver};
use crate::error::Error;
use crate::scenarios::{Scenario, ScenarioSpec};
use crate::series::csv::{write_table, Table};
use crate::series::{RangePolicy, Series, SeriesKind};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_DATA: i32 = 3;
pub const EXIT_NUMERICAL: i32 = 4;

pub const FORWARD_COLUMNS: [&str; 12] = [
    "t",
    "Z",
    "pi",
    "K",
    "ave_sigma",
    "ave_beta",
    "bar_beta",
    "pi_mature",
    "pi_upper_bound",
    "identity13_residual",
    "beta",
    "sigma",
];

#[derive(Debug, Parser)]
#[command(name = "profit-rate", version, about = "Labour-value profit rate from growth and surplus-value histories")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Quadrature subintervals per grid segment.
    #[arg(long, global = true, default_value_t = 8)]
    pub refine: usize,
    /// Relative tolerance for the cross-method check.
    #[arg(long = "tol-rel", global = true, default_value_t = 1e-6)]
    pub tol_rel: f64,
    /// Accept σ, λ, φ outside [0, 1].
    #[arg(long, global = true)]
    pub allow_out_of_range: bool,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Seed for randomized scenarios.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output file (directory for `scenario`); stdout when absent.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
    /// Also write the JSON summary here.
    #[arg(long, global = true)]
    pub summary: Option<PathBuf>,
    /// Worker threads; 0 uses the default pool.
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve for Z, π and K with averages, mature approximation and bound.
    Forward(ForwardArgs),
    /// Recover σ from observed π and β.
    Inverse(InverseArgs),
    /// Upper bound on the profit rate, with the headline value at the end.
    Bound(EconomyArgs),
    /// Write a named scenario's input histories as CSV files.
    Scenario(ScenarioArgs),
    /// Parse and range-check inputs.
    Validate(ValidateArgs),
}

/// Histories are given as `path` or `path:column`.
#[derive(Debug, Clone, Args, Default)]
pub struct EconomyArgs {
    /// Productivity growth r (per year).
    #[arg(long)]
    pub r: Option<String>,
    /// Fraction of time worked λ.
    #[arg(long)]
    pub lambda: Option<String>,
    /// Workforce P.
    #[arg(long = "P", requires = "lambda")]
    pub workforce: Option<String>,
    /// Labour flow L = λP (value-hours per year).
    #[arg(long = "L", conflicts_with_all = ["lambda", "workforce"])]
    pub labour: Option<String>,
    /// Rate of surplus value σ.
    #[arg(long)]
    pub sigma: Option<String>,
    /// Invested share of profit φ (default 1).
    #[arg(long)]
    pub phi: Option<String>,
    /// Initial capital per worker-hour (years).
    #[arg(long, group = "initial")]
    pub z0: Option<f64>,
    /// Initial profit rate (per year).
    #[arg(long, group = "initial")]
    pub pi0: Option<f64>,
    /// Start with labour but no capital.
    #[arg(long, group = "initial")]
    pub new_economy: bool,
    /// Use a named scenario instead of input files.
    #[arg(long, conflicts_with_all = ["r", "lambda", "workforce", "labour", "sigma", "phi"])]
    pub scenario: Option<String>,
    /// Scenario parameter `name=value` (repeatable).
    #[arg(long = "param", requires = "scenario")]
    pub params: Vec<String>,
    #[arg(long, requires = "scenario")]
    pub horizon: Option<f64>,
    #[arg(long, requires = "scenario")]
    pub step: Option<f64>,
}

#[derive(Debug, Args)]
pub struct ForwardArgs {
    #[command(flatten)]
    pub economy: EconomyArgs,
    /// Route whose Z path is reported.
    #[arg(long, default_value = "averaged")]
    pub method: Method,
}

#[derive(Debug, Args)]
pub struct InverseArgs {
    #[arg(long)]
    pub pi: String,
    #[arg(long)]
    pub beta: String,
    /// σ at t = 0.
    #[arg(long)]
    pub sigma0: f64,
}

#[derive(Debug, Args)]
pub struct ScenarioArgs {
    /// constant, illustration or random.
    pub name: String,
    #[arg(long = "param")]
    pub params: Vec<String>,
    #[arg(long)]
    pub horizon: Option<f64>,
    #[arg(long)]
    pub step: Option<f64>,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[command(flatten)]
    pub economy: EconomyArgs,
    #[arg(long)]
    pub pi: Option<String>,
    #[arg(long)]
    pub beta: Option<String>,
}

/// A failed run, carrying its exit code.
#[derive(Debug)]
pub enum Failure {
    Invalid,
    Config(String),
    Data(Error),
    Numerical(Error),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Invalid => EXIT_INVALID,
            Failure::Config(_) => EXIT_CONFIG,
            Failure::Data(_) => EXIT_DATA,
            Failure::Numerical(_) => EXIT_NUMERICAL,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Invalid => write!(f, "validation failed"),
            Failure::Config(m) => write!(f, "{m}"),
            Failure::Data(e) | Failure::Numerical(e) => write!(f, "{e}"),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::NonConvergence { .. } | Error::Numerical(_) => Failure::Numerical(e),
            Error::UnknownScenario(_) | Error::Infeasible(_) => Failure::Config(e.to_string()),
            e => Failure::Data(e),
        }
    }
}

fn io_failure(path: &Path, e: io::Error) -> Failure {
    Failure::Data(Error::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

type Outcome<T> = std::result::Result<T, Failure>;

/// Parses arguments and runs; returns the process exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match run(&cli, &mut out) {
        Ok(()) => EXIT_OK,
        Err(f) => {
            if !matches!(f, Failure::Invalid) {
                eprintln!("error: {f}");
            }
            f.exit_code()
        }
    }
}

/// Runs one command, writing to `--output` or to `stdout`.
pub fn run(cli: &Cli, stdout: &mut dyn Write) -> Outcome<()> {
    let g = &cli.global;
    if g.refine == 0 {
        return Err(Failure::Config("--refine must be at least 1".into()));
    }
    if !(g.tol_rel > 0.0) {
        return Err(Failure::Config("--tol-rel must be positive".into()));
    }
    let mut buf = Vec::new();
    let outcome = with_threads(g.threads, || match &cli.command {
        Command::Forward(a) => forward(g, &a.economy, a.method, &mut buf),
        Command::Bound(a) => bound(g, a, &mut buf),
        Command::Inverse(a) => inverse(g, a, &mut buf),
        Command::Scenario(a) => scenario(g, a),
        Command::Validate(a) => validate(g, a, &mut buf),
    });
    stdout
        .write_all(&buf)
        .and_then(|()| stdout.flush())
        .map_err(|e| io_failure(Path::new("<stdout>"), e))?;
    outcome
}

#[cfg(feature = "parallel")]
fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> Outcome<T> + Send) -> Outcome<T> {
    if threads == 0 {
        return f();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Failure::Config(format!("cannot start {threads} threads: {e}")))?;
    pool.install(f)
}

#[cfg(not(feature = "parallel"))]
fn with_threads<T: Send>(_threads: usize, f: impl FnOnce() -> Outcome<T> + Send) -> Outcome<T> {
    f()
}

fn options(g: &GlobalArgs) -> AveragingOptions {
    AveragingOptions::with_refine(g.refine)
}

fn policy(g: &GlobalArgs) -> RangePolicy {
    if g.allow_out_of_range {
        RangePolicy::AllowOutOfRange
    } else {
        RangePolicy::Strict
    }
}

/// Input files actually read, by role, with their SHA-256.
#[derive(Debug, Default)]
struct Sources {
    paths: BTreeMap<String, String>,
    hashes: BTreeMap<String, String>,
}

impl Sources {
    fn read(&mut self, role: &str, spec: &str, kind: SeriesKind, policy: RangePolicy) -> Outcome<Series> {
        let (path, column) = split_column(spec);
        let bytes = fs::read(path).map_err(|e| io_failure(Path::new(path), e))?;
        let table = Table::read(bytes.as_slice(), path)?;
        self.paths.insert(role.into(), spec.into());
        self.hashes.insert(role.into(), hex::encode(Sha256::digest(&bytes)));
        Ok(table.series(column, kind, policy)?)
    }

    fn to_json(&self) -> Value {
        json!({ "paths": self.paths, "hashes": self.hashes })
    }
}

/// `file.csv:col` selects a column unless the whole string names a file.
fn split_column(spec: &str) -> (&str, Option<&str>) {
    if Path::new(spec).exists() {
        return (spec, None);
    }
    match spec.rsplit_once(':') {
        Some((path, col)) if !path.is_empty() && !col.is_empty() && !col.contains(['/', '\\']) => (path, Some(col)),
        _ => (spec, None),
    }
}

fn parse_params(params: &[String]) -> Outcome<BTreeMap<String, f64>> {
    let mut out = BTreeMap::new();
    for p in params {
        let (k, v) = p
            .split_once('=')
            .ok_or_else(|| Failure::Config(format!("--param expects name=value, got `{p}`")))?;
        let v: f64 = v
            .trim()
            .parse()
            .map_err(|_| Failure::Config(format!("--param {k}: `{v}` is not a number")))?;
        out.insert(k.trim().to_string(), v);
    }
    Ok(out)
}

fn scenario_spec(g: &GlobalArgs, name: &str, params: &[String], horizon: Option<f64>, step: Option<f64>) -> Outcome<ScenarioSpec> {
    Ok(ScenarioSpec {
        name: name.to_string(),
        parameters: parse_params(params)?,
        horizon,
        step,
        seed: g.seed.unwrap_or(0),
    })
}

fn build_scenario(spec: &ScenarioSpec) -> Outcome<Scenario> {
    spec.build().map_err(|e| match e {
        Error::NonConvergence { .. } | Error::Numerical(_) => Failure::Numerical(e),
        e => Failure::Config(e.to_string()),
    })
}

fn initial_of(a: &EconomyArgs) -> Option<Initial> {
    if let Some(z) = a.z0 {
        Some(Initial::Capital(z))
    } else if let Some(p) = a.pi0 {
        Some(Initial::ProfitRate(p))
    } else if a.new_economy {
        Some(Initial::NewEconomy)
    } else {
        None
    }
}

/// Economy inputs from files or a scenario, plus a description for the
/// summary.
struct Loaded {
    inputs: EconomyInputs,
    sources: Sources,
    scenario: Option<(ScenarioSpec, Vec<String>)>,
}

fn load_economy(g: &GlobalArgs, a: &EconomyArgs) -> Outcome<Loaded> {
    if let Some(name) = &a.scenario {
        let spec = scenario_spec(g, name, &a.params, a.horizon, a.step)?;
        let sc = build_scenario(&spec)?;
        let mut inputs = sc.inputs;
        if let Some(init) = initial_of(a) {
            inputs = EconomyInputs::new(
                inputs.r().clone(),
                inputs.labour().clone(),
                inputs.sigma().clone(),
                Some(inputs.phi().clone()),
                init,
                policy(g),
            )?;
        }
        return Ok(Loaded {
            inputs,
            sources: Sources::default(),
            scenario: Some((spec, sc.notes)),
        });
    }
    let missing = |what: &str| Failure::Config(format!("missing input: {what}"));
    let policy = policy(g);
    let mut sources = Sources::default();
    let r = sources.read("r", a.r.as_deref().ok_or_else(|| missing("--r"))?, SeriesKind::RatePerYear, policy)?;
    let labour = match (&a.labour, &a.lambda, &a.workforce) {
        (Some(l), _, _) => Labour::Total(sources.read("L", l, SeriesKind::ValueHours, policy)?),
        (None, Some(lambda), Some(p)) => Labour::Split {
            lambda: sources.read("lambda", lambda, SeriesKind::DimensionlessFraction, policy)?,
            workforce: sources.read("P", p, SeriesKind::Count, policy)?,
        },
        _ => return Err(missing("--L, or --lambda with --P")),
    };
    let sigma = sources.read(
        "sigma",
        a.sigma.as_deref().ok_or_else(|| missing("--sigma"))?,
        SeriesKind::DimensionlessFraction,
        policy,
    )?;
    let phi = match &a.phi {
        Some(p) => Some(sources.read("phi", p, SeriesKind::DimensionlessFraction, policy)?),
        None => None,
    };
    let initial = initial_of(a).ok_or_else(|| missing("one of --z0, --pi0, --new-economy"))?;
    let inputs = EconomyInputs::new(r, labour, sigma, phi, initial, policy)?;
    Ok(Loaded {
        inputs,
        sources,
        scenario: None,
    })
}

/// Finite numbers as JSON numbers, infinities as the string `"inf"`.
fn num(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else if x > 0.0 {
        json!("inf")
    } else if x < 0.0 {
        json!("-inf")
    } else {
        json!("nan")
    }
}

/// `x` rounded to three significant digits.
pub fn three_significant(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (2 - magnitude).max(0) as usize;
    format!("{x:.decimals$}")
}

fn parameters_json(g: &GlobalArgs, loaded: &Loaded, method: Option<Method>) -> Value {
    let mut p = Map::new();
    p.insert("refine".into(), json!(g.refine));
    p.insert("tol_rel".into(), json!(g.tol_rel));
    p.insert("allow_out_of_range".into(), json!(g.allow_out_of_range));
    if let Some(m) = method {
        p.insert("method".into(), json!(m.name()));
    }
    let initial = match loaded.inputs.initial() {
        Initial::Capital(z) => json!({ "z0": z }),
        Initial::ProfitRate(pi) => json!({ "pi0": pi }),
        Initial::NewEconomy => json!("new_economy"),
    };
    p.insert("initial".into(), initial);
    p.insert("z0".into(), num(loaded.inputs.z0()));
    if let Some((spec, notes)) = &loaded.scenario {
        p.insert(
            "scenario".into(),
            json!({
                "name": spec.name,
                "parameters": spec.parameters,
                "horizon": loaded.inputs.grid().span(),
                "seed": spec.seed,
                "notes": notes,
            }),
        );
    }
    Value::Object(p)
}

/// All three routes plus their mutual agreement.
struct Forward {
    chosen: SolutionPath,
    cross_dev: f64,
}

fn solve_all(inputs: &EconomyInputs, opts: &AveragingOptions, method: Method) -> Outcome<Forward> {
    let solver = Solver::new(inputs, opts)?;
    let paths = Method::ALL
        .iter()
        .map(|&m| solver.solve(m))
        .collect::<Result<Vec<_>, _>>()?;
    let mut cross_dev: f64 = 0.0;
    for i in 0..paths.len() {
        for j in i + 1..paths.len() {
            cross_dev = cross_dev.max(paths[i].max_rel_dev(&paths[j]));
        }
    }
    let chosen = paths.into_iter().find(|p| p.method == method).expect("all methods solved");
    Ok(Forward { chosen, cross_dev })
}

pub fn forward_rows(sol: &SolutionPath) -> Vec<Vec<f64>> {
    let a = &sol.averages;
    (0..sol.z.len())
        .map(|k| {
            vec![
                sol.times()[k],
                sol.z[k],
                sol.pi[k],
                sol.k[k],
                a.ave_sigma[k],
                a.ave_beta[k],
                a.bar_beta[k],
                sol.pi_mature[k],
                sol.pi_upper_bound[k],
                a.identity_residual[k],
                sol.beta[k],
                sol.sigma[k],
            ]
        })
        .collect()
}

fn emit(g: &GlobalArgs, stdout: &mut Vec<u8>, columns: &[&str], rows: &[Vec<f64>], summary: &Value) -> Outcome<()> {
    let text = serde_json::to_string_pretty(summary).expect("summary serializes") + "\n";
    if let Some(path) = &g.summary {
        fs::write(path, &text).map_err(|e| io_failure(path, e))?;
    }
    let mut buf = Vec::new();
    match g.format {
        Format::Csv => write_table(&mut buf, columns, rows).expect("write to memory"),
        Format::Json => buf.extend_from_slice(text.as_bytes()),
    }
    match &g.output {
        Some(path) => fs::write(path, &buf).map_err(|e| io_failure(path, e)),
        None => {
            stdout.extend_from_slice(&buf);
            Ok(())
        }
    }
}

fn forward(g: &GlobalArgs, a: &EconomyArgs, method: Method, stdout: &mut Vec<u8>) -> Outcome<()> {
    let loaded = load_economy(g, a)?;
    let fw = solve_all(&loaded.inputs, &options(g), method)?;
    let sol = &fw.chosen;
    let last = sol.z.len() - 1;
    let identity_max = sol.averages.identity_residual.iter().fold(0.0f64, |m, r| m.max(r.abs()));
    let summary = json!({
        "command": "forward",
        "inputs": loaded.sources.to_json(),
        "parameters": parameters_json(g, &loaded, Some(method)),
        "results": {
            "t_end": sol.times()[last],
            "Z_end": num(sol.z[last]),
            "pi_end": num(sol.pi[last]),
            "K_end": num(sol.k[last]),
            "ave_sigma_end": num(sol.averages.ave_sigma[last]),
            "ave_beta_end": num(sol.averages.ave_beta[last]),
            "bar_beta_end": num(sol.averages.bar_beta[last]),
            "pi_mature_end": num(sol.pi_mature[last]),
            "pi_upper_bound_end": num(sol.pi_upper_bound[last]),
            "averaged_fallbacks": sol.fallbacks,
            "extension": sol.extension,
        },
        "checks": {
            "bound_satisfied": sol.bound_violations() == 0,
            "identity13_max_residual": identity_max,
            "cross_method_max_rel_dev": fw.cross_dev,
            "cross_method_within_tol": fw.cross_dev <= g.tol_rel,
        },
    });
    emit(g, stdout, &FORWARD_COLUMNS, &forward_rows(sol), &summary)
}

fn bound(g: &GlobalArgs, a: &EconomyArgs, stdout: &mut Vec<u8>) -> Outcome<()> {
    // The bound does not involve the initial capital.
    let mut a = a.clone();
    a.new_economy |= initial_of(&a).is_none();
    let loaded = load_economy(g, &a)?;
    let solver = Solver::new(&loaded.inputs, &options(g))?;
    let sol = solver.solve(Method::Averaged)?;
    let growth = *cumulative_growth(solver.beta()).cum().last().unwrap();
    let last = sol.z.len() - 1;
    let t_end = sol.times()[last];
    let b = sol.pi_upper_bound[last];
    let headline = format!(
        "profit rate at t = {} yr cannot exceed {}/yr",
        three_significant(t_end),
        three_significant(b)
    );
    let rows: Vec<Vec<f64>> = sol
        .times()
        .iter()
        .zip(&sol.pi_upper_bound)
        .map(|(&t, &b)| vec![t, b])
        .collect();
    let summary = json!({
        "command": "bound",
        "inputs": loaded.sources.to_json(),
        "parameters": parameters_json(g, &loaded, None),
        "results": {
            "t_end": t_end,
            "pi_upper_bound_end": num(b),
            "headline": three_significant(b),
            "ave_beta_end": num(sol.averages.ave_beta[last]),
            "ave_sigma_end": num(sol.averages.ave_sigma[last]),
            "sigma_end": num(sol.sigma[last]),
            "capacity_ratio_end": num(growth.exp()),
        },
        "checks": {
            "bound_satisfied": sol.bound_violations() == 0,
        },
    });
    emit(g, stdout, &["t", "pi_upper_bound"], &rows, &summary)?;
    // Keep stdout clean when it carries the table.
    if g.output.is_some() {
        stdout.extend_from_slice(format!("{headline}\n").as_bytes());
    } else {
        eprintln!("{headline}");
    }
    Ok(())
}

fn inverse(g: &GlobalArgs, a: &InverseArgs, stdout: &mut Vec<u8>) -> Outcome<()> {
    let mut sources = Sources::default();
    let policy = policy(g);
    let pi = sources.read("pi", &a.pi, SeriesKind::RatePerYear, policy)?;
    let beta = sources.read("beta", &a.beta, SeriesKind::RatePerYear, policy)?;
    let inferred = infer_sigma(&pi, &beta, a.sigma0)?;
    let rows: Vec<Vec<f64>> = inferred
        .grid()
        .times()
        .iter()
        .zip(inferred.sigma.values())
        .zip(&inferred.valid)
        .map(|((&t, &s), &v)| vec![t, s, if v { 1.0 } else { 0.0 }])
        .collect();
    let invalid = inferred.valid.iter().filter(|v| !**v).count();
    let summary = json!({
        "command": "inverse",
        "inputs": sources.to_json(),
        "parameters": { "sigma0": a.sigma0, "allow_out_of_range": g.allow_out_of_range },
        "results": {
            "t_end": inferred.grid().span(),
            "sigma_end": num(*inferred.sigma.values().last().unwrap()),
            "invalid_samples": invalid,
        },
        "checks": { "all_valid": invalid == 0 },
    });
    emit(g, stdout, &["t", "sigma_inferred", "valid_flag"], &rows, &summary)
}

fn scenario(g: &GlobalArgs, a: &ScenarioArgs) -> Outcome<()> {
    let dir = g
        .output
        .as_ref()
        .ok_or_else(|| Failure::Config("scenario needs --output DIR".into()))?;
    let spec = scenario_spec(g, &a.name, &a.params, a.horizon, a.step)?;
    let sc = build_scenario(&spec)?;
    fs::create_dir_all(dir).map_err(|e| io_failure(dir, e))?;
    let inputs = &sc.inputs;
    let mut files = BTreeMap::new();
    let mut write = |name: &str, s: &Series| -> Outcome<()> {
        let path = dir.join(format!("{name}.csv"));
        let mut buf = Vec::new();
        crate::series::csv::write_series(&mut buf, s).expect("write to memory");
        fs::write(&path, buf).map_err(|e| io_failure(&path, e))?;
        files.insert(name.to_string(), path.display().to_string());
        Ok(())
    };
    write("r", inputs.r())?;
    match inputs.labour() {
        Labour::Total(l) => write("L", l)?,
        Labour::Split { lambda, workforce } => {
            write("lambda", lambda)?;
            write("P", workforce)?;
        }
    }
    write("sigma", inputs.sigma())?;
    write("phi", inputs.phi())?;
    let meta = json!({
        "command": "scenario",
        "name": sc.name,
        "parameters": spec.parameters,
        "horizon": inputs.grid().span(),
        "step": spec.step,
        "seed": spec.seed,
        "z0": inputs.z0(),
        "files": files,
        "notes": sc.notes,
    });
    let path = dir.join("scenario.json");
    let text = serde_json::to_string_pretty(&meta).expect("serializes") + "\n";
    fs::write(&path, text).map_err(|e| io_failure(&path, e))
}

fn validate(g: &GlobalArgs, a: &ValidateArgs, stdout: &mut Vec<u8>) -> Outcome<()> {
    let policy = policy(g);
    let e = &a.economy;
    let roles: [(&str, &Option<String>, SeriesKind); 8] = [
        ("r", &e.r, SeriesKind::RatePerYear),
        ("lambda", &e.lambda, SeriesKind::DimensionlessFraction),
        ("P", &e.workforce, SeriesKind::Count),
        ("L", &e.labour, SeriesKind::ValueHours),
        ("sigma", &e.sigma, SeriesKind::DimensionlessFraction),
        ("phi", &e.phi, SeriesKind::DimensionlessFraction),
        ("pi", &a.pi, SeriesKind::RatePerYear),
        ("beta", &a.beta, SeriesKind::RatePerYear),
    ];
    let mut report = String::new();
    let mut ok = true;
    let mut any = false;
    let mut sources = Sources::default();
    for (role, spec, kind) in roles {
        let Some(spec) = spec else { continue };
        any = true;
        match sources.read(role, spec, kind, policy) {
            Ok(s) => report.push_str(&format!(
                "ok    {role}: {spec} ({} samples over {} yr)\n",
                s.values().len(),
                s.span()
            )),
            Err(f) => {
                ok = false;
                report.push_str(&format!("FAIL  {role}: {f}\n"));
            }
        }
    }
    if e.scenario.is_some() {
        any = true;
        match load_economy(g, e) {
            Ok(_) => report.push_str("ok    scenario\n"),
            Err(f) => {
                ok = false;
                report.push_str(&format!("FAIL  scenario: {f}\n"));
            }
        }
    } else if ok && e.r.is_some() && e.sigma.is_some() && (e.labour.is_some() || e.workforce.is_some()) {
        let mut probe = EconomyArgs { ..Default::default() };
        probe.r = e.r.clone();
        probe.lambda = e.lambda.clone();
        probe.workforce = e.workforce.clone();
        probe.labour = e.labour.clone();
        probe.sigma = e.sigma.clone();
        probe.phi = e.phi.clone();
        probe.z0 = e.z0;
        probe.pi0 = e.pi0;
        probe.new_economy = e.new_economy || initial_of(e).is_none();
        match load_economy(g, &probe) {
            Ok(_) => report.push_str("ok    inputs combine on one grid\n"),
            Err(f) => {
                ok = false;
                report.push_str(&format!("FAIL  combined: {f}\n"));
            }
        }
    }
    if !any {
        return Err(Failure::Config("validate: no inputs given".into()));
    }
    report.push_str(if ok { "valid\n" } else { "invalid\n" });
    let target: Outcome<()> = match &g.output {
        Some(path) => fs::write(path, &report).map_err(|e| io_failure(path, e)),
        None => {
            stdout.extend_from_slice(report.as_bytes());
            Ok(())
        }
    };
    target?;
    if ok {
        Ok(())
    } else {
        Err(Failure::Invalid)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_significant_digits() {
        assert_eq!(three_significant(0.025 * 2.0 / 0.9), "0.0556");
        assert_eq!(three_significant(70.0), "70.0");
        assert_eq!(three_significant(0.123456), "0.123");
        assert_eq!(three_significant(1234.5), "1234");
    }

    #[test]
    fn column_suffix() {
        assert_eq!(split_column("out.csv:pi"), ("out.csv", Some("pi")));
        assert_eq!(split_column("dir/out.csv"), ("dir/out.csv", None));
        assert_eq!(split_column("C:/x.csv"), ("C:/x.csv", None));
    }

    #[test]
    fn params_parse() {
        let p = parse_params(&["beta0=0.05".into(), "z0 = 3".into()]).unwrap();
        assert_eq!(p["beta0"], 0.05);
        assert_eq!(p["z0"], 3.0);
        assert!(parse_params(&["x".into()]).is_err());
        assert!(parse_params(&["x=abc".into()]).is_err());
    }

    #[test]
    fn exit_codes_by_error_kind() {
        assert_eq!(Failure::from(Error::Numerical("x".into())).exit_code(), EXIT_NUMERICAL);
        assert_eq!(Failure::from(Error::NonConvergence { iterations: 1, width: 1.0 }).exit_code(), EXIT_NUMERICAL);
        assert_eq!(Failure::from(Error::Empty).exit_code(), EXIT_DATA);
        assert_eq!(Failure::from(Error::UnknownScenario("x".into())).exit_code(), EXIT_CONFIG);
    }
}
