//! Command-line front end: indicator values, counterexample checks and
//! optimization runs. Every command writes its primary result to the writer
//! passed in, so tests can drive [`run_cli`] without spawning a process.
//!
//! Numbers printed to stdout use a fixed twelve-decimal format; CSV and JSON
//! artifacts use the shortest decimal that round-trips.

// `!(x > 0.0)` style guards are there to reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod io;

use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use pareto_acq::bo::{self, Problem, RuleFamily, RuleSpec};
use pareto_acq::ehvi::{
    ehvi_exact, ehvi_mc_oracle, find_tehvi_variance_counterexample, IndependentGaussianPrediction, McEstimate,
    TehviCounterexample, VarianceSearchConfig,
};
use pareto_acq::er2i::{
    er2i_mc_oracle, er2i_objective_gaussian, er2i_quadrature, find_er2i_variance_instance, Er2iVarianceRecord,
    PointSetEnvelope, ScalarizedGaussian, VarianceRegime,
};
use pareto_acq::geometry::{decompose_dominated_region, hypervolume, Decomposition};
use pareto_acq::r2::{
    discrete_r2, discrete_r2_improvement, envelope_rows, r2_improvement_exact_2d, r2_improvement_quadrature,
    r2_value_exact_2d, r2_value_quadrature, verify_magnitude_example, verify_no_whv_example, TchebycheffParams,
    Weight, WeightDensity,
};
use pareto_acq::Error;
use serde::{Deserialize, Serialize};

use config::ConfigDocument;

pub const EXIT_OTHER: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_DIMENSION: i32 = 3;
pub const EXIT_EXACT_DIM: i32 = 4;
pub const EXIT_VERIFY: i32 = 5;
pub const EXIT_GP: i32 = 6;

pub const THREADS_ENV: &str = "PARETO_ACQ_THREADS";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn new(code: i32, message: impl Into<String>) -> Self {
        Self { code, message: message.into() }
    }

    pub fn parse(message: impl Into<String>) -> Self {
        Self::new(EXIT_PARSE, message)
    }

    pub fn dimension(message: impl Into<String>) -> Self {
        Self::new(EXIT_DIMENSION, message)
    }

    pub fn io(e: std::io::Error) -> Self {
        Self::new(EXIT_OTHER, e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        Self::new(EXIT_OTHER, e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::io(e)
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        Self::new(EXIT_OTHER, e.to_string())
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::DimensionMismatch { .. } | Error::LengthMismatch { .. } => EXIT_DIMENSION,
            Error::Config(_) | Error::InvalidWeight(_) | Error::EmptyWeights => EXIT_PARSE,
            Error::GpFit(_) => EXIT_GP,
            _ => EXIT_OTHER,
        };
        Self::new(code, e.to_string())
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

#[derive(Debug, Parser)]
#[command(name = "pareto-acq", version, about = "Hypervolume and R2 expected-improvement toolkit")]
pub struct Cli {
    /// JSON config (orientation, reference, utopian, weights, rho, ...).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory for run artifacts and persisted reports.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Hypervolume of a point set.
    Hv(HvArgs),
    /// Exact expected hypervolume improvement of a Gaussian prediction.
    Ehvi(EhviArgs),
    /// R2 value and R2 improvement.
    R2(R2Args),
    /// Expected R2 improvement under a Gaussian objective prediction.
    Er2i(Er2iArgs),
    /// Counterexample and example checks.
    Verify {
        #[command(subcommand)]
        which: Verify,
    },
    /// Runs an optimization loop from `--config`.
    Run,
}

#[derive(Debug, Args)]
pub struct HvArgs {
    pub points: PathBuf,
    /// Writes the dominated-region boxes as CSV.
    #[arg(long)]
    pub decompose: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct EhviArgs {
    pub points: PathBuf,
    #[arg(long, value_delimiter = ',', required = true)]
    pub mean: Vec<f64>,
    #[arg(long, value_delimiter = ',', required = true)]
    pub std: Vec<f64>,
    /// Adds a Monte-Carlo estimate with this many samples.
    #[arg(long)]
    pub mc: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RuleArg {
    Gauss,
    Midpoint,
    Collapsed,
    Halton,
}

impl From<RuleArg> for RuleFamily {
    fn from(r: RuleArg) -> Self {
        match r {
            RuleArg::Gauss => RuleFamily::Gauss,
            RuleArg::Midpoint => RuleFamily::Midpoint,
            RuleArg::Collapsed => RuleFamily::Collapsed,
            RuleArg::Halton => RuleFamily::Halton,
        }
    }
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("method").required(true).args(["exact2d", "quadrature", "discrete"])))]
pub struct R2Args {
    pub points: PathBuf,
    #[arg(long)]
    pub exact2d: bool,
    /// Rule size: points per axis for gauss/collapsed, cells per edge for midpoint.
    #[arg(long, value_name = "L")]
    pub quadrature: Option<usize>,
    /// K evenly spaced weights (two objectives).
    #[arg(long, value_name = "K")]
    pub discrete: Option<usize>,
    #[arg(long, value_enum, default_value = "gauss")]
    pub rule: RuleArg,
    /// Writes `lambda,h_A,h_r,gap` rows (two objectives).
    #[arg(long)]
    pub envelope: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct Er2iArgs {
    pub points: PathBuf,
    #[arg(long, value_delimiter = ',', required = true)]
    pub mean: Vec<f64>,
    #[arg(long, value_delimiter = ',', required = true)]
    pub std: Vec<f64>,
    #[arg(long, value_name = "L", required = true)]
    pub quadrature: usize,
    #[arg(long, value_enum, default_value = "gauss")]
    pub rule: RuleArg,
    #[arg(long)]
    pub mc: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Verify {
    /// Zero-area point with positive integral R2 improvement.
    NoWhv {
        #[arg(long, default_value_t = 0.5)]
        c: f64,
    },
    /// Equal reduced magnitudes, different R2 improvements.
    Magnitude,
    /// TEHVI can drop when a predictive std widens.
    TehviVariance {
        #[arg(long, default_value_t = 20_000)]
        trials: usize,
        /// Re-checks a stored report instead of searching.
        #[arg(long)]
        load: Option<PathBuf>,
    },
    /// Objective-Gaussian ER2I responds to a wider std with either sign.
    Er2iVariance {
        #[arg(long, default_value_t = 20_000)]
        trials: usize,
        #[arg(long)]
        load: Option<PathBuf>,
    },
}

/// Fixed-format number used for every stdout value.
pub fn fmt12(v: f64) -> String {
    format!("{v:.12}")
}

/// Thread count from the environment; unset means 0 (all cores).
pub fn threads_from_env() -> Result<usize, CliError> {
    match std::env::var(THREADS_ENV) {
        Ok(s) => s.trim().parse().map_err(|_| CliError::parse(format!("{THREADS_ENV}={s:?} is not a count"))),
        Err(_) => Ok(0),
    }
}

/// Parses `args` (program name first) and executes the command.
pub fn run_cli<I, T>(args: I, out: &mut dyn Write) -> Result<(), CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| CliError::parse(e.to_string()))?;
    execute(&cli, out)
}

pub fn execute(cli: &Cli, out: &mut dyn Write) -> Result<(), CliError> {
    let doc = match &cli.config {
        Some(p) => ConfigDocument::load(p)?,
        None => ConfigDocument::default(),
    };
    match &cli.command {
        Command::Hv(a) => cmd_hv(&doc, a, out),
        Command::Ehvi(a) => cmd_ehvi(&doc, a, cli.seed, out),
        Command::R2(a) => cmd_r2(&doc, a, out),
        Command::Er2i(a) => cmd_er2i(&doc, a, cli.seed, out),
        Command::Verify { which } => cmd_verify(which, cli.seed, cli.out.as_deref(), out),
        Command::Run => {
            if cli.config.is_none() {
                return Err(CliError::parse("`run` needs --config"));
            }
            let dir = cli.out.as_deref().ok_or_else(|| CliError::parse("`run` needs --out"))?;
            cmd_run(&doc, cli.seed, dir, out)
        }
    }
}

/// Points in minimization orientation, and their dimension. Without a
/// config the reference defaults to all ones and the utopian point to zero.
struct Inputs {
    points: Vec<Vec<f64>>,
    m: usize,
    params: TchebycheffParams,
}

fn load_inputs(doc: &ConfigDocument, path: &Path, fallback_m: Option<usize>) -> Result<Inputs, CliError> {
    let file = io::read_points(path)?;
    let m = file
        .dim
        .or(doc.reference.as_ref().map(Vec::len))
        .or(doc.utopian.as_ref().map(Vec::len))
        .or(fallback_m)
        .unwrap_or(2);
    let reference = if doc.reference.is_some() { doc.reference_min(m)? } else { vec![1.0; m] };
    let utopian = doc.utopian_min(m)?;
    let params = TchebycheffParams::new(utopian, reference)?;
    let points = file.points.iter().map(|p| doc.orientation.to_min(p)).collect();
    Ok(Inputs { points, m, params })
}

fn prediction(doc: &ConfigDocument, mean: &[f64], std: &[f64], m: usize) -> Result<IndependentGaussianPrediction, CliError> {
    if mean.len() != m || std.len() != m {
        return Err(CliError::dimension(format!(
            "--mean/--std have {}/{} entries, points have {m}",
            mean.len(),
            std.len()
        )));
    }
    if std.iter().any(|s| !(*s >= 0.0)) {
        return Err(CliError::parse("--std entries must be nonnegative"));
    }
    Ok(IndependentGaussianPrediction::from_mean_std(&doc.orientation.to_min(mean), std))
}

fn print_mc(out: &mut dyn Write, e: &McEstimate) -> Result<(), CliError> {
    writeln!(out, "mc {} se {}", fmt12(e.estimate), fmt12(e.standard_error))?;
    Ok(())
}

fn cmd_hv(doc: &ConfigDocument, a: &HvArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let inp = load_inputs(doc, &a.points, None)?;
    let r = &inp.params.reference;
    let hv = if inp.points.is_empty() { 0.0 } else { hypervolume(&inp.points, r)? };
    writeln!(out, "{}", fmt12(hv))?;
    if let Some(path) = &a.decompose {
        let region = decompose_dominated_region(&inp.points, r)?;
        if !region.clipped.is_empty() {
            eprintln!("clipped to reference box: rows {:?}", region.clipped);
        }
        let mut w = csv::Writer::from_writer(io::create(path)?);
        let mut header = vec!["sign".to_string()];
        header.extend((1..=inp.m).map(|j| format!("lower{j}")));
        header.extend((1..=inp.m).map(|j| format!("upper{j}")));
        w.write_record(&header)?;
        let rows: Vec<(f64, &pareto_acq::geometry::AxisBox)> = match &region.parts {
            Decomposition::Disjoint(b) => b.iter().map(|b| (1.0, b)).collect(),
            Decomposition::Signed(s) => s.iter().map(|s| (s.sign, &s.cell)).collect(),
        };
        for (sign, b) in rows {
            let mut rec = vec![sign.to_string()];
            rec.extend(b.lower.iter().chain(&b.upper).map(|v| v.to_string()));
            w.write_record(&rec)?;
        }
        w.flush()?;
    }
    Ok(())
}

fn cmd_ehvi(doc: &ConfigDocument, a: &EhviArgs, seed: Option<u64>, out: &mut dyn Write) -> Result<(), CliError> {
    let inp = load_inputs(doc, &a.points, Some(a.mean.len()))?;
    let pred = prediction(doc, &a.mean, &a.std, inp.m)?;
    let r = &inp.params.reference;
    writeln!(out, "ehvi {}", fmt12(ehvi_exact(&pred, &inp.points, r)?))?;
    if let Some(n) = a.mc {
        print_mc(out, &ehvi_mc_oracle(&pred, &inp.points, r, n, seed.or(doc.seed).unwrap_or(0))?)?;
    }
    Ok(())
}

fn density(doc: &ConfigDocument) -> WeightDensity {
    doc.rho.as_ref().map(|r| r.build()).unwrap_or(WeightDensity::Uniform)
}

fn cmd_r2(doc: &ConfigDocument, a: &R2Args, out: &mut dyn Write) -> Result<(), CliError> {
    let inp = load_inputs(doc, &a.points, None)?;
    let (pts, p, m) = (&inp.points, &inp.params, inp.m);
    let rho = density(doc);
    if (a.exact2d || a.envelope.is_some()) && m != 2 {
        return Err(CliError::new(EXIT_EXACT_DIM, format!("exact two-objective path requested with {m} objectives")));
    }
    let (value, improvement) = if pts.is_empty() {
        // h_∅ = +∞: nothing achieved yet, nothing to improve on.
        (f64::INFINITY, 0.0)
    } else if a.exact2d {
        (r2_value_exact_2d(pts, p, &rho)?, r2_improvement_exact_2d(pts, p, &rho)?)
    } else if let Some(l) = a.quadrature {
        let rule = RuleSpec { family: a.rule.into(), size: l }.build(m)?;
        (r2_value_quadrature(pts, p, &rho, &rule)?, r2_improvement_quadrature(pts, p, &rho, &rule)?)
    } else {
        let k = a.discrete.unwrap_or(0);
        if m != 2 {
            return Err(CliError::dimension("--discrete K spaces weights on the two-objective simplex"));
        }
        if k == 0 {
            return Err(CliError::parse("--discrete needs K ≥ 1"));
        }
        let w = Weight::uniform_bi(k);
        (discrete_r2(pts, &w, p)?, discrete_r2_improvement(pts, &w, p)?)
    };
    writeln!(out, "r2 {}", fmt12(value))?;
    writeln!(out, "improvement {}", fmt12(improvement))?;
    if let Some(path) = &a.envelope {
        if pts.is_empty() {
            return Err(CliError::new(EXIT_OTHER, "no envelope for an empty point set"));
        }
        let mut w = csv::Writer::from_writer(io::create(path)?);
        for row in envelope_rows(pts, p, 200)? {
            w.serialize(row)?;
        }
        w.flush()?;
    }
    Ok(())
}

fn cmd_er2i(doc: &ConfigDocument, a: &Er2iArgs, seed: Option<u64>, out: &mut dyn Write) -> Result<(), CliError> {
    let inp = load_inputs(doc, &a.points, Some(a.mean.len()))?;
    if inp.points.is_empty() {
        return Err(Error::EmptySet.into());
    }
    let pred = prediction(doc, &a.mean, &a.std, inp.m)?;
    let (pts, p) = (&inp.points, &inp.params);
    let rho = density(doc);
    let rule = RuleSpec { family: a.rule.into(), size: a.quadrature }.build(inp.m)?;
    let objective = er2i_objective_gaussian(&pred, pts, p, &rho, &rule)?;
    let surr = ScalarizedGaussian { prediction: pred.clone(), params: p.clone() };
    let achievement = er2i_quadrature(&surr, &PointSetEnvelope { points: pts, params: p }, &rho, &rule);
    writeln!(out, "er2i_objective {}", fmt12(objective))?;
    writeln!(out, "er2i_achievement {}", fmt12(achievement))?;
    if let Some(n) = a.mc {
        print_mc(out, &er2i_mc_oracle(&pred, pts, p, &rho, &rule, n, seed.or(doc.seed).unwrap_or(0))?)?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoWhvOutput {
    pub c: f64,
    pub hv: f64,
    pub i_r2: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TehviVarianceOutput {
    pub counterexample: TehviCounterexample,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Er2iVarianceOutput {
    pub negative: Er2iVarianceRecord,
    pub positive: Er2iVarianceRecord,
    pub pass: bool,
}

/// Stored values must reproduce to this tolerance when reloaded.
const REPLAY_TOL: f64 = 1e-9;

fn tehvi_holds(c: &TehviCounterexample) -> Result<bool, CliError> {
    let (hi, lo) = c.reevaluate()?;
    Ok(lo < hi && (hi - c.tehvi_hi).abs() <= REPLAY_TOL && (lo - c.tehvi_lo).abs() <= REPLAY_TOL)
}

fn er2i_record_holds(r: &Er2iVarianceRecord) -> Result<bool, CliError> {
    let (v0, v1) = r.reevaluate()?;
    let replay = Er2iVarianceRecord { value_at_sigma: v0, value_at_sigma_prime: v1, ..r.clone() };
    Ok(replay.holds(0.0)
        && (v0 - r.value_at_sigma).abs() <= REPLAY_TOL
        && (v1 - r.value_at_sigma_prime).abs() <= REPLAY_TOL)
}

fn load_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::parse(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::parse(format!("{}: {e}", path.display())))
}

fn emit_report<T: Serialize>(
    report: &T,
    pass: bool,
    name: &str,
    dir: Option<&Path>,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(report)?;
    writeln!(out, "{text}")?;
    if let Some(d) = dir {
        std::fs::create_dir_all(d)?;
        std::fs::write(d.join(name), format!("{text}\n"))?;
    }
    if pass {
        Ok(())
    } else {
        Err(CliError::new(EXIT_VERIFY, format!("{name}: asserted relation does not hold")))
    }
}

fn cmd_verify(which: &Verify, seed: Option<u64>, dir: Option<&Path>, out: &mut dyn Write) -> Result<(), CliError> {
    let seed = seed.unwrap_or(0);
    match which {
        Verify::NoWhv { c } => {
            let r = verify_no_whv_example(*c).map_err(|e| CliError::parse(e.to_string()))?;
            let o = NoWhvOutput { c: r.c, hv: r.hv_contribution, i_r2: r.r2_improvement, pass: r.pass };
            emit_report(&o, o.pass, "no_whv.json", dir, out)
        }
        Verify::Magnitude => {
            let r = verify_magnitude_example()?;
            emit_report(&r, r.pass, "magnitude.json", dir, out)
        }
        Verify::TehviVariance { trials, load } => {
            let counterexample = match load {
                Some(p) => load_json::<TehviVarianceOutput>(p)?.counterexample,
                None => find_tehvi_variance_counterexample(&VarianceSearchConfig {
                    trials: *trials,
                    seed,
                    ..Default::default()
                })
                .map_err(|e| CliError::new(EXIT_VERIFY, e.to_string()))?,
            };
            let pass = tehvi_holds(&counterexample)?;
            emit_report(&TehviVarianceOutput { counterexample, pass }, pass, "tehvi_variance.json", dir, out)
        }
        Verify::Er2iVariance { trials, load } => {
            let (negative, positive) = match load {
                Some(p) => {
                    let o: Er2iVarianceOutput = load_json(p)?;
                    (o.negative, o.positive)
                }
                None => {
                    let find = |reg| {
                        find_er2i_variance_instance(reg, *trials, seed)
                            .map_err(|e| CliError::new(EXIT_VERIFY, e.to_string()))
                    };
                    (find(VarianceRegime::Negative)?, find(VarianceRegime::Positive)?)
                }
            };
            let pass = negative.regime == VarianceRegime::Negative
                && positive.regime == VarianceRegime::Positive
                && er2i_record_holds(&negative)?
                && er2i_record_holds(&positive)?;
            emit_report(&Er2iVarianceOutput { negative, positive, pass }, pass, "er2i_variance.json", dir, out)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunHeader {
    pub problem: String,
    pub mode: bo::Mode,
    pub seed: u64,
    pub weights: Vec<Weight>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub problem: String,
    pub mode: bo::Mode,
    pub seed: u64,
    pub budget: usize,
    pub evaluations: usize,
    pub final_trace: Option<bo::TraceRow>,
    pub error: Option<String>,
}

/// Writes `history.jsonl` (a header line, then one line per evaluation),
/// `traces.csv`, `points.csv` and `summary.json` into `dir`.
pub fn write_run_artifacts(dir: &Path, outcome: &bo::RunOutcome, budget: usize) -> Result<(), CliError> {
    std::fs::create_dir_all(dir)?;
    let h = &outcome.history;
    let mut hist = std::io::BufWriter::new(io::create(&dir.join("history.jsonl"))?);
    let header = RunHeader { problem: h.problem.clone(), mode: h.mode, seed: h.seed, weights: h.weights.clone() };
    writeln!(hist, "{}", serde_json::to_string(&header)?)?;
    for rec in &h.records {
        writeln!(hist, "{}", serde_json::to_string(rec)?)?;
    }
    hist.flush()?;

    let mut tr = csv::Writer::from_writer(io::create(&dir.join("traces.csv"))?);
    for row in &h.traces {
        tr.serialize(row)?;
    }
    tr.flush()?;

    let pts = h.points();
    let m = pts.first().map_or(0, Vec::len);
    io::write_points(io::create(&dir.join("points.csv"))?, m, &pts)?;

    let summary = RunSummary {
        problem: h.problem.clone(),
        mode: h.mode,
        seed: h.seed,
        budget,
        evaluations: h.records.len(),
        final_trace: h.last_trace().cloned(),
        error: outcome.error.as_ref().map(|e| e.to_string()),
    };
    std::fs::write(dir.join("summary.json"), format!("{}\n", serde_json::to_string_pretty(&summary)?))?;
    Ok(())
}

fn cmd_run(doc: &ConfigDocument, seed: Option<u64>, dir: &Path, out: &mut dyn Write) -> Result<(), CliError> {
    let problem = Problem::by_name(doc.problem.as_deref().unwrap_or("quadratic_front"))?;
    let cfg = doc.to_run_config(seed, threads_from_env()?)?;
    cfg.validate(&problem)?;
    let outcome = bo::run(&problem, &cfg)?;
    write_run_artifacts(dir, &outcome, cfg.budget)?;
    if let Some(e) = outcome.error {
        return Err(CliError::new(EXIT_GP, format!("{e}; partial artifacts written to {}", dir.display())));
    }
    if let Some(t) = outcome.history.last_trace() {
        writeln!(out, "evaluations {}", t.evaluations)?;
        writeln!(out, "discrete_r2 {}", fmt12(t.discrete_r2))?;
        writeln!(out, "hv {}", fmt12(t.hv))?;
    }
    Ok(())
}
