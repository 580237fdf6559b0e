//! Sequential optimization loops: discrete (or quadrature-weighted)
//! achievement-space ER2I and an EHVI baseline.

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::ehvi::{ehvi_exact, IndependentGaussianPrediction};
use crate::er2i::{er2i_weighted, DiscreteEnvelope};
use crate::error::{Error, Result};
use crate::gaussian::Gaussian1D;
use crate::geometry::{hypervolume, pareto_filter_indices};
use crate::gp::{select_hyperparameters, select_shared_hyperparameters, GpModel, Kernel};
use crate::r2::{
    r2_value_exact_2d, tcheby_value, PiecewiseQuadratic, SimplexQuadratureRule, TchebycheffParams, Weight,
    WeightDensity,
};
use crate::sampling::{latin_hypercube, rng};

type Evaluator = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

/// A deterministic vector-valued black box on a box, minimization orientation.
#[derive(Clone)]
pub struct Problem {
    pub name: String,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub objectives: usize,
    evaluator: Evaluator,
}

impl fmt::Debug for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Problem")
            .field("name", &self.name)
            .field("lower", &self.lower)
            .field("upper", &self.upper)
            .field("objectives", &self.objectives)
            .finish()
    }
}

impl Problem {
    pub fn new<F>(name: &str, lower: Vec<f64>, upper: Vec<f64>, objectives: usize, f: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        if lower.len() != upper.len() {
            return Err(Error::DimensionMismatch { expected: lower.len(), got: upper.len() });
        }
        if lower.is_empty() || lower.iter().zip(&upper).any(|(l, u)| !(l < u)) {
            return Err(Error::Config("design box must be nondegenerate".into()));
        }
        Ok(Self { name: name.into(), lower, upper, objectives, evaluator: Arc::new(f) })
    }

    /// `f(x) = (x², (1 - x)²)` on `[0, 1]`.
    pub fn quadratic_front() -> Self {
        Self::new("quadratic_front", vec![0.0], vec![1.0], 2, |x| vec![x[0] * x[0], (1.0 - x[0]) * (1.0 - x[0])])
            .expect("valid box")
    }

    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "quadratic_front" => Ok(Self::quadratic_front()),
            other => Err(Error::Config(format!("unknown problem `{other}`"))),
        }
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn evaluate(&self, x: &[f64]) -> Vec<f64> {
        (self.evaluator)(x)
    }

    /// `n` front points `f(i / (n - 1))` of the one-dimensional benchmark.
    pub fn dense_front(&self, n: usize) -> Vec<Vec<f64>> {
        (0..n)
            .map(|i| {
                let t = i as f64 / (n - 1).max(1) as f64;
                let x: Vec<f64> = self.lower.iter().zip(&self.upper).map(|(l, u)| l + t * (u - l)).collect();
                self.evaluate(&x)
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    DiscreteEr2i,
    QuadratureEr2i,
    Ehvi,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RuleFamily {
    Gauss,
    Midpoint,
    Collapsed,
    Halton,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RuleSpec {
    #[serde(default = "default_family")]
    pub family: RuleFamily,
    /// Gauss/collapsed: points per axis; midpoint: cells per edge; Halton: point count.
    pub size: usize,
}

fn default_family() -> RuleFamily {
    RuleFamily::Gauss
}

impl RuleSpec {
    pub fn build(&self, m: usize) -> Result<SimplexQuadratureRule> {
        if self.size == 0 {
            return Err(Error::Config("rule size must be positive".into()));
        }
        match self.family {
            RuleFamily::Gauss if m == 2 => Ok(SimplexQuadratureRule::gauss_legendre(self.size)),
            RuleFamily::Gauss | RuleFamily::Collapsed => Ok(SimplexQuadratureRule::collapsed_gauss(m, self.size)),
            RuleFamily::Midpoint => SimplexQuadratureRule::subdivision(m, self.size),
            RuleFamily::Halton => SimplexQuadratureRule::halton(m, self.size),
        }
    }
}

/// Weight set: explicit list, `{"uniform": K}` (two objectives) or a rule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum WeightSpec {
    Explicit(Vec<Weight>),
    Uniform { uniform: usize },
    Rule { rule: RuleSpec },
}

impl Default for WeightSpec {
    fn default() -> Self {
        WeightSpec::Uniform { uniform: 11 }
    }
}

/// Density on the simplex: `"uniform"` or `{"piecewise": {...}}`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DensitySpec {
    #[default]
    Uniform,
    Piecewise(PiecewiseQuadratic),
}

impl DensitySpec {
    pub fn build(&self) -> WeightDensity {
        match self {
            DensitySpec::Uniform => WeightDensity::Uniform,
            DensitySpec::Piecewise(p) => WeightDensity::Piecewise(p.clone()),
        }
    }
}

/// Weights with their acquisition coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightPlan {
    pub weights: Vec<Weight>,
    pub coeffs: Vec<f64>,
}

impl WeightSpec {
    /// Discrete sets get coefficients `1/K`; rules get `w_ℓ ρ(λ_ℓ)`.
    pub fn plan(&self, m: usize, rho: &WeightDensity) -> Result<WeightPlan> {
        let weights = match self {
            WeightSpec::Explicit(w) => w.clone(),
            WeightSpec::Uniform { uniform } => {
                if m != 2 {
                    return Err(Error::Config("`uniform` weights need two objectives".into()));
                }
                if *uniform == 0 {
                    return Err(Error::EmptyWeights);
                }
                Weight::uniform_bi(*uniform)
            }
            WeightSpec::Rule { rule } => {
                let r = rule.build(m)?;
                let coeffs = r.nodes.iter().zip(&r.weights).map(|(n, w)| w * rho.eval(n)).collect();
                return Ok(WeightPlan { weights: r.nodes, coeffs });
            }
        };
        if weights.is_empty() {
            return Err(Error::EmptyWeights);
        }
        if let Some(w) = weights.iter().find(|w| w.dim() != m) {
            return Err(Error::DimensionMismatch { expected: m, got: w.dim() });
        }
        let k = weights.len() as f64;
        Ok(WeightPlan { coeffs: vec![1.0 / k; weights.len()], weights })
    }
}

/// Hyperparameter grid: isotropic lengths given as fractions of the
/// largest box side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub signal_variances: Vec<f64>,
    pub length_scales: Vec<f64>,
    pub noise_variances: Vec<f64>,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            signal_variances: vec![0.5, 1.0, 2.0],
            length_scales: vec![0.05, 0.1, 0.2, 0.35, 0.6, 1.0],
            noise_variances: vec![1e-6],
        }
    }
}

impl GridSpec {
    pub fn kernels(&self, problem: &Problem) -> Result<Vec<Kernel>> {
        let width = problem.lower.iter().zip(&problem.upper).map(|(l, u)| u - l).fold(0.0, f64::max);
        let lengths: Vec<f64> = self.length_scales.iter().map(|l| l * width).collect();
        Kernel::grid(problem.dim(), &self.signal_variances, &lengths, &self.noise_variances)
    }
}

fn default_search_budget() -> usize {
    1000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub mode: Mode,
    #[serde(default)]
    pub weights: WeightSpec,
    #[serde(default)]
    pub rho: DensitySpec,
    pub utopian: Vec<f64>,
    pub reference: Vec<f64>,
    pub budget: usize,
    pub n_initial: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_search_budget")]
    pub search_budget: usize,
    #[serde(default)]
    pub grid: GridSpec,
    /// Worker threads for acquisition search; 0 = available parallelism.
    #[serde(default)]
    pub threads: usize,
}

impl RunConfig {
    /// Benchmark settings: `z⁺ = 0`, `r = (1, 1)`, eleven uniform weights.
    pub fn benchmark(mode: Mode, budget: usize, seed: u64) -> Self {
        Self {
            mode,
            weights: WeightSpec::default(),
            rho: DensitySpec::Uniform,
            utopian: vec![0.0, 0.0],
            reference: vec![1.0, 1.0],
            budget,
            n_initial: 5,
            seed,
            search_budget: default_search_budget(),
            grid: GridSpec::default(),
            threads: 1,
        }
    }

    pub fn validate(&self, problem: &Problem) -> Result<()> {
        let m = problem.objectives;
        if self.utopian.len() != m {
            return Err(Error::DimensionMismatch { expected: m, got: self.utopian.len() });
        }
        if self.reference.len() != m {
            return Err(Error::DimensionMismatch { expected: m, got: self.reference.len() });
        }
        if self.n_initial == 0 || self.budget < self.n_initial {
            return Err(Error::Config(format!(
                "need budget ≥ n_initial ≥ 1 (budget {}, n_initial {})",
                self.budget, self.n_initial
            )));
        }
        if self.search_budget == 0 {
            return Err(Error::Config("search_budget must be positive".into()));
        }
        if self.mode == Mode::Ehvi && m != 2 {
            return Err(Error::Config("the EHVI loop supports two objectives".into()));
        }
        Ok(())
    }

    fn params(&self) -> TchebycheffParams {
        TchebycheffParams { utopian: self.utopian.clone(), reference: self.reference.clone() }
    }
}

/// One evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    /// 0 for the initial design, then 1, 2, ...
    pub iteration: usize,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    /// `g_{λ_k}(y; z⁺)` per weight (empty in EHVI mode).
    pub achievements: Vec<f64>,
    /// Envelope `h_{n,k}` after this evaluation (empty in EHVI mode).
    pub envelope: Vec<f64>,
    /// Entries of the envelope lowered by this evaluation.
    pub improved: usize,
    /// Acquisition value at `x` (absent for initial designs).
    pub acquisition: Option<f64>,
}

/// Indicator values after an iteration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub iteration: usize,
    pub evaluations: usize,
    pub discrete_r2: f64,
    pub discrete_r2_improvement: f64,
    pub exact_r2: Option<f64>,
    pub hv: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunHistory {
    pub problem: String,
    pub mode: Mode,
    pub seed: u64,
    pub weights: Vec<Weight>,
    pub records: Vec<IterationRecord>,
    pub traces: Vec<TraceRow>,
}

impl RunHistory {
    pub fn points(&self) -> Vec<Vec<f64>> {
        self.records.iter().map(|r| r.y.clone()).collect()
    }

    pub fn last_trace(&self) -> Option<&TraceRow> {
        self.traces.last()
    }
}

/// A finished or aborted run; `error` is set when a GP fit failed midway.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub history: RunHistory,
    pub error: Option<Error>,
}

/// Entry-wise minimum update; returns how many entries decreased.
pub fn update_envelopes(env: &mut DiscreteEnvelope, achievements: &[f64]) -> Result<usize> {
    env.update(achievements)
}

fn threads_for(requested: usize) -> usize {
    if requested > 0 {
        requested
    } else {
        std::thread::available_parallelism().map_or(1, |n| n.get())
    }
}

/// Multistart random search: `budget / 2` uniform candidates, then
/// coordinate refinement around the incumbent with halving steps until the
/// budget is spent. The first probe attaining the maximum wins, so the result
/// is deterministic for a given seed regardless of `threads`.
pub fn propose_next<F>(acquisition: F, lower: &[f64], upper: &[f64], budget: usize, seed: u64, threads: usize) -> (Vec<f64>, f64)
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let d = lower.len();
    let mut g = rng(seed);
    let n_uniform = (budget / 2).max(1);
    let candidates: Vec<Vec<f64>> = (0..n_uniform)
        .map(|_| (0..d).map(|j| lower[j] + g.random::<f64>() * (upper[j] - lower[j])).collect())
        .collect();
    let values = evaluate_all(&acquisition, &candidates, threads_for(threads));
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v > values[best] {
            best = i;
        }
    }
    let mut x = candidates[best].clone();
    let mut fx = values[best];
    let mut spent = n_uniform;
    let mut step: Vec<f64> = lower.iter().zip(upper).map(|(l, u)| 0.25 * (u - l)).collect();
    while spent < budget {
        let mut moved = false;
        for j in 0..d {
            for dir in [1.0, -1.0] {
                if spent >= budget {
                    break;
                }
                let mut y = x.clone();
                y[j] = (y[j] + dir * step[j]).clamp(lower[j], upper[j]);
                spent += 1;
                let fy = acquisition(&y);
                if fy > fx {
                    x = y;
                    fx = fy;
                    moved = true;
                }
            }
        }
        if !moved {
            step.iter_mut().for_each(|s| *s *= 0.5);
            if step.iter().zip(lower.iter().zip(upper)).all(|(s, (l, u))| *s < 1e-12 * (u - l)) {
                break;
            }
        }
    }
    (x, fx)
}

fn evaluate_all<F>(f: &F, xs: &[Vec<f64>], threads: usize) -> Vec<f64>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    if threads <= 1 || xs.len() < 64 {
        return xs.iter().map(|x| f(x)).collect();
    }
    let chunk = xs.len().div_ceil(threads);
    std::thread::scope(|s| {
        let handles: Vec<_> =
            xs.chunks(chunk).map(|c| s.spawn(move || c.iter().map(|x| f(x)).collect::<Vec<f64>>())).collect();
        handles.into_iter().flat_map(|h| h.join().expect("acquisition worker panicked")).collect()
    })
}

fn achievements(y: &[f64], weights: &[Weight], p: &TchebycheffParams) -> Vec<f64> {
    weights.iter().map(|w| tcheby_value(y, w, p)).collect()
}

fn trace(iteration: usize, points: &[Vec<f64>], plan: &WeightPlan, env: &[f64], p: &TchebycheffParams) -> Result<TraceRow> {
    let k = env.len() as f64;
    let discrete_r2 = env.iter().sum::<f64>() / k;
    let discrete_r2_improvement = plan
        .weights
        .iter()
        .zip(env)
        .map(|(w, h)| (tcheby_value(&p.reference, w, p) - h).max(0.0))
        .sum::<f64>()
        / k;
    let exact_r2 = if p.dim() == 2 { Some(r2_value_exact_2d(points, p, &WeightDensity::Uniform)?) } else { None };
    Ok(TraceRow {
        iteration,
        evaluations: points.len(),
        discrete_r2,
        discrete_r2_improvement,
        exact_r2,
        hv: hypervolume(points, &p.reference)?,
    })
}

fn initial_design(problem: &Problem, cfg: &RunConfig) -> Vec<Vec<f64>> {
    let mut g = rng(cfg.seed);
    latin_hypercube(&mut g, cfg.n_initial, &problem.lower, &problem.upper)
}

/// Seed for the acquisition search of iteration `it`.
fn search_seed(seed: u64, it: usize) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(it as u64 + 1)
}

/// Evaluated designs and bookkeeping shared by both loops.
struct LoopState<'a> {
    problem: &'a Problem,
    plan: WeightPlan,
    params: TchebycheffParams,
    env: DiscreteEnvelope,
    xs: Vec<Vec<f64>>,
    ys: Vec<Vec<f64>>,
    /// Achievement rows `z_{i·}`.
    z: Vec<Vec<f64>>,
    history: RunHistory,
    keep_achievements: bool,
}

impl<'a> LoopState<'a> {
    fn new(problem: &'a Problem, cfg: &RunConfig) -> Result<Self> {
        cfg.validate(problem)?;
        let params = cfg.params();
        let plan = cfg.weights.plan(problem.objectives, &cfg.rho.build())?;
        let env = DiscreteEnvelope::from_points(&[], plan.weights.clone(), &params)?;
        let history = RunHistory {
            problem: problem.name.clone(),
            mode: cfg.mode,
            seed: cfg.seed,
            weights: plan.weights.clone(),
            records: Vec::new(),
            traces: Vec::new(),
        };
        Ok(Self {
            problem,
            plan,
            params,
            env,
            xs: Vec::new(),
            ys: Vec::new(),
            z: Vec::new(),
            history,
            keep_achievements: cfg.mode != Mode::Ehvi,
        })
    }

    fn evaluate(&mut self, x: Vec<f64>, iteration: usize, acquisition: Option<f64>) -> Result<()> {
        let y = self.problem.evaluate(&x);
        if y.len() != self.problem.objectives {
            return Err(Error::DimensionMismatch { expected: self.problem.objectives, got: y.len() });
        }
        let a = achievements(&y, &self.plan.weights, &self.params);
        let improved = update_envelopes(&mut self.env, &a)?;
        let (achievements, envelope) =
            if self.keep_achievements { (a.clone(), self.env.values.clone()) } else { (Vec::new(), Vec::new()) };
        self.history.records.push(IterationRecord {
            iteration,
            x: x.clone(),
            y: y.clone(),
            achievements,
            envelope,
            improved,
            acquisition,
        });
        self.xs.push(x);
        self.ys.push(y);
        self.z.push(a);
        Ok(())
    }

    fn push_trace(&mut self, iteration: usize) -> Result<()> {
        let row = trace(iteration, &self.ys, &self.plan, &self.env.values, &self.params)?;
        self.history.traces.push(row);
        Ok(())
    }

    fn initial(&mut self, cfg: &RunConfig) -> Result<()> {
        for x in initial_design(self.problem, cfg) {
            self.evaluate(x, 0, None)?;
        }
        self.push_trace(0)
    }

    fn finish(self, error: Option<Error>) -> RunOutcome {
        RunOutcome { history: self.history, error }
    }
}

/// Achievement-space ER2I loop (modes `discrete_er2i` and `quadrature_er2i`):
/// per iteration, refit one GP per weight, maximize the coefficient-weighted
/// sum of scalar EIs against the current envelope, evaluate, update.
pub fn run_discrete_er2i_loop(problem: &Problem, cfg: &RunConfig) -> Result<RunOutcome> {
    if cfg.mode == Mode::Ehvi {
        return Err(Error::Config("mode `ehvi` uses run_ehvi_loop".into()));
    }
    let mut st = LoopState::new(problem, cfg)?;
    let grid = cfg.grid.kernels(problem)?;
    st.initial(cfg)?;
    for it in 1..=(cfg.budget - cfg.n_initial) {
        let columns: Vec<Vec<f64>> =
            (0..st.plan.weights.len()).map(|k| st.z.iter().map(|row| row[k]).collect()).collect();
        let models = match fit_shared(&st.xs, &columns, &grid) {
            Ok(m) => m,
            Err(e) => return Ok(st.finish(Some(e))),
        };
        let (thresholds, coeffs) = (&st.env.values, &st.plan.coeffs);
        let acq = |x: &[f64]| -> f64 {
            let preds: Vec<Gaussian1D> = models.iter().map(|m| m.predict(x)).collect();
            er2i_weighted(&preds, thresholds, coeffs).unwrap_or(0.0)
        };
        let (x, val) =
            propose_next(acq, &problem.lower, &problem.upper, cfg.search_budget, search_seed(cfg.seed, it), cfg.threads);
        st.evaluate(x, it, Some(val))?;
        st.push_trace(it)?;
    }
    Ok(st.finish(None))
}

fn fit_shared(xs: &[Vec<f64>], columns: &[Vec<f64>], grid: &[Kernel]) -> Result<Vec<GpModel>> {
    let k = select_shared_hyperparameters(xs, columns, grid)?;
    columns.iter().map(|c| GpModel::fit(xs, c, &k)).collect()
}

/// EHVI loop with one GP per objective and independent marginals. Traces
/// still report R2 against the configured weights.
pub fn run_ehvi_loop(problem: &Problem, cfg: &RunConfig) -> Result<RunOutcome> {
    if cfg.mode != Mode::Ehvi {
        return Err(Error::Config("run_ehvi_loop needs mode `ehvi`".into()));
    }
    let mut st = LoopState::new(problem, cfg)?;
    let grid = cfg.grid.kernels(problem)?;
    st.initial(cfg)?;
    for it in 1..=(cfg.budget - cfg.n_initial) {
        let mut models = Vec::with_capacity(problem.objectives);
        for i in 0..problem.objectives {
            let col: Vec<f64> = st.ys.iter().map(|y| y[i]).collect();
            match select_hyperparameters(&st.xs, &col, &grid).and_then(|k| GpModel::fit(&st.xs, &col, &k)) {
                Ok(m) => models.push(m),
                Err(e) => return Ok(st.finish(Some(e))),
            }
        }
        let front: Vec<Vec<f64>> = pareto_filter_indices(&st.ys).into_iter().map(|i| st.ys[i].clone()).collect();
        let r = &st.params.reference;
        let acq = |x: &[f64]| -> f64 {
            let pred = IndependentGaussianPrediction::new(models.iter().map(|m| m.predict(x)).collect());
            ehvi_exact(&pred, &front, r).unwrap_or(0.0)
        };
        let (x, val) =
            propose_next(acq, &problem.lower, &problem.upper, cfg.search_budget, search_seed(cfg.seed, it), cfg.threads);
        st.evaluate(x, it, Some(val))?;
        st.push_trace(it)?;
    }
    Ok(st.finish(None))
}

/// Dispatches on `cfg.mode`.
pub fn run(problem: &Problem, cfg: &RunConfig) -> Result<RunOutcome> {
    match cfg.mode {
        Mode::Ehvi => run_ehvi_loop(problem, cfg),
        _ => run_discrete_er2i_loop(problem, cfg),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::r2::discrete_r2;

    fn bench(mode: Mode, budget: usize, seed: u64) -> (Problem, RunConfig) {
        (Problem::quadratic_front(), RunConfig::benchmark(mode, budget, seed))
    }

    #[test]
    fn update_examples() {
        let mut env = DiscreteEnvelope { weights: Weight::uniform_bi(3), values: vec![0.5, 0.5, 0.5] };
        assert_eq!(update_envelopes(&mut env, &[0.6, 0.7, 0.8]).unwrap(), 0);
        assert_eq!(env.values, vec![0.5, 0.5, 0.5]);
        assert_eq!(update_envelopes(&mut env, &[0.1, 0.2, 0.3]).unwrap(), 3);
        assert_eq!(env.values, vec![0.1, 0.2, 0.3]);
        assert!(update_envelopes(&mut env, &[0.1]).is_err());
    }

    #[test]
    fn update_matches_recompute() {
        let p = TchebycheffParams::unit(2);
        let w = Weight::uniform_bi(5);
        let mut g = rng(8);
        let pts: Vec<Vec<f64>> = (0..12).map(|_| vec![g.random_range(0.0..1.0), g.random_range(0.0..1.0)]).collect();
        let mut env = DiscreteEnvelope::from_points(&[], w.clone(), &p).unwrap();
        for (i, y) in pts.iter().enumerate() {
            update_envelopes(&mut env, &achievements(y, &w, &p)).unwrap();
            let full = DiscreteEnvelope::from_points(&pts[..=i], w.clone(), &p).unwrap();
            assert_eq!(env.values, full.values);
        }
    }

    #[test]
    fn propose_examples() {
        let (x, _) = propose_next(|_| 1.0, &[0.0], &[1.0], 100, 3, 1);
        let mut g = rng(3);
        let first: f64 = g.random();
        assert_eq!(x, vec![first]);

        let (x, _) = propose_next(|x| -(x[0] - 0.37).powi(2), &[0.0], &[1.0], 1000, 1, 1);
        assert!((x[0] - 0.37).abs() < 1e-2);

        let f = |x: &[f64]| (7.0 * x[0]).sin() * (3.0 * x[1]).cos();
        let serial = propose_next(f, &[0.0, 0.0], &[1.0, 1.0], 500, 9, 1);
        let parallel = propose_next(f, &[0.0, 0.0], &[1.0, 1.0], 500, 9, 4);
        assert_eq!(serial, parallel);
    }

    #[test]
    fn proposal_never_below_probes() {
        let f = |x: &[f64]| (13.0 * x[0]).sin() + 0.3 * (5.0 * x[0]).cos();
        let (_, fx) = propose_next(f, &[0.0], &[1.0], 200, 4, 1);
        // The first 100 draws of the seed are the uniform candidates.
        let mut probe = rng(4);
        for _ in 0..100 {
            let u: f64 = probe.random();
            assert!(fx >= f(&[u]));
        }
    }

    #[test]
    fn initial_only_budget() {
        let (pb, cfg) = bench(Mode::DiscreteEr2i, 5, 2);
        let out = run_discrete_er2i_loop(&pb, &cfg).unwrap();
        assert!(out.error.is_none());
        let h = out.history;
        assert_eq!(h.records.len(), 5);
        assert_eq!(h.traces.len(), 1);
        let p = TchebycheffParams::unit(2);
        let minima: Vec<f64> = h
            .weights
            .iter()
            .map(|w| h.records.iter().map(|r| tcheby_value(&r.y, w, &p)).fold(f64::INFINITY, f64::min))
            .collect();
        assert_eq!(h.records.last().unwrap().envelope, minima);

        let (pb, cfg) = bench(Mode::Ehvi, 5, 2);
        let h = run_ehvi_loop(&pb, &cfg).unwrap().history;
        assert_eq!(h.traces.len(), 1);
        assert_eq!(h.traces[0].hv, hypervolume(&h.points(), &[1.0, 1.0]).unwrap());
    }

    #[test]
    fn short_run_invariants() {
        let (pb, cfg) = bench(Mode::DiscreteEr2i, 12, 0);
        let h = run_discrete_er2i_loop(&pb, &cfg).unwrap().history;
        let p = TchebycheffParams::unit(2);
        for w in h.records.windows(2) {
            assert!(w[1].envelope.iter().zip(&w[0].envelope).all(|(b, a)| b <= a));
        }
        for (t, pair) in h.traces.iter().zip(h.traces.windows(2).map(Some).chain([None])) {
            if let Some(pair) = pair {
                assert!(pair[1].hv >= pair[0].hv);
            }
            let pts: Vec<Vec<f64>> = h.records[..t.evaluations].iter().map(|r| r.y.clone()).collect();
            let k = h.weights.len() as f64;
            let recompute: f64 = h
                .weights
                .iter()
                .map(|w| {
                    let hk = crate::r2::envelope_value(&pts, w, &p).unwrap().0;
                    (tcheby_value(&p.reference, w, &p) - hk).max(0.0)
                })
                .sum::<f64>()
                / k;
            assert!((t.discrete_r2_improvement - recompute).abs() < 1e-15);
            assert!((t.discrete_r2 - discrete_r2(&pts, &h.weights, &p).unwrap()).abs() < 1e-15);
        }
        assert!(h.records.iter().filter_map(|r| r.acquisition).all(|a| a >= 0.0));
        let again = run_discrete_er2i_loop(&pb, &cfg).unwrap().history;
        assert_eq!(serde_json::to_string(&h).unwrap(), serde_json::to_string(&again).unwrap());
    }

    #[test]
    fn quadrature_mode_runs() {
        let (pb, mut cfg) = bench(Mode::QuadratureEr2i, 8, 1);
        cfg.weights = WeightSpec::Rule { rule: RuleSpec { family: RuleFamily::Gauss, size: 8 } };
        let h = run(&pb, &cfg).unwrap().history;
        assert_eq!(h.weights.len(), 8);
        assert_eq!(h.traces.len(), 4);
    }

    #[test]
    fn config_validation() {
        let pb = Problem::quadratic_front();
        let mut cfg = RunConfig::benchmark(Mode::DiscreteEr2i, 3, 0);
        assert!(matches!(run(&pb, &cfg), Err(Error::Config(_))));
        cfg.budget = 10;
        cfg.utopian = vec![0.0];
        assert!(matches!(run(&pb, &cfg), Err(Error::DimensionMismatch { .. })));
        let json = r#"{"mode":"discrete_er2i","utopian":[0,0],"reference":[1,1],"budget":6,"n_initial":3,"weights":{"uniform":4}}"#;
        let c: RunConfig = serde_json::from_str(json).unwrap();
        assert_eq!(c.weights, WeightSpec::Uniform { uniform: 4 });
        let bad = r#"{"mode":"discrete_er2i","utopian":[0,0],"reference":[1,1],"budget":6,"n_initial":3,"colour":1}"#;
        assert!(serde_json::from_str::<RunConfig>(bad).is_err());
        let explicit = r#"{"mode":"ehvi","utopian":[0,0],"reference":[1,1],"budget":6,"n_initial":3,"weights":[[0.5,0.5],[1,0]]}"#;
        let c: RunConfig = serde_json::from_str(explicit).unwrap();
        assert_eq!(c.weights, WeightSpec::Explicit(vec![Weight::bi(0.5), Weight::bi(1.0)]));
    }
}
