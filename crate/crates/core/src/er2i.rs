//! Expected R2 improvement.
//!
//! Two models of the same quantity live here. In achievement space each
//! weight carries its own Gaussian `Z_x(λ) ~ N(m_x(λ), s_x(λ)²)` and ER2I is
//! an integral (or average) of scalar expected improvements. In objective
//! space `Y ~ N(μ, diag σ²)` and the per-weight expectation is a
//! one-dimensional integral of a product of normal CDFs.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::ehvi::{IndependentGaussianPrediction, McEstimate, Moments};
use crate::error::{Error, Result};
use crate::gaussian::{ei_shortfall, std_normal_cdf, Gaussian1D};
use crate::quad::{adaptive_simpson, gauss_legendre_on};
use crate::r2::{
    envelope_piecewise_2d, envelope_value, tcheby_value, PiecewiseLinearEnvelope, SimplexQuadratureRule,
    TchebycheffParams, Weight, WeightDensity,
};
use crate::sampling::{latin_hypercube, rng};

/// `(h_A(λ) - g_λ(y))₊`.
pub fn delta_improvement(y: &[f64], points: &[Vec<f64>], w: &Weight, p: &TchebycheffParams) -> Result<f64> {
    if y.len() != p.dim() {
        return Err(Error::DimensionMismatch { expected: p.dim(), got: y.len() });
    }
    let (h, _) = envelope_value(points, w, p)?;
    Ok((h - tcheby_value(y, w, p)).max(0.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImprovementSample {
    pub weight: Weight,
    pub delta: f64,
}

/// Envelope gain of `y` at each weight.
pub fn improvement_profile(
    y: &[f64],
    points: &[Vec<f64>],
    weights: &[Weight],
    p: &TchebycheffParams,
) -> Result<Vec<ImprovementSample>> {
    weights
        .iter()
        .map(|w| Ok(ImprovementSample { weight: w.clone(), delta: delta_improvement(y, points, w, p)? }))
        .collect()
}

/// Incumbent envelope values `h_{n,k}` on a fixed weight set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteEnvelope {
    pub weights: Vec<Weight>,
    pub values: Vec<f64>,
}

impl DiscreteEnvelope {
    /// Envelope of `points`; `+∞` everywhere when `points` is empty.
    pub fn from_points(points: &[Vec<f64>], weights: Vec<Weight>, p: &TchebycheffParams) -> Result<Self> {
        let values = weights
            .iter()
            .map(|w| if points.is_empty() { Ok(f64::INFINITY) } else { envelope_value(points, w, p).map(|v| v.0) })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { weights, values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Entry-wise `min(old, new)`; returns how many entries decreased.
    pub fn update(&mut self, achievements: &[f64]) -> Result<usize> {
        if achievements.len() != self.values.len() {
            return Err(Error::LengthMismatch { left: self.values.len(), right: achievements.len() });
        }
        let mut changed = 0;
        for (h, z) in self.values.iter_mut().zip(achievements) {
            if *z < *h {
                *h = *z;
                changed += 1;
            }
        }
        Ok(changed)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnvelopeState {
    Discrete(DiscreteEnvelope),
    Integral(PiecewiseLinearEnvelope),
}

/// Mean of scalar expected improvements, `(1/K) Σ EI(h_k; m_k, s_k)`.
pub fn er2i_discrete(preds: &[Gaussian1D], thresholds: &[f64]) -> Result<f64> {
    if preds.len() != thresholds.len() {
        return Err(Error::LengthMismatch { left: preds.len(), right: thresholds.len() });
    }
    if preds.is_empty() {
        return Err(Error::EmptyWeights);
    }
    let s: f64 = preds.iter().zip(thresholds).map(|(g, h)| ei_shortfall(*h, *g)).sum();
    Ok(s / preds.len() as f64)
}

/// `Σ_ℓ c_ℓ EI(h_ℓ; m_ℓ, s_ℓ)` with caller-supplied coefficients (quadrature
/// weight times density).
pub fn er2i_weighted(preds: &[Gaussian1D], thresholds: &[f64], coeffs: &[f64]) -> Result<f64> {
    if preds.len() != thresholds.len() {
        return Err(Error::LengthMismatch { left: preds.len(), right: thresholds.len() });
    }
    if preds.len() != coeffs.len() {
        return Err(Error::LengthMismatch { left: preds.len(), right: coeffs.len() });
    }
    Ok(preds.iter().zip(thresholds).zip(coeffs).map(|((g, h), c)| c * ei_shortfall(*h, *g)).sum())
}

/// Gaussian achievement model `λ ↦ (m_x(λ), s_x(λ))` at a fixed design.
pub trait AchievementSurrogate {
    fn predict(&self, w: &Weight) -> Gaussian1D;

    /// Two objectives: values of `λ` where `m_x` or `s_x` may fail to be smooth.
    fn kinks(&self) -> Vec<f64> {
        Vec::new()
    }
}

/// Closure-backed surrogate.
pub struct AchievementSurrogateView<M, S> {
    pub mean_at: M,
    pub std_at: S,
    pub kinks: Vec<f64>,
}

impl<M, S> AchievementSurrogateView<M, S>
where
    M: Fn(&Weight) -> f64,
    S: Fn(&Weight) -> f64,
{
    pub fn new(mean_at: M, std_at: S) -> Self {
        Self { mean_at, std_at, kinks: Vec::new() }
    }
}

impl<M, S> AchievementSurrogate for AchievementSurrogateView<M, S>
where
    M: Fn(&Weight) -> f64,
    S: Fn(&Weight) -> f64,
{
    fn predict(&self, w: &Weight) -> Gaussian1D {
        Gaussian1D::new((self.mean_at)(w), (self.std_at)(w).max(0.0))
    }

    fn kinks(&self) -> Vec<f64> {
        self.kinks.clone()
    }
}

/// Achievement model induced by independent objective marginals:
/// `m(λ) = g_λ(μ)` and `s(λ) = max_i λ_i σ_i`, both continuous and
/// piecewise linear in `λ` for two objectives.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarizedGaussian {
    pub prediction: IndependentGaussianPrediction,
    pub params: TchebycheffParams,
}

impl AchievementSurrogate for ScalarizedGaussian {
    fn predict(&self, w: &Weight) -> Gaussian1D {
        let means: Vec<f64> = self.prediction.means();
        let sd = self
            .prediction
            .marginals
            .iter()
            .zip(w.as_slice())
            .map(|(g, l)| l * g.std)
            .fold(0.0, f64::max);
        Gaussian1D::new(tcheby_value(&means, w, &self.params), sd)
    }

    fn kinks(&self) -> Vec<f64> {
        if self.params.dim() != 2 {
            return Vec::new();
        }
        let g = &self.prediction.marginals;
        // λ a = (1 - λ) b
        let cross = |a: f64, b: f64| {
            let d = a + b;
            let x = b / d;
            (d != 0.0 && x > 0.0 && x < 1.0).then_some(x)
        };
        let mut k: Vec<f64> = [
            cross(g[0].mean - self.params.utopian[0], g[1].mean - self.params.utopian[1]),
            cross(g[0].std, g[1].std),
        ]
        .into_iter()
        .flatten()
        .collect();
        k.sort_by(f64::total_cmp);
        k
    }
}

/// Incumbent envelope evaluated at arbitrary weights.
pub trait Envelope {
    fn at(&self, w: &Weight) -> f64;

    /// Two objectives: breakpoints in `λ`.
    fn kinks(&self) -> Vec<f64> {
        Vec::new()
    }
}

impl Envelope for PiecewiseLinearEnvelope {
    fn at(&self, w: &Weight) -> f64 {
        self.value(w.as_slice()[0])
    }

    fn kinks(&self) -> Vec<f64> {
        self.breakpoints().to_vec()
    }
}

/// `h_A` of an explicit point set, any number of objectives.
#[derive(Debug, Clone, Copy)]
pub struct PointSetEnvelope<'a> {
    pub points: &'a [Vec<f64>],
    pub params: &'a TchebycheffParams,
}

impl Envelope for PointSetEnvelope<'_> {
    fn at(&self, w: &Weight) -> f64 {
        envelope_value(self.points, w, self.params).map_or(f64::INFINITY, |v| v.0)
    }

    fn kinks(&self) -> Vec<f64> {
        if self.params.dim() == 2 && !self.points.is_empty() {
            envelope_piecewise_2d(self.points, self.params).map(|e| e.breakpoints().to_vec()).unwrap_or_default()
        } else {
            Vec::new()
        }
    }
}

/// `Σ_ℓ w_ℓ EI(h_A(λ_ℓ); m_x(λ_ℓ), s_x(λ_ℓ)) ρ(λ_ℓ)`.
pub fn er2i_quadrature<S: AchievementSurrogate + ?Sized, E: Envelope + ?Sized>(
    surr: &S,
    env: &E,
    rho: &WeightDensity,
    rule: &SimplexQuadratureRule,
) -> f64 {
    rule.nodes
        .iter()
        .zip(&rule.weights)
        .map(|(node, w)| w * ei_shortfall(env.at(node), surr.predict(node)) * rho.eval(node))
        .sum()
}

const REFERENCE_NODES: usize = 48;
const ROOT_SCAN: usize = 32;

/// Reference value of two-objective integral ER2I: Gauss–Legendre on every
/// interval where envelope, surrogate and density are all smooth. Sign
/// changes of `h_A - m_x` are located too, since the integrand has a kink
/// there wherever `s_x = 0`.
pub fn er2i_exact_2d<S: AchievementSurrogate + ?Sized>(
    surr: &S,
    env: &PiecewiseLinearEnvelope,
    rho: &WeightDensity,
) -> Result<f64> {
    if let WeightDensity::Custom(_) = rho {
        return Err(Error::UnsupportedDensity("custom densities need a quadrature rule".into()));
    }
    let mut cuts: Vec<f64> = env.breakpoints().to_vec();
    cuts.extend(surr.kinks());
    cuts.extend_from_slice(rho.breaks());
    cuts.extend([0.0, 1.0]);
    cuts.retain(|x| (0.0..=1.0).contains(x));
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|a, b| (*a - *b).abs() <= 1e-14);
    let mut roots = Vec::new();
    for c in cuts.windows(2) {
        let seg = *env.segment_at(0.5 * (c[0] + c[1]));
        let d = |l: f64| seg.at(l) - surr.predict(&Weight::bi(l)).mean;
        let step = (c[1] - c[0]) / ROOT_SCAN as f64;
        for k in 0..ROOT_SCAN {
            let (mut a, mut b) = (c[0] + k as f64 * step, c[0] + (k + 1) as f64 * step);
            let (da, db) = (d(a), d(b));
            if da * db < 0.0 {
                for _ in 0..60 {
                    let m = 0.5 * (a + b);
                    if d(m) * da > 0.0 {
                        a = m;
                    } else {
                        b = m;
                    }
                }
                roots.push(0.5 * (a + b));
            }
        }
    }
    cuts.extend(roots);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|a, b| (*a - *b).abs() <= 1e-14);
    let mut total = 0.0;
    for c in cuts.windows(2) {
        let mid = 0.5 * (c[0] + c[1]);
        let seg = *env.segment_at(mid);
        let dens = rho.piece_near(mid);
        let (x, w) = gauss_legendre_on(REFERENCE_NODES, c[0], c[1]);
        for (l, wl) in x.into_iter().zip(w) {
            total += wl * ei_shortfall(seg.at(l), surr.predict(&Weight::bi(l))) * dens(l);
        }
    }
    Ok(total)
}

const INTEGRAND_TOL: f64 = 1e-9;
const TAIL_SIGMAS: f64 = 10.0;
const PANELS: usize = 8;

/// `E[(h_A(λ) - g_λ(Y))₊] = ∫_{-∞}^{h_A(λ)} ∏_i Φ((z⁺_i + t/λ_i - μ_i)/σ_i) dt`
/// for an interior weight, by adaptive Simpson from a lower cutoff ten
/// (scaled) standard deviations below the largest scaled mean.
pub fn objective_gaussian_integrand(
    pred: &IndependentGaussianPrediction,
    points: &[Vec<f64>],
    w: &Weight,
    p: &TchebycheffParams,
) -> Result<f64> {
    let h = envelope_value(points, w, p)?.0;
    integrand_below(pred, h, w, p)
}

fn integrand_below(pred: &IndependentGaussianPrediction, h: f64, w: &Weight, p: &TchebycheffParams) -> Result<f64> {
    let m = p.dim();
    if pred.dim() != m {
        return Err(Error::DimensionMismatch { expected: m, got: pred.dim() });
    }
    if w.dim() != m {
        return Err(Error::DimensionMismatch { expected: m, got: w.dim() });
    }
    if let Some(i) = w.as_slice().iter().position(|l| *l <= 0.0) {
        return Err(Error::BoundaryWeight(i));
    }
    if let Some(g) = pred.marginals.iter().find(|g| !(g.std > 0.0)) {
        return Err(Error::OutOfRange(format!("objective std must be positive, got {}", g.std)));
    }
    let lam = w.as_slice();
    let lo = pred
        .marginals
        .iter()
        .zip(&p.utopian)
        .zip(lam)
        .map(|((g, z), l)| l * (g.mean - z - TAIL_SIGMAS * g.std))
        .fold(f64::NEG_INFINITY, f64::max);
    if !(h > lo) {
        return Ok(0.0);
    }
    let cdf = |t: f64| -> f64 {
        pred.marginals
            .iter()
            .zip(&p.utopian)
            .zip(lam)
            .map(|((g, z), l)| std_normal_cdf((z + t / l - g.mean) / g.std))
            .product()
    };
    let width = (h - lo) / PANELS as f64;
    Ok((0..PANELS)
        .map(|k| {
            let a = lo + k as f64 * width;
            let b = if k + 1 == PANELS { h } else { a + width };
            adaptive_simpson(cdf, a, b, INTEGRAND_TOL / PANELS as f64)
        })
        .sum())
}

/// `Σ_ℓ w_ℓ ρ(λ_ℓ) E[Δ_{λ_ℓ}]` with the objective-Gaussian integrand at every node.
pub fn er2i_objective_gaussian(
    pred: &IndependentGaussianPrediction,
    points: &[Vec<f64>],
    p: &TchebycheffParams,
    rho: &WeightDensity,
    rule: &SimplexQuadratureRule,
) -> Result<f64> {
    let mut s = 0.0;
    for (node, w) in rule.nodes.iter().zip(&rule.weights) {
        s += w * objective_gaussian_integrand(pred, points, node, p)? * rho.eval(node);
    }
    Ok(s)
}

/// Monte-Carlo ER2I under the objective model: draws `Y ~ pred` and averages
/// `Σ_ℓ w_ℓ ρ(λ_ℓ) Δ_{λ_ℓ}(Y)`.
pub fn er2i_mc_oracle(
    pred: &IndependentGaussianPrediction,
    points: &[Vec<f64>],
    p: &TchebycheffParams,
    rho: &WeightDensity,
    rule: &SimplexQuadratureRule,
    n_samples: usize,
    seed: u64,
) -> Result<McEstimate> {
    if pred.dim() != p.dim() {
        return Err(Error::DimensionMismatch { expected: p.dim(), got: pred.dim() });
    }
    let thresholds = rule
        .nodes
        .iter()
        .map(|w| envelope_value(points, w, p).map(|v| v.0))
        .collect::<Result<Vec<_>>>()?;
    let coeffs: Vec<f64> = rule.nodes.iter().zip(&rule.weights).map(|(n, w)| w * rho.eval(n)).collect();
    let mut g = rng(seed);
    let mut y = vec![0.0; p.dim()];
    let mut acc = Moments::default();
    for _ in 0..n_samples {
        pred.sample_into(&mut g, &mut y);
        let v: f64 = rule
            .nodes
            .iter()
            .zip(&thresholds)
            .zip(&coeffs)
            .map(|((w, h), c)| c * (h - tcheby_value(&y, w, p)).max(0.0))
            .sum();
        acc.push(v);
    }
    Ok(acc.finish())
}

/// Which sign of the variance derivative a stored instance exhibits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VarianceRegime {
    /// Widening a std lowers the expected improvement.
    Negative,
    /// Widening a std raises it.
    Positive,
}

/// One objective-Gaussian instance evaluated at two std vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Er2iVarianceRecord {
    pub regime: VarianceRegime,
    pub mu: Vec<f64>,
    pub sigma: Vec<f64>,
    pub sigma_prime: Vec<f64>,
    #[serde(rename = "A")]
    pub a: Vec<Vec<f64>>,
    pub utopian: Vec<f64>,
    pub weight: Weight,
    /// `h_A(λ)`.
    pub threshold: f64,
    pub value_at_sigma: f64,
    pub value_at_sigma_prime: f64,
    pub seed: u64,
}

impl Er2iVarianceRecord {
    /// Recomputes `(value_at_sigma, value_at_sigma_prime)`.
    pub fn reevaluate(&self) -> Result<(f64, f64)> {
        let p = TchebycheffParams::new(self.utopian.clone(), vec![f64::INFINITY; self.utopian.len()])?;
        let base = IndependentGaussianPrediction::from_mean_std(&self.mu, &self.sigma);
        let wide = IndependentGaussianPrediction::from_mean_std(&self.mu, &self.sigma_prime);
        Ok((
            objective_gaussian_integrand(&base, &self.a, &self.weight, &p)?,
            objective_gaussian_integrand(&wide, &self.a, &self.weight, &p)?,
        ))
    }

    /// Whether the stored values exhibit the regime's sign by more than `margin`.
    pub fn holds(&self, margin: f64) -> bool {
        let d = self.value_at_sigma_prime - self.value_at_sigma;
        match self.regime {
            VarianceRegime::Negative => d < -margin,
            VarianceRegime::Positive => d > margin,
        }
    }
}

/// Draws two-objective instances (`z⁺ = 0`): means in `[-0.5, 1.5]²`, stds in
/// `[0.05, 1]²`, one to three incumbents in `[0.1, 1]²`, `λ₁ ∈ [0.1, 0.9]`
/// and one std multiplied by a factor in `[1.2, 4]`. Candidates are kept only
/// if the threshold sits above the widened coordinate's scaled mean
/// (negative regime) or below every scaled mean (positive regime).
pub fn find_er2i_variance_instance(regime: VarianceRegime, trials: usize, seed: u64) -> Result<Er2iVarianceRecord> {
    const LO: [f64; 14] = [-0.5, -0.5, 0.05, 0.05, 1.2, 0.0, 0.1, 1.0, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1];
    const HI: [f64; 14] = [1.5, 1.5, 1.0, 1.0, 4.0, 2.0, 0.9, 4.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0];
    let p = TchebycheffParams::new(vec![0.0, 0.0], vec![f64::INFINITY; 2])?;
    let mut g = rng(seed);
    let mut best: Option<Er2iVarianceRecord> = None;
    for u in latin_hypercube(&mut g, trials, &LO, &HI) {
        let mu = vec![u[0], u[1]];
        let sigma = vec![u[2], u[3]];
        let j = (u[5] as usize).min(1);
        let w = Weight::bi(u[6]);
        let a: Vec<Vec<f64>> = (0..(u[7] as usize).min(3)).map(|k| vec![u[8 + 2 * k], u[9 + 2 * k]]).collect();
        let h = envelope_value(&a, &w, &p)?.0;
        let scaled: Vec<f64> = (0..2).map(|i| w.as_slice()[i] * mu[i]).collect();
        let candidate = match regime {
            VarianceRegime::Negative => h > scaled[j],
            VarianceRegime::Positive => scaled.iter().all(|s| h < *s),
        };
        if !candidate {
            continue;
        }
        let mut sigma_prime = sigma.clone();
        sigma_prime[j] *= u[4];
        let base = IndependentGaussianPrediction::from_mean_std(&mu, &sigma);
        let wide = IndependentGaussianPrediction::from_mean_std(&mu, &sigma_prime);
        let v0 = integrand_below(&base, h, &w, &p)?;
        let v1 = integrand_below(&wide, h, &w, &p)?;
        let gain = match regime {
            VarianceRegime::Negative => v0 - v1,
            VarianceRegime::Positive => v1 - v0,
        };
        let best_gain = best.as_ref().map_or(10.0 * INTEGRAND_TOL, |b| {
            (b.value_at_sigma_prime - b.value_at_sigma).abs()
        });
        if gain > best_gain {
            best = Some(Er2iVarianceRecord {
                regime,
                mu,
                sigma,
                sigma_prime,
                a,
                utopian: p.utopian.clone(),
                weight: w,
                threshold: h,
                value_at_sigma: v0,
                value_at_sigma_prime: v1,
                seed,
            });
        }
    }
    best.ok_or(Error::SearchExhausted { trials })
}

/// Counts achievement-space variance-monotonicity violations over `trials`
/// random instances: for each, one `s_k` of a discrete ER2I and the std
/// profile of a quadrature ER2I are widened, and any decrease beyond `tol`
/// is counted.
pub fn achievement_variance_violations(trials: usize, seed: u64, tol: f64) -> Result<usize> {
    let mut g = rng(seed);
    let rule = SimplexQuadratureRule::gauss_legendre(16);
    let mut count = 0;
    for _ in 0..trials {
        let k = g.random_range(1..=11);
        let preds: Vec<Gaussian1D> =
            (0..k).map(|_| Gaussian1D::new(g.random_range(-1.0..1.0), g.random_range(0.0..1.0))).collect();
        let thresholds: Vec<f64> = (0..k).map(|_| g.random_range(-1.0..1.0)).collect();
        let j = g.random_range(0..k);
        let mut wider = preds.clone();
        wider[j].std *= g.random_range(1.0..4.0);
        wider[j].std += g.random_range(0.0..0.1);
        if er2i_discrete(&wider, &thresholds)? < er2i_discrete(&preds, &thresholds)? - tol {
            count += 1;
        }

        let mu = [g.random_range(-0.5..1.5), g.random_range(-0.5..1.5)];
        let sd = [g.random_range(0.01..1.0), g.random_range(0.01..1.0)];
        let set: Vec<Vec<f64>> = (0..g.random_range(1..4))
            .map(|_| vec![g.random_range(0.0..1.0), g.random_range(0.0..1.0)])
            .collect();
        let p = TchebycheffParams::unit(2);
        let env = envelope_piecewise_2d(&set, &p)?;
        let centre = g.random_range(0.0..1.0);
        let bump = g.random_range(0.0..2.0);
        let mean_at = |w: &Weight| tcheby_value(&mu, w, &p);
        let std_at = |w: &Weight| w.as_slice()[0] * sd[0] + w.as_slice()[1] * sd[1];
        let base = AchievementSurrogateView::new(mean_at, std_at);
        let wide = AchievementSurrogateView::new(mean_at, |w: &Weight| {
            std_at(w) * (1.0 + bump * (-(w.as_slice()[0] - centre).powi(2) / 0.02).exp())
        });
        let rho = WeightDensity::Uniform;
        if er2i_quadrature(&wide, &env, &rho, &rule) < er2i_quadrature(&base, &env, &rho, &rule) - tol {
            count += 1;
        }
    }
    Ok(count)
}
