//! Expected hypervolume improvement for independent Gaussian predictions.
//!
//! Exact evaluation goes through the coordinate-wise EI transform: in the
//! maximization frame with reference at the origin, each coordinate of the
//! reference and of every incumbent is replaced by a one-dimensional expected
//! improvement, after which EHVI is an ordinary deterministic hypervolume
//! improvement. Inputs are taken in minimization orientation and mapped to
//! that frame by `v ↦ r - v` per coordinate (means mapped, stds unchanged).

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::{ei_exceed, truncated_ei_exceed, Gaussian1D, TruncatedGaussian1D};
use crate::geometry::{
    hvi, AxisBox, DesirabilityMap, Front2d, SimplicialCone, kernel_admissible, pareto_filter_indices,
};
use crate::sampling::{latin_hypercube, rng};

/// Per-coordinate independent Gaussian predictive marginals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndependentGaussianPrediction {
    pub marginals: Vec<Gaussian1D>,
}

impl IndependentGaussianPrediction {
    pub fn new(marginals: Vec<Gaussian1D>) -> Self {
        Self { marginals }
    }

    pub fn from_mean_std(mean: &[f64], std: &[f64]) -> Self {
        Self {
            marginals: mean.iter().zip(std).map(|(m, s)| Gaussian1D::new(*m, *s)).collect(),
        }
    }

    pub fn point_mass(y: &[f64]) -> Self {
        Self { marginals: y.iter().map(|v| Gaussian1D::point_mass(*v)).collect() }
    }

    pub fn dim(&self) -> usize {
        self.marginals.len()
    }

    pub fn means(&self) -> Vec<f64> {
        self.marginals.iter().map(|g| g.mean).collect()
    }

    pub(crate) fn sample_into<R: Rng>(&self, rng: &mut R, out: &mut [f64]) {
        for (o, g) in out.iter_mut().zip(&self.marginals) {
            let z: f64 = rng.sample(StandardNormal);
            *o = g.mean + g.std * z;
        }
    }
}

/// Transformed reference and incumbents, maximization frame with reference 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhviInstance {
    pub transformed_reference: Vec<f64>,
    pub transformed_set: Vec<Vec<f64>>,
}

impl PhviInstance {
    /// `HVI({r̃}, Ã)` with reference at the origin.
    pub fn improvement(&self) -> Result<f64> {
        let y: Vec<f64> = self.transformed_reference.iter().map(|v| -v).collect();
        let set: Vec<Vec<f64>> =
            self.transformed_set.iter().map(|p| p.iter().map(|v| -v).collect()).collect();
        let origin = vec![0.0; y.len()];
        hvi(&y, &set, &origin)
    }
}

fn check_inputs(pred: &IndependentGaussianPrediction, points: &[Vec<f64>], r: &[f64]) -> Result<()> {
    let m = r.len();
    if pred.dim() != m {
        return Err(Error::DimensionMismatch { expected: m, got: pred.dim() });
    }
    for p in points {
        if p.len() != m {
            return Err(Error::DimensionMismatch { expected: m, got: p.len() });
        }
    }
    Ok(())
}

/// Nondominated incumbents, mapped into the maximization frame (`r - a`,
/// clipped at zero).
fn normalized_incumbents(points: &[Vec<f64>], r: &[f64]) -> Vec<Vec<f64>> {
    let keep = pareto_filter_indices(points);
    keep.into_iter()
        .map(|i| points[i].iter().zip(r).map(|(a, rj)| (rj - a).max(0.0)).collect())
        .collect()
}

fn transform_with<F>(pred: &IndependentGaussianPrediction, points: &[Vec<f64>], r: &[f64], mut ei: F) -> Result<PhviInstance>
where
    F: FnMut(usize, f64) -> Result<f64>,
{
    check_inputs(pred, points, r)?;
    let m = r.len();
    let r_tilde = (0..m).map(|j| ei(j, 0.0)).collect::<Result<Vec<f64>>>()?;
    let mut set = Vec::new();
    for a in normalized_incumbents(points, r) {
        let mut t = Vec::with_capacity(m);
        for j in 0..m {
            let v = r_tilde[j] - ei(j, a[j])?;
            t.push(v.clamp(0.0, r_tilde[j]));
        }
        set.push(t);
    }
    Ok(PhviInstance { transformed_reference: r_tilde, transformed_set: set })
}

fn normalized_marginals(pred: &IndependentGaussianPrediction, r: &[f64]) -> Vec<Gaussian1D> {
    pred.marginals.iter().zip(r).map(|(g, rj)| Gaussian1D::new(rj - g.mean, g.std)).collect()
}

/// Coordinate-wise EI transform: `r̃_j = EI(0)`, `ã_j = r̃_j - EI(a_j)` in the
/// normalized maximization frame.
pub fn phvi_transform(pred: &IndependentGaussianPrediction, points: &[Vec<f64>], r: &[f64]) -> Result<PhviInstance> {
    let norm = normalized_marginals(pred, r);
    transform_with(pred, points, r, |j, t| Ok(ei_exceed(t, norm[j])))
}

/// Exact EHVI (minimization inputs).
pub fn ehvi_exact(pred: &IndependentGaussianPrediction, points: &[Vec<f64>], r: &[f64]) -> Result<f64> {
    phvi_transform(pred, points, r)?.improvement()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub estimate: f64,
    pub standard_error: f64,
}

impl McEstimate {
    pub fn within(&self, value: f64, n_se: f64) -> bool {
        (self.estimate - value).abs() <= n_se * self.standard_error + 1e-12 * value.abs().max(1.0)
    }
}

#[derive(Default)]
pub(crate) struct Moments {
    n: usize,
    sum: f64,
    sum2: f64,
}

impl Moments {
    pub(crate) fn push(&mut self, v: f64) {
        self.n += 1;
        self.sum += v;
        self.sum2 += v * v;
    }

    pub(crate) fn finish(&self) -> McEstimate {
        let n = self.n as f64;
        let mean = self.sum / n;
        let var = (self.sum2 / n - mean * mean).max(0.0) * n / (n - 1.0).max(1.0);
        McEstimate { estimate: mean, standard_error: (var / n).sqrt() }
    }
}

/// Improvement evaluator with a fast path for two objectives.
enum Improvement {
    Planar(Front2d),
    General { points: Vec<Vec<f64>>, r: Vec<f64> },
}

impl Improvement {
    fn new(points: &[Vec<f64>], r: &[f64]) -> Result<Self> {
        Ok(if r.len() == 2 {
            Improvement::Planar(Front2d::new(points, r)?)
        } else {
            Improvement::General { points: points.to_vec(), r: r.to_vec() }
        })
    }

    fn eval(&self, y: &[f64]) -> Result<f64> {
        match self {
            Improvement::Planar(f) => Ok(f.improvement(y)),
            Improvement::General { points, r } => hvi(y, points, r),
        }
    }
}

/// Monte-Carlo EHVI: averages `hvi(Y, A, r)` over `n_samples` draws.
pub fn ehvi_mc_oracle(
    pred: &IndependentGaussianPrediction,
    points: &[Vec<f64>],
    r: &[f64],
    n_samples: usize,
    seed: u64,
) -> Result<McEstimate> {
    check_inputs(pred, points, r)?;
    let imp = Improvement::new(points, r)?;
    let mut g = rng(seed);
    let mut y = vec![0.0; r.len()];
    let mut acc = Moments::default();
    for _ in 0..n_samples {
        pred.sample_into(&mut g, &mut y);
        acc.push(imp.eval(&y)?);
    }
    Ok(acc.finish())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightedEhvi {
    pub value: f64,
    /// False when some marginal kernel vanishes on a set of positive length,
    /// in which case strict Pareto compliance is lost.
    pub admissible: bool,
}

/// Desirability-weighted EHVI with the Gaussian model posed in transformed
/// coordinates: ordinary EHVI of `(T(A), T(r))`.
pub fn ehvi_weighted(
    pred_transformed: &IndependentGaussianPrediction,
    points: &[Vec<f64>],
    r: &[f64],
    d: &DesirabilityMap,
) -> Result<WeightedEhvi> {
    let tr = d.transform(r)?;
    let ta = points
        .iter()
        .map(|p| {
            let clipped: Vec<f64> = p.iter().zip(r).map(|(a, b)| a.min(*b)).collect();
            d.transform(&clipped)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(WeightedEhvi {
        value: ehvi_exact(pred_transformed, &ta, &tr)?,
        admissible: kernel_admissible(d, r),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "path", rename_all = "snake_case")]
pub enum ConePath {
    /// `L` is a generalized permutation, so `L·Y` keeps independent coordinates.
    Exact,
    MonteCarlo { samples: usize, standard_error: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConeEhvi {
    pub value: f64,
    pub path: ConePath,
}

/// Cone EHVI: `|det C|` times EHVI of `(L·A, L·r)` under the law of `L·Y`.
pub fn ehvi_cone(
    pred: &IndependentGaussianPrediction,
    points: &[Vec<f64>],
    r: &[f64],
    cone: &SimplicialCone,
    mc_samples: usize,
    seed: u64,
) -> Result<ConeEhvi> {
    check_inputs(pred, points, r)?;
    if cone.dim() != r.len() {
        return Err(Error::DimensionMismatch { expected: r.len(), got: cone.dim() });
    }
    let la: Vec<Vec<f64>> = points.iter().map(|p| cone.to_cone_coords(p)).collect();
    let lr = cone.to_cone_coords(r);
    let det = cone.abs_determinant();
    if let Some(rows) = cone.monomial_rows() {
        let marginals = rows
            .iter()
            .map(|&(j, c)| {
                let g = pred.marginals[j];
                Gaussian1D::new(c * g.mean, c.abs() * g.std)
            })
            .collect();
        let value = det * ehvi_exact(&IndependentGaussianPrediction::new(marginals), &la, &lr)?;
        return Ok(ConeEhvi { value, path: ConePath::Exact });
    }
    let imp = Improvement::new(&la, &lr)?;
    let mut g = rng(seed);
    let mut y = vec![0.0; r.len()];
    let mut acc = Moments::default();
    for _ in 0..mc_samples {
        pred.sample_into(&mut g, &mut y);
        acc.push(det * imp.eval(&cone.to_cone_coords(&y))?);
    }
    let est = acc.finish();
    Ok(ConeEhvi {
        value: est.estimate,
        path: ConePath::MonteCarlo { samples: mc_samples, standard_error: est.standard_error },
    })
}

fn truncated_marginals(
    pred: &IndependentGaussianPrediction,
    r: &[f64],
    roi: &AxisBox,
) -> Result<Vec<TruncatedGaussian1D>> {
    if roi.dim() != r.len() {
        return Err(Error::DimensionMismatch { expected: r.len(), got: roi.dim() });
    }
    normalized_marginals(pred, r)
        .into_iter()
        .enumerate()
        .map(|(j, g)| TruncatedGaussian1D::new(g, r[j] - roi.upper[j], r[j] - roi.lower[j]))
        .collect()
}

/// Truncated EHVI: the predictive law conditioned on the region of interest
/// `roi` (minimization coordinates), evaluated with truncated EI transforms.
pub fn tehvi(pred: &IndependentGaussianPrediction, points: &[Vec<f64>], r: &[f64], roi: &AxisBox) -> Result<f64> {
    check_inputs(pred, points, r)?;
    let tg = truncated_marginals(pred, r, roi)?;
    transform_with(pred, points, r, |j, t| truncated_ei_exceed(t, &tg[j]))?.improvement()
}

/// Monte-Carlo TEHVI with inverse-CDF sampling of the truncated marginals.
pub fn tehvi_mc_oracle(
    pred: &IndependentGaussianPrediction,
    points: &[Vec<f64>],
    r: &[f64],
    roi: &AxisBox,
    n_samples: usize,
    seed: u64,
) -> Result<McEstimate> {
    check_inputs(pred, points, r)?;
    let tg = truncated_marginals(pred, r, roi)?;
    let imp = Improvement::new(points, r)?;
    let mut g = rng(seed);
    let mut y = vec![0.0; r.len()];
    let mut acc = Moments::default();
    for _ in 0..n_samples {
        for (j, t) in tg.iter().enumerate() {
            // Sample in the normalized frame and map back.
            y[j] = r[j] - t.sample_from_uniform(g.random());
        }
        acc.push(imp.eval(&y)?);
    }
    Ok(acc.finish())
}

/// Parameters of the variance-monotonicity search. Each trial draws a
/// two-objective instance from a latin hypercube over:
///
/// * means in `[-0.5, 1.5]²`, stds in `[0.05, 1]²`, reference `(1, 1)`;
/// * one coordinate whose std is multiplied by a factor in `[1.2, 4]`;
/// * up to three incumbents in `[0, 1]²`;
/// * a region of interest with lower corner in `[-0.5, 0.8]²` and side
///   lengths in `[0.1, 1]`.
///
/// With `embed_slice` the instance is a one-dimensional problem embedded as
/// a coordinate slice: no incumbents and a fixed, narrow second coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VarianceSearchConfig {
    pub trials: usize,
    pub seed: u64,
    pub embed_slice: bool,
    /// Evaluation tolerance; a counterexample must beat it tenfold.
    pub tolerance: f64,
}

impl Default for VarianceSearchConfig {
    fn default() -> Self {
        Self { trials: 100_000, seed: 0, embed_slice: false, tolerance: 1e-9 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TehviCounterexample {
    pub mu: Vec<f64>,
    pub sigma: Vec<f64>,
    pub sigma_prime: Vec<f64>,
    #[serde(rename = "A")]
    pub a: Vec<Vec<f64>>,
    pub r: Vec<f64>,
    pub roi: AxisBox,
    /// TEHVI at `sigma_prime`.
    pub tehvi_lo: f64,
    /// TEHVI at `sigma`.
    pub tehvi_hi: f64,
    pub seed: u64,
}

impl TehviCounterexample {
    pub fn prediction(&self) -> IndependentGaussianPrediction {
        IndependentGaussianPrediction::from_mean_std(&self.mu, &self.sigma)
    }

    pub fn widened_prediction(&self) -> IndependentGaussianPrediction {
        IndependentGaussianPrediction::from_mean_std(&self.mu, &self.sigma_prime)
    }

    /// Recomputes both TEHVI values.
    pub fn reevaluate(&self) -> Result<(f64, f64)> {
        Ok((
            tehvi(&self.prediction(), &self.a, &self.r, &self.roi)?,
            tehvi(&self.widened_prediction(), &self.a, &self.r, &self.roi)?,
        ))
    }
}

struct Trial {
    mu: Vec<f64>,
    sigma: Vec<f64>,
    sigma_prime: Vec<f64>,
    a: Vec<Vec<f64>>,
    r: Vec<f64>,
    roi: AxisBox,
}

fn draw_trials(cfg: &VarianceSearchConfig) -> Vec<Trial> {
    const LO: [f64; 16] = [-0.5, -0.5, 0.05, 0.05, 1.2, 0.0, -0.5, -0.5, 0.1, 0.1, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0];
    const HI: [f64; 16] = [1.5, 1.5, 1.0, 1.0, 4.0, 2.0, 0.8, 0.8, 1.0, 1.0, 4.0, 1.0, 1.0, 1.0, 1.0, 1.0];
    let mut g = rng(cfg.seed);
    let unit = latin_hypercube(&mut g, cfg.trials, &LO, &HI);
    unit.into_iter()
        .map(|u| {
            let mut mu = vec![u[0], u[1]];
            let mut sigma = vec![u[2], u[3]];
            let j = (u[5] as usize).min(1);
            let mut roi_lo = vec![u[6], u[7]];
            let mut roi_hi = vec![u[6] + u[8], u[7] + u[9]];
            let mut a: Vec<Vec<f64>> =
                (0..(u[10] as usize).min(3)).map(|k| vec![u[11 + k], u[(12 + k).min(15)]]).collect();
            let j = if cfg.embed_slice {
                a.clear();
                mu[1] = 0.5;
                sigma[1] = 0.2;
                roi_lo[1] = 0.0;
                roi_hi[1] = 1.0;
                0
            } else {
                j
            };
            let mut sigma_prime = sigma.clone();
            sigma_prime[j] *= u[4];
            Trial {
                mu,
                sigma,
                sigma_prime,
                a,
                r: vec![1.0, 1.0],
                roi: AxisBox { lower: roi_lo, upper: roi_hi },
            }
        })
        .collect()
}

/// Searches for an instance where widening one predictive std strictly
/// lowers TEHVI, returning the largest violation found.
pub fn find_tehvi_variance_counterexample(cfg: &VarianceSearchConfig) -> Result<TehviCounterexample> {
    let mut best: Option<TehviCounterexample> = None;
    for t in draw_trials(cfg) {
        let base = IndependentGaussianPrediction::from_mean_std(&t.mu, &t.sigma);
        let wide = IndependentGaussianPrediction::from_mean_std(&t.mu, &t.sigma_prime);
        let (Ok(hi), Ok(lo)) = (tehvi(&base, &t.a, &t.r, &t.roi), tehvi(&wide, &t.a, &t.r, &t.roi)) else {
            continue;
        };
        let gap = hi - lo;
        if gap > 10.0 * cfg.tolerance && best.as_ref().is_none_or(|b| gap > b.tehvi_hi - b.tehvi_lo) {
            best = Some(TehviCounterexample {
                mu: t.mu,
                sigma: t.sigma,
                sigma_prime: t.sigma_prime,
                a: t.a,
                r: t.r,
                roi: t.roi,
                tehvi_lo: lo,
                tehvi_hi: hi,
                seed: cfg.seed,
            });
        }
    }
    best.ok_or(Error::SearchExhausted { trials: cfg.trials })
}

/// Runs the same search against canonical EHVI and counts trials where
/// widening a std lowers EHVI by more than `cfg.tolerance`.
pub fn canonical_variance_violations(cfg: &VarianceSearchConfig) -> Result<usize> {
    let mut count = 0;
    for t in draw_trials(cfg) {
        let base = IndependentGaussianPrediction::from_mean_std(&t.mu, &t.sigma);
        let wide = IndependentGaussianPrediction::from_mean_std(&t.mu, &t.sigma_prime);
        if ehvi_exact(&wide, &t.a, &t.r)? < ehvi_exact(&base, &t.a, &t.r)? - cfg.tolerance {
            count += 1;
        }
    }
    Ok(count)
}
