//! Scalar Gaussian-process regression with a squared-exponential ARD kernel.
//!
//! Targets are standardized per model (zero prior mean in standardized
//! units); `predict` maps back to raw units, `predict_standardized` does not.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::Gaussian1D;

pub const DEFAULT_JITTER: f64 = 1e-10;
const MAX_JITTER: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Kernel {
    pub signal_variance: f64,
    pub length_scales: Vec<f64>,
    pub noise_variance: f64,
    #[serde(default = "default_jitter")]
    pub jitter: f64,
}

fn default_jitter() -> f64 {
    DEFAULT_JITTER
}

impl Kernel {
    pub fn new(signal_variance: f64, length_scales: Vec<f64>, noise_variance: f64) -> Result<Self> {
        if !(signal_variance > 0.0) || length_scales.iter().any(|l| !(*l > 0.0)) || !(noise_variance >= 0.0) {
            return Err(Error::GpFit(format!(
                "invalid kernel: signal {signal_variance}, lengths {length_scales:?}, noise {noise_variance}"
            )));
        }
        Ok(Self { signal_variance, length_scales, noise_variance, jitter: DEFAULT_JITTER })
    }

    pub fn isotropic(signal_variance: f64, length_scale: f64, dim: usize, noise_variance: f64) -> Result<Self> {
        Self::new(signal_variance, vec![length_scale; dim], noise_variance)
    }

    pub fn dim(&self) -> usize {
        self.length_scales.len()
    }

    pub fn eval(&self, a: &[f64], b: &[f64]) -> f64 {
        let d2: f64 = a
            .iter()
            .zip(b)
            .zip(&self.length_scales)
            .map(|((x, y), l)| ((x - y) / l).powi(2))
            .sum();
        self.signal_variance * (-0.5 * d2).exp()
    }

    /// `(signal_variance, length_scale, noise)` triples, isotropic lengths.
    pub fn grid(dim: usize, signals: &[f64], lengths: &[f64], noises: &[f64]) -> Result<Vec<Kernel>> {
        let mut out = Vec::with_capacity(signals.len() * lengths.len() * noises.len());
        for s in signals {
            for l in lengths {
                for n in noises {
                    out.push(Self::isotropic(*s, *l, dim, *n)?);
                }
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone)]
pub struct GpModel {
    inputs: Vec<Vec<f64>>,
    targets: Vec<f64>,
    kernel: Kernel,
    offset: f64,
    scale: f64,
    chol: Cholesky<f64, Dyn>,
    alpha: DVector<f64>,
    jitter_used: f64,
}

fn standardize(targets: &[f64]) -> (f64, f64) {
    let n = targets.len() as f64;
    let mean = targets.iter().sum::<f64>() / n;
    let var = targets.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / n;
    let sd = var.sqrt();
    (mean, if sd > 1e-12 { sd } else { 1.0 })
}

impl GpModel {
    pub fn fit(inputs: &[Vec<f64>], targets: &[f64], kernel: &Kernel) -> Result<Self> {
        if inputs.is_empty() {
            return Err(Error::GpFit("no training points".into()));
        }
        if inputs.len() != targets.len() {
            return Err(Error::LengthMismatch { left: inputs.len(), right: targets.len() });
        }
        if let Some(x) = inputs.iter().find(|x| x.len() != kernel.dim()) {
            return Err(Error::DimensionMismatch { expected: kernel.dim(), got: x.len() });
        }
        if targets.iter().any(|t| !t.is_finite()) {
            return Err(Error::GpFit("non-finite target".into()));
        }
        let n = inputs.len();
        let gram = DMatrix::from_fn(n, n, |i, j| kernel.eval(&inputs[i], &inputs[j]));
        let (offset, scale) = standardize(targets);
        let y = DVector::from_iterator(n, targets.iter().map(|t| (t - offset) / scale));
        let mut jitter = kernel.jitter;
        loop {
            let mut k = gram.clone();
            for i in 0..n {
                k[(i, i)] += kernel.noise_variance + jitter;
            }
            if let Some(chol) = Cholesky::new(k) {
                let alpha = chol.solve(&y);
                return Ok(Self {
                    inputs: inputs.to_vec(),
                    targets: targets.to_vec(),
                    kernel: kernel.clone(),
                    offset,
                    scale,
                    chol,
                    alpha,
                    jitter_used: jitter,
                });
            }
            jitter *= 10.0;
            if jitter > MAX_JITTER * (1.0 + 1e-9) {
                return Err(Error::GpFit(format!("kernel matrix not positive definite with jitter {MAX_JITTER}")));
            }
        }
    }

    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    pub fn jitter_used(&self) -> f64 {
        self.jitter_used
    }

    /// Posterior of the latent function in standardized units.
    pub fn predict_standardized(&self, x: &[f64]) -> Gaussian1D {
        let ks = DVector::from_iterator(self.inputs.len(), self.inputs.iter().map(|xi| self.kernel.eval(xi, x)));
        let mean = ks.dot(&self.alpha);
        let v = self.chol.l_dirty().solve_lower_triangular(&ks).expect("nonsingular factor");
        let var = self.kernel.signal_variance - v.dot(&v);
        Gaussian1D::new(mean, var.max(0.0).sqrt())
    }

    /// Posterior in raw target units.
    pub fn predict(&self, x: &[f64]) -> Gaussian1D {
        let g = self.predict_standardized(x);
        Gaussian1D::new(self.offset + self.scale * g.mean, self.scale * g.std)
    }

    /// Log marginal likelihood of the standardized targets.
    pub fn log_marginal_likelihood(&self) -> f64 {
        let n = self.inputs.len();
        let y = &self.alpha;
        let ys = DVector::from_iterator(n, self.targets.iter().map(|t| (t - self.offset) / self.scale));
        let log_det: f64 = self.chol.l_dirty().diagonal().iter().map(|d| d.ln()).sum();
        -0.5 * ys.dot(y) - log_det - 0.5 * n as f64 * (2.0 * std::f64::consts::PI).ln()
    }
}

/// Grid member maximizing the log marginal likelihood; ties keep the first.
pub fn select_hyperparameters(inputs: &[Vec<f64>], targets: &[f64], grid: &[Kernel]) -> Result<Kernel> {
    select_shared_hyperparameters(inputs, std::slice::from_ref(&targets.to_vec()), grid)
}

/// One kernel for several target sets on the same inputs, maximizing the
/// summed log marginal likelihood.
pub fn select_shared_hyperparameters(inputs: &[Vec<f64>], target_sets: &[Vec<f64>], grid: &[Kernel]) -> Result<Kernel> {
    if grid.is_empty() {
        return Err(Error::GpFit("empty hyperparameter grid".into()));
    }
    let mut best: Option<(f64, &Kernel)> = None;
    let mut last_err = None;
    'grid: for k in grid {
        let mut total = 0.0;
        for t in target_sets {
            match GpModel::fit(inputs, t, k) {
                Ok(m) => total += m.log_marginal_likelihood(),
                Err(e) => {
                    last_err = Some(e);
                    continue 'grid;
                }
            }
        }
        if total.is_finite() && best.is_none_or(|(b, _)| total > b) {
            best = Some((total, k));
        }
    }
    match best {
        Some((_, k)) => Ok(k.clone()),
        None => Err(last_err.unwrap_or_else(|| Error::GpFit("no grid kernel gave a finite likelihood".into()))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::rng;
    use rand::Rng;

    fn k1(sv: f64, l: f64) -> Kernel {
        Kernel::isotropic(sv, l, 1, 0.0).unwrap()
    }

    /// Dense re-solve in standardized units.
    fn dense(inputs: &[Vec<f64>], targets: &[f64], k: &Kernel, x: &[f64]) -> (f64, f64) {
        let n = inputs.len();
        let (m0, s0) = standardize(targets);
        let kk = DMatrix::from_fn(n, n, |i, j| {
            k.eval(&inputs[i], &inputs[j]) + if i == j { k.noise_variance + k.jitter } else { 0.0 }
        });
        let inv = kk.try_inverse().unwrap();
        let ks = DVector::from_iterator(n, inputs.iter().map(|xi| k.eval(xi, x)));
        let y = DVector::from_iterator(n, targets.iter().map(|t| (t - m0) / s0));
        let mean = (ks.transpose() * &inv * y)[(0, 0)];
        let var = k.signal_variance - (ks.transpose() * &inv * &ks)[(0, 0)];
        (m0 + s0 * mean, s0 * s0 * var)
    }

    #[test]
    fn single_point_interpolates() {
        let m = GpModel::fit(&[vec![0.3]], &[2.5], &k1(1.0, 0.2)).unwrap();
        let g = m.predict(&[0.3]);
        assert!((g.mean - 2.5).abs() < 1e-8);
        assert!(g.std < 1e-4);
    }

    #[test]
    fn two_points() {
        let k = k1(1.3, 0.4);
        let xs = vec![vec![0.1], vec![0.7]];
        let ys = [1.0, -0.5];
        let m = GpModel::fit(&xs, &ys, &k).unwrap();
        assert!((m.predict(&[0.7]).mean + 0.5).abs() < 1e-8);
        // Closed-form 2×2 solve.
        let (m0, s0) = standardize(&ys);
        let a = k.signal_variance + k.jitter;
        let b = k.eval(&xs[0], &xs[1]);
        let det = a * a - b * b;
        let yst = [(ys[0] - m0) / s0, (ys[1] - m0) / s0];
        let alpha = [(a * yst[0] - b * yst[1]) / det, (-b * yst[0] + a * yst[1]) / det];
        let x = [0.4];
        let ks = [k.eval(&xs[0], &x), k.eval(&xs[1], &x)];
        let mean = m0 + s0 * (ks[0] * alpha[0] + ks[1] * alpha[1]);
        let quad = (a * ks[0] * ks[0] - 2.0 * b * ks[0] * ks[1] + a * ks[1] * ks[1]) / det;
        let sd = s0 * (k.signal_variance - quad).sqrt();
        let g = m.predict(&x);
        assert!((g.mean - mean).abs() < 1e-10);
        assert!((g.std - sd).abs() < 1e-10);
    }

    #[test]
    fn prior_reversion_far_away() {
        let k = Kernel::isotropic(2.0, 0.1, 2, 0.0).unwrap();
        let xs = vec![vec![0.0, 0.0], vec![0.1, 0.05], vec![0.2, 0.1]];
        let m = GpModel::fit(&xs, &[1.0, 3.0, 2.0], &k).unwrap();
        let g = m.predict_standardized(&[5.0, 5.0]);
        assert!(g.mean.abs() < 1e-6);
        assert!((g.std - 2f64.sqrt()).abs() < 1e-6);
        let raw = m.predict(&[5.0, 5.0]);
        assert!((raw.mean - 2.0).abs() < 1e-6);
    }

    #[test]
    fn matches_dense_solve() {
        let mut g = rng(11);
        for _ in 0..20 {
            let k = Kernel::new(g.random_range(0.5..2.0), vec![g.random_range(0.2..1.0), g.random_range(0.2..1.0)], 1e-4)
                .unwrap();
            let xs: Vec<Vec<f64>> = (0..5).map(|_| vec![g.random_range(0.0..1.0), g.random_range(0.0..1.0)]).collect();
            let ys: Vec<f64> = (0..5).map(|_| g.random_range(-2.0..2.0)).collect();
            let m = GpModel::fit(&xs, &ys, &k).unwrap();
            let x = [g.random_range(0.0..1.0), g.random_range(0.0..1.0)];
            let (mean, var) = dense(&xs, &ys, &k, &x);
            let p = m.predict(&x);
            assert!((p.mean - mean).abs() < 1e-9);
            assert!((p.std * p.std - var).abs() < 1e-9);
        }
    }

    #[test]
    fn variance_properties() {
        let mut g = rng(12);
        for _ in 0..30 {
            let k = k1(g.random_range(0.5..2.0), g.random_range(0.1..0.5));
            let mut xs: Vec<Vec<f64>> = (0..4).map(|_| vec![g.random_range(0.0..1.0)]).collect();
            let ys: Vec<f64> = (0..5).map(|_| g.random_range(-1.0..1.0)).collect();
            let q = [g.random_range(0.0..1.0)];
            let m = GpModel::fit(&xs, &ys[..4], &k).unwrap();
            let s4 = m.predict_standardized(&q).std;
            assert!(s4 * s4 <= k.signal_variance + 1e-9);
            xs.push(vec![g.random_range(0.0..1.0)]);
            let m5 = GpModel::fit(&xs, &ys, &k).unwrap();
            // Latent variance does not depend on targets.
            assert!(m5.predict_standardized(&q).std <= s4 + 1e-9);
        }
    }

    #[test]
    fn duplicates_are_regularized() {
        let m = GpModel::fit(&[vec![0.5], vec![0.5]], &[1.0, 1.0], &k1(1.0, 0.3)).unwrap();
        assert!(m.log_marginal_likelihood().is_finite());
        assert!((m.predict(&[0.5]).mean - 1.0).abs() < 1e-6);
    }

    #[test]
    fn selection() {
        let xs: Vec<Vec<f64>> = (0..8).map(|i| vec![i as f64 / 7.0]).collect();
        let ys: Vec<f64> = xs.iter().map(|x| (6.0 * x[0]).sin()).collect();
        let only = vec![k1(1.0, 0.3)];
        assert_eq!(select_hyperparameters(&xs, &ys, &only).unwrap(), only[0]);

        let grid = Kernel::grid(1, &[1.0], &[0.02, 0.25, 3.0], &[1e-6]).unwrap();
        let chosen = select_hyperparameters(&xs, &ys, &grid).unwrap();
        let lml: Vec<f64> =
            grid.iter().map(|k| GpModel::fit(&xs, &ys, k).unwrap().log_marginal_likelihood()).collect();
        let best = (0..3).fold(0, |b, i| if lml[i] > lml[b] { i } else { b });
        assert_eq!(chosen, grid[best]);
        assert_eq!(best, 1);

        let flat = vec![0.7; 8];
        let grid = Kernel::grid(1, &[2.0, 0.5, 1.0], &[0.3], &[1e-4]).unwrap();
        assert_eq!(select_hyperparameters(&xs, &flat, &grid).unwrap().signal_variance, 0.5);

        let dup = vec![k1(1.0, 0.3), k1(1.0, 0.3)];
        assert_eq!(select_hyperparameters(&xs, &ys, &dup).unwrap(), dup[0]);
        assert!(select_hyperparameters(&xs, &ys, &[]).is_err());
    }
}
