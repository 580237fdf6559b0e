//! R2 geometry: weighted Tchebycheff scalarizations, scalarization envelopes,
//! discrete and integral R2, Tchebycheff shadows and simplex quadrature.
//!
//! Conventions: minimization orientation; for two objectives a weight is
//! parameterized as `(λ, 1 - λ)` with `λ ∈ [0, 1]` and the simplex measure is
//! Lebesgue measure in `λ`. For three or more objectives quadrature weights
//! are normalized to sum to one (normalized surface measure).

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{hypervolume, pareto_filter_indices, reduced_magnitude_box};
use crate::quad::{gauss_legendre_on, simpson};
use crate::sampling::{halton, PRIMES};

const BREAK_TOL: f64 = 1e-12;

/// Utopian point `z⁺` and reference point `r`, minimization orientation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TchebycheffParams {
    pub utopian: Vec<f64>,
    pub reference: Vec<f64>,
}

impl TchebycheffParams {
    pub fn new(utopian: Vec<f64>, reference: Vec<f64>) -> Result<Self> {
        if utopian.len() != reference.len() {
            return Err(Error::DimensionMismatch { expected: utopian.len(), got: reference.len() });
        }
        Ok(Self { utopian, reference })
    }

    /// `z⁺ = 0`, `r = 1` in `m` objectives.
    pub fn unit(m: usize) -> Self {
        Self { utopian: vec![0.0; m], reference: vec![1.0; m] }
    }

    pub fn dim(&self) -> usize {
        self.utopian.len()
    }
}

/// A point of the weight simplex.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Weight(Vec<f64>);

impl Weight {
    pub fn new(lambda: Vec<f64>) -> Result<Self> {
        if lambda.is_empty() {
            return Err(Error::InvalidWeight("empty weight".into()));
        }
        if lambda.iter().any(|l| !(*l >= 0.0)) {
            return Err(Error::InvalidWeight(format!("negative or NaN component in {lambda:?}")));
        }
        let s: f64 = lambda.iter().sum();
        if (s - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidWeight(format!("components sum to {s}")));
        }
        Ok(Self(lambda))
    }

    /// Rescales a nonnegative vector onto the simplex.
    pub fn normalized(v: &[f64]) -> Result<Self> {
        let s: f64 = v.iter().sum();
        if !(s > 0.0) {
            return Err(Error::InvalidWeight("cannot normalize zero vector".into()));
        }
        Self::new(v.iter().map(|x| x / s).collect())
    }

    /// `(λ, 1 - λ)`.
    pub fn bi(lambda: f64) -> Self {
        let l = lambda.clamp(0.0, 1.0);
        Self(vec![l, 1.0 - l])
    }

    /// `k` evenly spaced two-objective weights, `(i / (k - 1), 1 - i / (k - 1))`.
    pub fn uniform_bi(k: usize) -> Vec<Weight> {
        if k == 1 {
            return vec![Weight::bi(0.5)];
        }
        (0..k).map(|i| Weight::bi(i as f64 / (k - 1) as f64)).collect()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }
}

impl TryFrom<Vec<f64>> for Weight {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Weight::new(v)
    }
}

impl From<Weight> for Vec<f64> {
    fn from(w: Weight) -> Self {
        w.0
    }
}

/// `g_λ(y; z⁺) = max_i λ_i (y_i - z⁺_i)`; zero weight components contribute 0.
pub fn tcheby_value(y: &[f64], w: &Weight, p: &TchebycheffParams) -> f64 {
    debug_assert_eq!(y.len(), w.dim());
    y.iter()
        .zip(&p.utopian)
        .zip(w.as_slice())
        .map(|((yi, zi), li)| if *li == 0.0 { 0.0 } else { li * (yi - zi) })
        .fold(f64::NEG_INFINITY, f64::max)
}

fn check_points(points: &[Vec<f64>], p: &TchebycheffParams) -> Result<()> {
    for a in points {
        if a.len() != p.dim() {
            return Err(Error::DimensionMismatch { expected: p.dim(), got: a.len() });
        }
    }
    Ok(())
}

/// `h_A(λ) = min_a g_λ(a)` with the lowest-index minimizer as witness.
pub fn envelope_value(points: &[Vec<f64>], w: &Weight, p: &TchebycheffParams) -> Result<(f64, usize)> {
    if points.is_empty() {
        return Err(Error::EmptySet);
    }
    check_points(points, p)?;
    if w.dim() != p.dim() {
        return Err(Error::DimensionMismatch { expected: p.dim(), got: w.dim() });
    }
    let mut best = (f64::INFINITY, 0);
    for (i, a) in points.iter().enumerate() {
        let g = tcheby_value(a, w, p);
        if g < best.0 {
            best = (g, i);
        }
    }
    Ok(best)
}

/// `h_r(λ)`.
pub fn reference_envelope(w: &Weight, p: &TchebycheffParams) -> f64 {
    tcheby_value(&p.reference, w, p)
}

/// Nonnegative density on the weight simplex.
#[derive(Clone, Default)]
pub enum WeightDensity {
    #[default]
    Uniform,
    /// Two objectives only: piecewise polynomial of degree ≤ 2 in `λ₁`.
    Piecewise(PiecewiseQuadratic),
    /// Arbitrary evaluator; only usable with quadrature.
    Custom(Arc<dyn Fn(&Weight) -> f64 + Send + Sync>),
}

impl fmt::Debug for WeightDensity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightDensity::Uniform => write!(f, "Uniform"),
            WeightDensity::Piecewise(p) => f.debug_tuple("Piecewise").field(p).finish(),
            WeightDensity::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

impl WeightDensity {
    pub fn eval(&self, w: &Weight) -> f64 {
        match self {
            WeightDensity::Uniform => 1.0,
            WeightDensity::Piecewise(p) => p.eval(w.as_slice()[0]),
            WeightDensity::Custom(f) => f(w).max(0.0),
        }
    }

    fn eval_bi(&self, lambda: f64) -> Result<f64> {
        match self {
            WeightDensity::Uniform => Ok(1.0),
            WeightDensity::Piecewise(p) => Ok(p.eval(lambda)),
            WeightDensity::Custom(_) => {
                Err(Error::UnsupportedDensity("custom densities need a quadrature rule".into()))
            }
        }
    }

    /// Density restricted to the smooth piece containing `mid`, so that
    /// endpoint evaluations on a cell ignore jumps at the cell boundary.
    pub(crate) fn piece_near(&self, mid: f64) -> impl Fn(f64) -> f64 + '_ {
        move |x| match self {
            WeightDensity::Piecewise(p) => p.piece_value(p.piece_index(mid), x).max(0.0),
            _ => self.eval_bi(x).unwrap_or(0.0),
        }
    }

    pub(crate) fn breaks(&self) -> &[f64] {
        match self {
            WeightDensity::Piecewise(p) => &p.breaks,
            _ => &[],
        }
    }
}

/// `ρ(λ) = c₀ + c₁ λ + c₂ λ²` on each `[breaks[i], breaks[i+1]]`, covering `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PiecewiseFields", into = "PiecewiseFields")]
pub struct PiecewiseQuadratic {
    breaks: Vec<f64>,
    coeffs: Vec<[f64; 3]>,
}

/// Serialized form; deserialization goes through [`PiecewiseQuadratic::new`].
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PiecewiseFields {
    breaks: Vec<f64>,
    coeffs: Vec<[f64; 3]>,
}

impl TryFrom<PiecewiseFields> for PiecewiseQuadratic {
    type Error = Error;

    fn try_from(f: PiecewiseFields) -> Result<Self> {
        Self::new(f.breaks, f.coeffs)
    }
}

impl From<PiecewiseQuadratic> for PiecewiseFields {
    fn from(p: PiecewiseQuadratic) -> Self {
        Self { breaks: p.breaks, coeffs: p.coeffs }
    }
}

impl PiecewiseQuadratic {
    pub fn new(breaks: Vec<f64>, coeffs: Vec<[f64; 3]>) -> Result<Self> {
        if breaks.len() != coeffs.len() + 1 || coeffs.is_empty() {
            return Err(Error::UnsupportedDensity("need one coefficient triple per piece".into()));
        }
        if breaks[0] != 0.0 || *breaks.last().unwrap() != 1.0 || breaks.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::UnsupportedDensity("breaks must increase from 0 to 1".into()));
        }
        let d = Self { breaks, coeffs };
        for (i, w) in d.breaks.windows(2).enumerate() {
            for k in 0..=8 {
                let x = w[0] + (w[1] - w[0]) * k as f64 / 8.0;
                if d.piece_value(i, x) < 0.0 {
                    return Err(Error::UnsupportedDensity(format!("negative density at {x}")));
                }
            }
        }
        Ok(d)
    }

    fn piece_value(&self, i: usize, x: f64) -> f64 {
        let c = self.coeffs[i];
        c[0] + x * (c[1] + x * c[2])
    }

    fn piece_index(&self, x: f64) -> usize {
        self.breaks.partition_point(|b| *b <= x).clamp(1, self.coeffs.len()) - 1
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.piece_value(self.piece_index(x), x).max(0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeSegment {
    pub slope: f64,
    pub intercept: f64,
    /// Index (into the input set) of a point attaining the envelope here.
    pub witness: usize,
}

impl EnvelopeSegment {
    #[inline]
    pub fn at(&self, lambda: f64) -> f64 {
        self.intercept + self.slope * lambda
    }
}

/// Exact piecewise-linear envelope `λ ↦ h_A(λ)` for two objectives.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseLinearEnvelope {
    /// Sorted, from 0 to 1; one more entry than `segments`.
    breakpoints: Vec<f64>,
    segments: Vec<EnvelopeSegment>,
}

impl PiecewiseLinearEnvelope {
    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn segments(&self) -> &[EnvelopeSegment] {
        &self.segments
    }

    fn segment_index(&self, lambda: f64) -> usize {
        let i = self.breakpoints.partition_point(|b| *b <= lambda);
        i.clamp(1, self.segments.len()) - 1
    }

    pub fn segment_at(&self, lambda: f64) -> &EnvelopeSegment {
        &self.segments[self.segment_index(lambda)]
    }

    pub fn value(&self, lambda: f64) -> f64 {
        self.segment_at(lambda).at(lambda)
    }

    /// Envelope of the reference point alone, `h_r`.
    pub fn reference(p: &TchebycheffParams) -> Result<Self> {
        envelope_piecewise_2d(std::slice::from_ref(&p.reference), p)
    }

    fn push(&mut self, end: f64, seg: EnvelopeSegment) {
        let start = *self.breakpoints.last().unwrap();
        if end - start <= BREAK_TOL {
            return;
        }
        if let Some(last) = self.segments.last_mut() {
            if (last.slope - seg.slope).abs() <= BREAK_TOL && (last.intercept - seg.intercept).abs() <= BREAK_TOL {
                *self.breakpoints.last_mut().unwrap() = end;
                return;
            }
        }
        self.segments.push(seg);
        self.breakpoints.push(end);
    }

    fn finish(mut self) -> Self {
        if self.segments.is_empty() {
            // Degenerate input; fall back to a single segment.
            return self;
        }
        *self.breakpoints.last_mut().unwrap() = 1.0;
        self
    }
}

/// Lines `λ a'₁` and `(1 - λ) a'₂` whose maximum is `g_λ(a)`.
fn point_lines(a: &[f64], z: &[f64]) -> [(f64, f64); 2] {
    let a1 = a[0] - z[0];
    let a2 = a[1] - z[1];
    [(a1, 0.0), (-a2, a2)]
}

/// Builds the lower envelope of `λ ↦ max(λ a'₁, (1 - λ) a'₂)` over `points`.
pub fn envelope_piecewise_2d(points: &[Vec<f64>], p: &TchebycheffParams) -> Result<PiecewiseLinearEnvelope> {
    if p.dim() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, got: p.dim() });
    }
    if points.is_empty() {
        return Err(Error::EmptySet);
    }
    check_points(points, p)?;
    let z = &p.utopian;
    if points.iter().all(|a| a[0] >= z[0] && a[1] >= z[1]) {
        Ok(envelope_sorted(points, z))
    } else {
        Ok(envelope_by_arrangement(points, z))
    }
}

/// O(n log n) construction for points weakly above the utopian point.
///
/// After filtering and sorting by the first shifted coordinate, kinks
/// `κ_i = a'₂ / (a'₁ + a'₂)` decrease with `i`; between consecutive kinks the
/// envelope is the minimum of the rising line of point `i` and the falling
/// line of point `i - 1`.
fn envelope_sorted(points: &[Vec<f64>], z: &[f64]) -> PiecewiseLinearEnvelope {
    let mut idx = pareto_filter_indices(points);
    idx.sort_by(|&i, &j| points[i][0].total_cmp(&points[j][0]).then(i.cmp(&j)));
    let shifted = |i: usize| (points[i][0] - z[0], points[i][1] - z[1]);

    let mut env = PiecewiseLinearEnvelope { breakpoints: vec![0.0], segments: Vec::new() };
    if let Some(&i0) = idx.iter().find(|&&i| shifted(i) == (0.0, 0.0)) {
        env.push(1.0, EnvelopeSegment { slope: 0.0, intercept: 0.0, witness: i0 });
        return env.finish();
    }
    let kink = |i: usize| {
        let (a1, a2) = shifted(i);
        a2 / (a1 + a2)
    };
    let n = idx.len();
    // Walk λ upward: points in reverse sorted order.
    for k in (0..n).rev() {
        let i = idx[k];
        let (a1, a2) = shifted(i);
        let falling = EnvelopeSegment { slope: -a2, intercept: a2, witness: i };
        let rising = EnvelopeSegment { slope: a1, intercept: 0.0, witness: i };
        env.push(kink(i), falling);
        let end = if k == 0 {
            1.0
        } else {
            let (_, b2) = shifted(idx[k - 1]);
            b2 / (a1 + b2)
        };
        env.push(end, rising);
    }
    env.finish()
}

/// General construction: candidate breakpoints from every pairwise line
/// crossing, then the minimizing line on each cell.
fn envelope_by_arrangement(points: &[Vec<f64>], z: &[f64]) -> PiecewiseLinearEnvelope {
    let lines: Vec<[(f64, f64); 2]> = points.iter().map(|a| point_lines(a, z)).collect();
    let flat: Vec<(f64, f64)> = lines.iter().flat_map(|l| l.iter().copied()).collect();
    let mut cuts = vec![0.0, 1.0];
    for i in 0..flat.len() {
        for j in (i + 1)..flat.len() {
            let ds = flat[i].0 - flat[j].0;
            if ds.abs() > 1e-300 {
                let x = (flat[j].1 - flat[i].1) / ds;
                if x > 0.0 && x < 1.0 {
                    cuts.push(x);
                }
            }
        }
    }
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|a, b| (*a - *b).abs() <= BREAK_TOL);
    let mut env = PiecewiseLinearEnvelope { breakpoints: vec![0.0], segments: Vec::new() };
    for w in cuts.windows(2) {
        let mid = 0.5 * (w[0] + w[1]);
        let mut best: Option<EnvelopeSegment> = None;
        for (i, l) in lines.iter().enumerate() {
            let active = if l[0].0 * mid + l[0].1 >= l[1].0 * mid + l[1].1 { l[0] } else { l[1] };
            let v = active.0 * mid + active.1;
            if best.is_none_or(|b| v < b.at(mid)) {
                best = Some(EnvelopeSegment { slope: active.0, intercept: active.1, witness: i });
            }
        }
        env.push(w[1], best.expect("nonempty set"));
    }
    env.finish()
}

/// Sorted union of the breakpoints of several envelopes and extra cuts.
fn merged_breaks(envs: &[&PiecewiseLinearEnvelope], extra: &[f64]) -> Vec<f64> {
    let mut cuts: Vec<f64> = envs.iter().flat_map(|e| e.breakpoints.iter().copied()).collect();
    cuts.extend(extra.iter().copied().filter(|x| (0.0..=1.0).contains(x)));
    cuts.push(0.0);
    cuts.push(1.0);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|a, b| (*a - *b).abs() <= BREAK_TOL);
    cuts
}

/// Cells on which both envelopes are linear and their difference keeps one sign.
fn gap_cells(upper: &PiecewiseLinearEnvelope, lower: &PiecewiseLinearEnvelope, rho: &WeightDensity) -> Vec<(f64, f64)> {
    let cuts = merged_breaks(&[upper, lower], rho.breaks());
    let mut cells = Vec::with_capacity(cuts.len());
    for w in cuts.windows(2) {
        let (u, v) = (w[0], w[1]);
        let mid = 0.5 * (u + v);
        let (su, sl) = (upper.segment_at(mid), lower.segment_at(mid));
        let du = su.at(u) - sl.at(u);
        let dv = su.at(v) - sl.at(v);
        if du * dv < 0.0 {
            let x = u + du / (du - dv) * (v - u);
            cells.push((u, x));
            cells.push((x, v));
        } else {
            cells.push((u, v));
        }
    }
    cells
}

/// `∫₀¹ (upper(λ) - lower(λ))₊ ρ(λ) dλ`, exact for piecewise-quadratic `ρ`.
pub fn clipped_gap_integral(
    upper: &PiecewiseLinearEnvelope,
    lower: &PiecewiseLinearEnvelope,
    rho: &WeightDensity,
) -> Result<f64> {
    rho.eval_bi(0.5)?;
    let mut total = 0.0;
    for (u, v) in gap_cells(upper, lower, rho) {
        let mid = 0.5 * (u + v);
        let (su, sl) = (*upper.segment_at(mid), *lower.segment_at(mid));
        if su.at(mid) - sl.at(mid) <= 0.0 {
            continue;
        }
        let dens = rho.piece_near(mid);
        total += simpson(|x| (su.at(x) - sl.at(x)).max(0.0) * dens(x), u, v);
    }
    Ok(total)
}

/// `∫₀¹ h(λ) ρ(λ) dλ` for one envelope.
pub fn envelope_integral(env: &PiecewiseLinearEnvelope, rho: &WeightDensity) -> Result<f64> {
    rho.eval_bi(0.5)?;
    let cuts = merged_breaks(&[env], rho.breaks());
    Ok(cuts
        .windows(2)
        .map(|w| {
            let mid = 0.5 * (w[0] + w[1]);
            let s = *env.segment_at(mid);
            let dens = rho.piece_near(mid);
            simpson(|x| s.at(x) * dens(x), w[0], w[1])
        })
        .sum())
}

/// Exact integral R2 value `∫ h_A ρ` for two objectives.
pub fn r2_value_exact_2d(points: &[Vec<f64>], p: &TchebycheffParams, rho: &WeightDensity) -> Result<f64> {
    envelope_integral(&envelope_piecewise_2d(points, p)?, rho)
}

/// Exact integral R2 improvement `∫ (h_r - h_A)₊ ρ` for two objectives.
pub fn r2_improvement_exact_2d(points: &[Vec<f64>], p: &TchebycheffParams, rho: &WeightDensity) -> Result<f64> {
    let ha = envelope_piecewise_2d(points, p)?;
    let hr = PiecewiseLinearEnvelope::reference(p)?;
    clipped_gap_integral(&hr, &ha, rho)
}

/// Mean envelope value over a finite weight set.
pub fn discrete_r2(points: &[Vec<f64>], weights: &[Weight], p: &TchebycheffParams) -> Result<f64> {
    if weights.is_empty() {
        return Err(Error::EmptyWeights);
    }
    let mut s = 0.0;
    for w in weights {
        s += envelope_value(points, w, p)?.0;
    }
    Ok(s / weights.len() as f64)
}

/// Mean clipped gap `(h_r - h_A)₊` over a finite weight set.
pub fn discrete_r2_improvement(points: &[Vec<f64>], weights: &[Weight], p: &TchebycheffParams) -> Result<f64> {
    if weights.is_empty() {
        return Err(Error::EmptyWeights);
    }
    let mut s = 0.0;
    for w in weights {
        s += (reference_envelope(w, p) - envelope_value(points, w, p)?.0).max(0.0);
    }
    Ok(s / weights.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RuleKind {
    GaussLegendre,
    CollapsedGauss,
    Subdivision,
    Halton,
}

/// Nodes and positive weights on the simplex; weights sum to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimplexQuadratureRule {
    pub nodes: Vec<Weight>,
    pub weights: Vec<f64>,
    pub kind: RuleKind,
}

impl SimplexQuadratureRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.nodes.first().map_or(0, Weight::dim)
    }

    /// `n`-point Gauss–Legendre rule in `λ` for two objectives.
    pub fn gauss_legendre(n: usize) -> Self {
        let (x, w) = gauss_legendre_on(n, 0.0, 1.0);
        Self { nodes: x.into_iter().map(Weight::bi).collect(), weights: w, kind: RuleKind::GaussLegendre }
    }

    /// Tensor Gauss–Legendre rule on `[0, 1]^{m-1}` pushed onto the simplex by
    /// the collapsed (Duffy) map; `n^{m-1}` nodes.
    pub fn collapsed_gauss(m: usize, n: usize) -> Self {
        assert!(m >= 2);
        if m == 2 {
            return Self::gauss_legendre(n);
        }
        let (x, w) = gauss_legendre_on(n, 0.0, 1.0);
        let d = m - 1;
        let total = n.pow(d as u32);
        let factorial: f64 = (1..=d).map(|k| k as f64).product();
        let mut nodes = Vec::with_capacity(total);
        let mut weights = Vec::with_capacity(total);
        for flat in 0..total {
            let mut rem = flat;
            let mut lambda = Vec::with_capacity(m);
            let mut left = 1.0;
            let mut wt = factorial;
            for k in 0..d {
                let i = rem % n;
                rem /= n;
                lambda.push(left * x[i]);
                // Jacobian factor (1 - u_k)^{d-1-k} accumulates through `left`.
                wt *= w[i] * left.powi(if k == 0 { 0 } else { 1 });
                left *= 1.0 - x[i];
            }
            lambda.push(left);
            nodes.push(Weight(lambda));
            weights.push(wt);
        }
        let s: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|v| *v /= s);
        Self { nodes, weights, kind: RuleKind::CollapsedGauss }
    }

    /// Equal-weight centroid rule on the regular subdivision of the simplex
    /// into `n^{m-1}` congruent cells (m = 2 or 3).
    pub fn subdivision(m: usize, n: usize) -> Result<Self> {
        let nodes = match m {
            2 => (0..n).map(|i| Weight::bi((i as f64 + 0.5) / n as f64)).collect::<Vec<_>>(),
            3 => {
                let nf = n as f64;
                let mut v = Vec::with_capacity(n * n);
                for i in 0..n {
                    for j in 0..(n - i) {
                        v.push(bary3((i as f64 + 1.0 / 3.0) / nf, (j as f64 + 1.0 / 3.0) / nf));
                        if i + j + 1 < n {
                            v.push(bary3((i as f64 + 2.0 / 3.0) / nf, (j as f64 + 2.0 / 3.0) / nf));
                        }
                    }
                }
                v
            }
            _ => return Err(Error::OutOfRange(format!("subdivision rule supports m = 2, 3; got {m}"))),
        };
        let w = 1.0 / nodes.len() as f64;
        Ok(Self { weights: vec![w; nodes.len()], nodes, kind: RuleKind::Subdivision })
    }

    /// Equal-weight low-discrepancy rule: Halton points mapped to the uniform
    /// (flat Dirichlet) law on the simplex.
    pub fn halton(m: usize, n: usize) -> Result<Self> {
        if m < 2 || m > PRIMES.len() {
            return Err(Error::OutOfRange(format!("Halton rule supports 2..={} objectives", PRIMES.len())));
        }
        let nodes: Vec<Weight> = (0..n as u64)
            .map(|i| {
                let e: Vec<f64> = halton(i, m).into_iter().map(|u| -u.ln()).collect();
                let s: f64 = e.iter().sum();
                Weight(e.iter().map(|x| x / s).collect())
            })
            .collect();
        let w = 1.0 / n as f64;
        Ok(Self { weights: vec![w; n], nodes, kind: RuleKind::Halton })
    }
}

fn bary3(a: f64, b: f64) -> Weight {
    Weight(vec![a, b, (1.0 - a - b).max(0.0)])
}

/// `Σ_ℓ w_ℓ (h_r(λ_ℓ) - h_A(λ_ℓ))₊ ρ(λ_ℓ)`.
pub fn r2_improvement_quadrature(
    points: &[Vec<f64>],
    p: &TchebycheffParams,
    rho: &WeightDensity,
    rule: &SimplexQuadratureRule,
) -> Result<f64> {
    let mut s = 0.0;
    for (node, w) in rule.nodes.iter().zip(&rule.weights) {
        let gap = reference_envelope(node, p) - envelope_value(points, node, p)?.0;
        s += w * gap.max(0.0) * rho.eval(node);
    }
    Ok(s)
}

/// Quadrature of `∫ h_A ρ`.
pub fn r2_value_quadrature(
    points: &[Vec<f64>],
    p: &TchebycheffParams,
    rho: &WeightDensity,
    rule: &SimplexQuadratureRule,
) -> Result<f64> {
    let mut s = 0.0;
    for (node, w) in rule.nodes.iter().zip(&rule.weights) {
        s += w * envelope_value(points, node, p)?.0 * rho.eval(node);
    }
    Ok(s)
}

/// Tchebycheff shadow `[h_A(λ), h_r(λ)]`, or `None` when empty.
pub fn shadow_interval(points: &[Vec<f64>], w: &Weight, p: &TchebycheffParams) -> Result<Option<(f64, f64)>> {
    let lo = envelope_value(points, w, p)?.0;
    let hi = reference_envelope(w, p);
    Ok((lo <= hi).then_some((lo, hi)))
}

#[derive(Debug, Clone)]
pub enum TsmMethod {
    Exact2d,
    Quadrature(SimplexQuadratureRule),
}

/// Tchebycheff shadow magnitude: the `ρ dσ ⊗ dt` measure of the set
/// `{(λ, t) : h_A(λ) ≤ t ≤ h_r(λ)}`.
///
/// The exact two-objective path integrates over achievement levels `t` first,
/// `∫ μ(t) dt` with `μ(t)` the weight measure of the level-`t` slice of the
/// shadow, so it shares no code with [`r2_improvement_exact_2d`] beyond
/// envelope construction. Cost is quadratic in the number of envelope pieces.
pub fn tsm(points: &[Vec<f64>], p: &TchebycheffParams, rho: &WeightDensity, method: &TsmMethod) -> Result<f64> {
    match method {
        TsmMethod::Quadrature(rule) => {
            let mut s = 0.0;
            for (node, w) in rule.nodes.iter().zip(&rule.weights) {
                if let Some((lo, hi)) = shadow_interval(points, node, p)? {
                    s += w * (hi - lo) * rho.eval(node);
                }
            }
            Ok(s)
        }
        TsmMethod::Exact2d => {
            rho.eval_bi(0.5)?;
            let ha = envelope_piecewise_2d(points, p)?;
            let hr = PiecewiseLinearEnvelope::reference(p)?;
            Ok(shadow_volume_by_levels(&hr, &ha, rho))
        }
    }
}

struct ShadowCell {
    u: f64,
    v: f64,
    upper: EnvelopeSegment,
    lower: EnvelopeSegment,
}

/// `{λ ∈ [u, v] : a + bλ ≤ t}` (or `≥ t` when `below` is false) as an interval.
fn level_interval(u: f64, v: f64, seg: &EnvelopeSegment, t: f64, below: bool) -> Option<(f64, f64)> {
    let (a, b) = (seg.intercept, seg.slope);
    if b == 0.0 {
        let ok = if below { a <= t } else { a >= t };
        return ok.then_some((u, v));
    }
    let x = (t - a) / b;
    // below: b > 0 → λ ≤ x ; b < 0 → λ ≥ x. Reverse for above.
    let (lo, hi) = if (b > 0.0) == below { (u, x.min(v)) } else { (x.max(u), v) };
    (lo <= hi).then_some((lo, hi))
}

fn shadow_volume_by_levels(hr: &PiecewiseLinearEnvelope, ha: &PiecewiseLinearEnvelope, rho: &WeightDensity) -> f64 {
    let cells: Vec<ShadowCell> = gap_cells(hr, ha, rho)
        .into_iter()
        .filter_map(|(u, v)| {
            let mid = 0.5 * (u + v);
            let (upper, lower) = (*hr.segment_at(mid), *ha.segment_at(mid));
            (upper.at(mid) > lower.at(mid)).then_some(ShadowCell { u, v, upper, lower })
        })
        .collect();
    let mut levels: Vec<f64> = cells
        .iter()
        .flat_map(|c| [c.upper.at(c.u), c.upper.at(c.v), c.lower.at(c.u), c.lower.at(c.v)])
        .collect();
    levels.sort_by(f64::total_cmp);
    levels.dedup_by(|a, b| (*a - *b).abs() <= BREAK_TOL);

    let density_mass = |lo: f64, hi: f64| -> f64 {
        match rho {
            WeightDensity::Uniform => hi - lo,
            _ => {
                // Density is a polynomial of degree ≤ 2 between its breaks.
                let mut cuts: Vec<f64> =
                    rho.breaks().iter().copied().filter(|b| *b > lo && *b < hi).collect();
                cuts.insert(0, lo);
                cuts.push(hi);
                cuts.windows(2).map(|w| simpson(rho.piece_near(0.5 * (w[0] + w[1])), w[0], w[1])).sum()
            }
        }
    };
    let slice_measure = |t: f64| -> f64 {
        cells
            .iter()
            .filter_map(|c| {
                let (a0, a1) = level_interval(c.u, c.v, &c.lower, t, true)?;
                let (b0, b1) = level_interval(c.u, c.v, &c.upper, t, false)?;
                let (lo, hi) = (a0.max(b0), a1.min(b1));
                (lo < hi).then(|| density_mass(lo, hi))
            })
            .sum()
    };
    // Between consecutive levels the slice measure is a polynomial of degree
    // ≤ 3 in t, so Simpson's rule is exact.
    levels.windows(2).map(|w| simpson(slice_measure, w[0], w[1])).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoWhvReport {
    pub c: f64,
    pub hv_contribution: f64,
    pub r2_improvement: f64,
    pub pass: bool,
}

/// Boundary singleton `{(1, c)}` with `z⁺ = 0`, `r = (1, 1)`: zero area, yet
/// positive integral R2 improvement.
pub fn verify_no_whv_example(c: f64) -> Result<NoWhvReport> {
    if !(c > 0.0 && c < 1.0) {
        return Err(Error::OutOfRange(format!("c = {c} must lie in (0, 1)")));
    }
    let p = TchebycheffParams::unit(2);
    let a = vec![vec![1.0, c]];
    let hv = hypervolume(&a, &p.reference)?;
    let i = r2_improvement_exact_2d(&a, &p, &WeightDensity::Uniform)?;
    Ok(NoWhvReport { c, hv_contribution: hv, r2_improvement: i, pass: hv == 0.0 && i > 0.0 })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MagnitudeReport {
    #[serde(rename = "mag_A")]
    pub mag_a: f64,
    #[serde(rename = "i_A")]
    pub i_a: f64,
    #[serde(rename = "mag_B")]
    pub mag_b: f64,
    #[serde(rename = "i_B")]
    pub i_b: f64,
    pub pass: bool,
}

/// `A = {(0, 1)}` and `B = {(s, s)}`, `s = 3 - √6`: equal reduced magnitude of
/// the dominated sets, different integral R2 improvement.
pub fn verify_magnitude_example() -> Result<MagnitudeReport> {
    let p = TchebycheffParams::unit(2);
    let s = 3.0 - 6f64.sqrt();
    let side = 1.0 - s;
    let mag_a = reduced_magnitude_box(0.0, 1.0)?;
    let mag_b = reduced_magnitude_box(side, side)?;
    let rho = WeightDensity::Uniform;
    let i_a = r2_improvement_exact_2d(&[vec![0.0, 1.0]], &p, &rho)?;
    let i_b = r2_improvement_exact_2d(&[vec![s, s]], &p, &rho)?;
    let pass = (mag_a - mag_b).abs() <= 1e-12 && (i_a - i_b).abs() > 1e-6;
    Ok(MagnitudeReport { mag_a, i_a, mag_b, i_b, pass })
}

/// One row of an envelope dump (`lambda,h_A,h_r,gap`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeRow {
    pub lambda: f64,
    #[serde(rename = "h_A")]
    pub h_a: f64,
    pub h_r: f64,
    pub gap: f64,
}

/// Envelope samples at every breakpoint plus a uniform grid of `grid + 1` points.
pub fn envelope_rows(points: &[Vec<f64>], p: &TchebycheffParams, grid: usize) -> Result<Vec<EnvelopeRow>> {
    let ha = envelope_piecewise_2d(points, p)?;
    let hr = PiecewiseLinearEnvelope::reference(p)?;
    let grid_pts: Vec<f64> = (0..=grid).map(|i| i as f64 / grid.max(1) as f64).collect();
    let lambdas = merged_breaks(&[&ha, &hr], &grid_pts);
    Ok(lambdas
        .into_iter()
        .map(|l| {
            let (a, r) = (ha.value(l), hr.value(l));
            EnvelopeRow { lambda: l, h_a: a, h_r: r, gap: (r - a).max(0.0) }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::rng;
    use rand::Rng;

    fn unit() -> TchebycheffParams {
        TchebycheffParams::unit(2)
    }

    fn fig8() -> Vec<Vec<f64>> {
        vec![vec![0.12, 0.88], vec![0.30, 0.55], vec![0.55, 0.32], vec![0.84, 0.16]]
    }

    fn dense_front(n: usize) -> Vec<Vec<f64>> {
        (0..n)
            .map(|i| {
                let x = i as f64 / (n - 1) as f64;
                vec![x * x, (1.0 - x) * (1.0 - x)]
            })
            .collect()
    }

    /// Midpoint-rule oracle on a uniform grid.
    fn midpoint<F: Fn(f64) -> f64>(f: F, n: usize) -> f64 {
        let h = 1.0 / n as f64;
        (0..n).map(|i| f((i as f64 + 0.5) * h)).sum::<f64>() * h
    }

    #[test]
    fn tcheby_examples() {
        let p = unit();
        assert!((tcheby_value(&[0.25, 0.25], &Weight::bi(0.5), &p) - 0.125).abs() < 1e-15);
        let v = tcheby_value(&[4.0 / 9.0, 1.0 / 9.0], &Weight::new(vec![0.2, 0.8]).unwrap(), &p);
        assert!((v - 0.088_888_888_9).abs() < 1e-10);
        assert_eq!(tcheby_value(&[0.0, 0.0], &Weight::bi(0.3), &p), 0.0);
        // Boundary weights are finite and match the edge limit.
        assert_eq!(tcheby_value(&[0.3, 0.7], &Weight::bi(1.0), &p), 0.3);
        assert!((tcheby_value(&[0.3, 0.7], &Weight::bi(1.0 - 1e-12), &p) - 0.3).abs() < 1e-11);
        assert_eq!(tcheby_value(&[0.3, 0.7], &Weight::bi(0.0), &p), 0.7);
    }

    #[test]
    fn weight_validation() {
        assert!(Weight::new(vec![0.5, 0.5]).is_ok());
        assert!(Weight::new(vec![0.5, 0.6]).is_err());
        assert!(Weight::new(vec![-0.1, 1.1]).is_err());
        assert_eq!(Weight::normalized(&[1.0, 3.0]).unwrap().as_slice(), &[0.25, 0.75]);
    }

    #[test]
    fn envelope_examples() {
        let p = unit();
        let (v, i) = envelope_value(&[vec![0.0, 1.0]], &Weight::bi(0.25), &p).unwrap();
        assert_eq!((v, i), (0.75, 0));
        assert_eq!(envelope_value(&[], &Weight::bi(0.5), &p), Err(Error::EmptySet));
        let front = dense_front(10_000);
        let (v, _) = envelope_value(&front, &Weight::bi(0.5), &p).unwrap();
        assert!((v - 0.125).abs() < 1e-4);
        let (hr, _) = envelope_value(std::slice::from_ref(&p.reference), &Weight::bi(0.3), &p).unwrap();
        assert_eq!(hr, reference_envelope(&Weight::bi(0.3), &p));
    }

    #[test]
    fn ties_pick_lowest_index() {
        let p = unit();
        let (_, i) = envelope_value(&[vec![0.5, 0.2], vec![0.5, 0.2]], &Weight::bi(0.5), &p).unwrap();
        assert_eq!(i, 0);
    }

    #[test]
    fn single_point_envelope() {
        let env = envelope_piecewise_2d(&[vec![0.0, 1.0]], &unit()).unwrap();
        assert_eq!(env.breakpoints(), &[0.0, 1.0]);
        assert_eq!(env.segments()[0].slope, -1.0);
        assert_eq!(env.value(0.3), 0.7);

        let c = 0.4;
        let env = envelope_piecewise_2d(&[vec![c, c]], &unit()).unwrap();
        for k in 0..=100 {
            let l = k as f64 / 100.0;
            assert!((env.value(l) - c * l.max(1.0 - l)).abs() < 1e-15);
        }
    }

    #[test]
    fn fig8_envelope_matches_grid() {
        let p = unit();
        let a = fig8();
        let env = envelope_piecewise_2d(&a, &p).unwrap();
        for k in 0..=10_000 {
            let l = k as f64 / 10_000.0;
            let want = a
                .iter()
                .map(|q| (l * q[0]).max((1.0 - l) * q[1]))
                .fold(f64::INFINITY, f64::min);
            assert!((env.value(l) - want).abs() < 1e-12, "λ={l}");
        }
    }

    #[test]
    fn arrangement_path_handles_points_below_utopia() {
        let p = TchebycheffParams::new(vec![0.2, 0.2], vec![1.0, 1.0]).unwrap();
        let a = vec![vec![0.1, 0.9], vec![0.5, 0.05], vec![0.4, 0.4], vec![-0.1, 1.2]];
        let env = envelope_piecewise_2d(&a, &p).unwrap();
        for k in 0..=2000 {
            let l = k as f64 / 2000.0;
            let want = envelope_value(&a, &Weight::bi(l), &p).unwrap().0;
            assert!((env.value(l) - want).abs() < 1e-12, "λ={l}");
        }
    }

    #[test]
    fn discrete_examples() {
        let p = unit();
        let a = vec![vec![0.0, 1.0]];
        let lam = vec![Weight::bi(0.0), Weight::bi(0.5), Weight::bi(1.0)];
        assert!((discrete_r2(&a, &lam, &p).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(discrete_r2(&[vec![0.0, 0.0]], &lam, &p).unwrap(), 0.0);
        let single = [Weight::bi(0.3)];
        assert_eq!(discrete_r2(&a, &single, &p).unwrap(), envelope_value(&a, &single[0], &p).unwrap().0);
        assert_eq!(discrete_r2(&a, &[], &p), Err(Error::EmptyWeights));

        assert_eq!(discrete_r2_improvement(&[vec![1.0, 1.0]], &lam, &p).unwrap(), 0.0);
        let v = discrete_r2_improvement(&a, &[Weight::bi(0.75)], &p).unwrap();
        assert!((v - 0.5).abs() < 1e-15);
        let dense: Vec<Weight> = (0..10_000).map(|i| Weight::bi((i as f64 + 0.5) / 10_000.0)).collect();
        assert!((discrete_r2_improvement(&a, &dense, &p).unwrap() - 0.25).abs() < 1e-6);
    }

    #[test]
    fn exact_improvement_values() {
        let p = unit();
        let rho = WeightDensity::Uniform;
        let v = r2_improvement_exact_2d(&[vec![0.0, 1.0]], &p, &rho).unwrap();
        assert!((v - 0.25).abs() < 1e-15);
        let s = 3.0 - 6f64.sqrt();
        let v = r2_improvement_exact_2d(&[vec![s, s]], &p, &rho).unwrap();
        assert!((v - 0.75 * (6f64.sqrt() - 2.0)).abs() < 1e-15);
        let v = r2_improvement_exact_2d(&[vec![1.0, 0.5]], &p, &rho).unwrap();
        assert!((v - 1.0 / 6.0).abs() < 1e-15);
        let oracle = midpoint(|l| (l.max(1.0 - l) - l.max(0.5 * (1.0 - l))).max(0.0), 1_000_000);
        assert!((oracle - 1.0 / 6.0).abs() < 1e-9);
    }

    #[test]
    fn exact_value_examples() {
        let p = unit();
        let rho = WeightDensity::Uniform;
        assert!((r2_value_exact_2d(&[vec![1.0, 1.0]], &p, &rho).unwrap() - 0.75).abs() < 1e-15);
        assert_eq!(r2_value_exact_2d(&[vec![0.0, 0.0]], &p, &rho).unwrap(), 0.0);
        let v = r2_value_exact_2d(&dense_front(10_000), &p, &rho).unwrap();
        assert!((v - 0.089_048_62).abs() < 5e-5, "{v}");
    }

    #[test]
    fn scaling_identity() {
        let p = unit();
        for k in 1..20 {
            let s = k as f64 / 20.0;
            let v = r2_improvement_exact_2d(&[vec![s, s]], &p, &WeightDensity::Uniform).unwrap();
            assert!((v - (1.0 - s) * 0.75).abs() < 1e-14);
        }
    }

    #[test]
    fn non_uniform_density_matches_midpoint() {
        let p = unit();
        let rho = WeightDensity::Piecewise(
            PiecewiseQuadratic::new(vec![0.0, 0.4, 1.0], vec![[0.5, 1.0, 0.0], [0.1, 0.0, 2.0]]).unwrap(),
        );
        let a = fig8();
        let exact = r2_improvement_exact_2d(&a, &p, &rho).unwrap();
        let oracle = midpoint(
            |l| {
                let w = Weight::bi(l);
                let gap = reference_envelope(&w, &p) - envelope_value(&a, &w, &p).unwrap().0;
                gap.max(0.0) * rho.eval(&w)
            },
            1_000_000,
        );
        assert!((exact - oracle).abs() < 1e-9, "{exact} vs {oracle}");
        let t = tsm(&a, &p, &rho, &TsmMethod::Exact2d).unwrap();
        assert!((t - exact).abs() < 1e-12);
    }

    #[test]
    fn quadrature_examples() {
        let p = unit();
        let rho = WeightDensity::Uniform;
        let rule = SimplexQuadratureRule::gauss_legendre(64);
        let v = r2_improvement_quadrature(&[vec![0.0, 1.0]], &p, &rho, &rule).unwrap();
        assert!((v - 0.25).abs() < 1e-4);

        let p3 = TchebycheffParams::unit(3);
        let rule3 = SimplexQuadratureRule::subdivision(3, 40).unwrap();
        let full = r2_improvement_quadrature(&[vec![0.0; 3]], &p3, &rho, &rule3).unwrap();
        let href: f64 = rule3.nodes.iter().zip(&rule3.weights).map(|(n, w)| w * reference_envelope(n, &p3)).sum();
        assert!((full - href).abs() < 1e-14);
        assert_eq!(r2_improvement_quadrature(&[vec![1.0; 3]], &p3, &rho, &rule3).unwrap(), 0.0);
    }

    #[test]
    fn rules_are_normalized_and_on_simplex() {
        let rules = [
            SimplexQuadratureRule::gauss_legendre(17),
            SimplexQuadratureRule::collapsed_gauss(3, 9),
            SimplexQuadratureRule::collapsed_gauss(4, 5),
            SimplexQuadratureRule::subdivision(3, 12).unwrap(),
            SimplexQuadratureRule::halton(3, 500).unwrap(),
        ];
        for r in &rules {
            assert!((r.weights.iter().sum::<f64>() - 1.0).abs() < 1e-12, "{:?}", r.kind);
            assert!(r.weights.iter().all(|w| *w > 0.0));
            for n in &r.nodes {
                assert!((n.as_slice().iter().sum::<f64>() - 1.0).abs() < 1e-12);
                assert!(n.as_slice().iter().all(|x| *x >= 0.0));
            }
        }
        assert_eq!(SimplexQuadratureRule::subdivision(3, 12).unwrap().len(), 144);
    }

    #[test]
    fn simplex_rules_integrate_linear_functions() {
        // Mean of λ_1 under the uniform law on the simplex is 1/m.
        for r in [
            SimplexQuadratureRule::collapsed_gauss(3, 6),
            SimplexQuadratureRule::subdivision(3, 10).unwrap(),
        ] {
            let m: f64 = r.nodes.iter().zip(&r.weights).map(|(n, w)| w * n.as_slice()[0]).sum();
            assert!((m - 1.0 / 3.0).abs() < 1e-12, "{:?}", r.kind);
        }
        let m4 = SimplexQuadratureRule::collapsed_gauss(4, 4);
        let e: f64 = m4.nodes.iter().zip(&m4.weights).map(|(n, w)| w * n.as_slice()[3]).sum();
        assert!((e - 0.25).abs() < 1e-12);
    }

    #[test]
    fn three_objective_quadrature_self_converges() {
        let mut g = rng(31);
        let p3 = TchebycheffParams::unit(3);
        let a: Vec<Vec<f64>> = (0..5).map(|_| (0..3).map(|_| g.random_range(0.1..0.9)).collect()).collect();
        let rho = WeightDensity::Uniform;
        let coarse = SimplexQuadratureRule::subdivision(3, 71).unwrap();
        let fine = SimplexQuadratureRule::subdivision(3, 100).unwrap();
        let v1 = r2_improvement_quadrature(&a, &p3, &rho, &coarse).unwrap();
        let v2 = r2_improvement_quadrature(&a, &p3, &rho, &fine).unwrap();
        assert!((v1 - v2).abs() < 1e-4, "{v1} vs {v2}");
    }

    #[test]
    fn shadow_examples() {
        let p = unit();
        let sh = shadow_interval(&[vec![0.0, 1.0]], &Weight::bi(0.75), &p).unwrap();
        assert_eq!(sh, Some((0.25, 0.75)));
        let sh = shadow_interval(&[vec![1.0, 1.0]], &Weight::bi(0.3), &p).unwrap().unwrap();
        assert_eq!(sh.1 - sh.0, 0.0);
        assert_eq!(shadow_interval(&[vec![2.0, 2.0]], &Weight::bi(0.3), &p).unwrap(), None);
    }

    #[test]
    fn tsm_examples() {
        let p = unit();
        let rho = WeightDensity::Uniform;
        let t = tsm(&[vec![0.0, 1.0]], &p, &rho, &TsmMethod::Exact2d).unwrap();
        assert!((t - 0.25).abs() < 1e-14);
        let a = fig8();
        let t = tsm(&a, &p, &rho, &TsmMethod::Exact2d).unwrap();
        let i = r2_improvement_exact_2d(&a, &p, &rho).unwrap();
        assert!((t - i).abs() < 1e-12);
        let oracle = midpoint(
            |l| {
                let w = Weight::bi(l);
                shadow_interval(&a, &w, &p).unwrap().map_or(0.0, |(lo, hi)| hi - lo)
            },
            1_000_000,
        );
        assert!((t - oracle).abs() < 1e-9);
        let rule = SimplexQuadratureRule::gauss_legendre(50);
        let tq = tsm(&a, &p, &rho, &TsmMethod::Quadrature(rule.clone())).unwrap();
        assert_eq!(tq, r2_improvement_quadrature(&a, &p, &rho, &rule).unwrap());
        for k in 0..a.len() {
            let mut fewer = a.clone();
            fewer.remove(k);
            assert!(tsm(&fewer, &p, &rho, &TsmMethod::Exact2d).unwrap() <= t + 1e-15);
        }
    }

    #[test]
    fn no_whv_example() {
        let rep = verify_no_whv_example(0.5).unwrap();
        assert_eq!(rep.hv_contribution, 0.0);
        assert!((rep.r2_improvement - 1.0 / 6.0).abs() < 1e-12);
        assert!(rep.pass);
        let mut prev = f64::INFINITY;
        for c in [0.9, 0.99, 0.999, 0.9999] {
            let r = verify_no_whv_example(c).unwrap();
            assert!(r.r2_improvement < prev && r.r2_improvement > 0.0);
            assert_eq!(r.hv_contribution, 0.0);
            prev = r.r2_improvement;
        }
        assert!(verify_no_whv_example(1.0).is_err());
    }

    #[test]
    fn magnitude_example() {
        let rep = verify_magnitude_example().unwrap();
        assert_eq!(rep.mag_a, 0.5);
        assert!((rep.mag_b - 0.5).abs() < 1e-12);
        assert!((rep.i_a - 0.25).abs() < 1e-12);
        assert!((rep.i_b - 0.75 * (6f64.sqrt() - 2.0)).abs() < 1e-12);
        assert!((rep.i_a - rep.i_b).abs() > 0.08);
        assert!(rep.pass);
    }

    #[test]
    fn envelope_dump_contains_breakpoints() {
        let rows = envelope_rows(&fig8(), &unit(), 10).unwrap();
        assert!(rows.len() >= 11);
        assert!(rows.windows(2).all(|w| w[0].lambda < w[1].lambda));
        assert!(rows.iter().all(|r| r.gap == (r.h_r - r.h_a).max(0.0)));
    }
}
