//! Objective-space primitives: dominance, Pareto filtering, dominated-region
//! decomposition, hypervolume, cone hypervolume and desirability-weighted
//! hypervolume.
//!
//! Free functions in this module take point slices in minimization
//! orientation. [`ApproximationSet`] carries an [`Orientation`] and converts
//! at the boundary.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest point count accepted by the inclusion-exclusion path (m >= 3).
pub const INCLUSION_EXCLUSION_CAP: usize = 20;

/// Optimization direction shared by every vector of one computation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Orientation {
    #[default]
    #[serde(rename = "min", alias = "minimize")]
    Minimize,
    #[serde(rename = "max", alias = "maximize")]
    Maximize,
}

impl Orientation {
    /// Maps a vector given in this orientation into minimization orientation.
    /// The map is an involution, so it also maps results back.
    pub fn to_min(self, v: &[f64]) -> Vec<f64> {
        match self {
            Orientation::Minimize => v.to_vec(),
            Orientation::Maximize => v.iter().map(|x| -x).collect(),
        }
    }
}

fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::DimensionMismatch { expected, got });
    }
    Ok(())
}

/// `a` Pareto-dominates `b` under orientation `o`.
pub fn dominates(a: &[f64], b: &[f64], o: Orientation) -> Result<bool> {
    check_dim(a.len(), b.len())?;
    Ok(match o {
        Orientation::Minimize => dominates_min(a, b),
        Orientation::Maximize => dominates_min(b, a),
    })
}

#[inline]
pub(crate) fn dominates_min(a: &[f64], b: &[f64]) -> bool {
    let mut strict = false;
    for (x, y) in a.iter().zip(b) {
        if x > y {
            return false;
        }
        if x < y {
            strict = true;
        }
    }
    strict
}

/// Indices of the nondominated points (minimization), in input order.
/// Among exact duplicates only the first occurrence is kept.
pub fn pareto_filter_indices(points: &[Vec<f64>]) -> Vec<usize> {
    if points.first().is_some_and(|p| p.len() == 2) && points.iter().all(|p| p.len() == 2) {
        return pareto_filter_indices_2d(points);
    }
    let mut keep = Vec::new();
    'outer: for (i, p) in points.iter().enumerate() {
        for (j, q) in points.iter().enumerate() {
            if j == i {
                continue;
            }
            if dominates_min(q, p) || (j < i && q == p) {
                continue 'outer;
            }
        }
        keep.push(i);
    }
    keep
}

/// Sort-and-sweep filter for two objectives, O(n log n).
fn pareto_filter_indices_2d(points: &[Vec<f64>]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&i, &j| {
        points[i][0]
            .total_cmp(&points[j][0])
            .then(points[i][1].total_cmp(&points[j][1]))
            .then(i.cmp(&j))
    });
    let mut best = f64::INFINITY;
    let mut keep = Vec::new();
    for i in order {
        if points[i][1] < best {
            best = points[i][1];
            keep.push(i);
        }
    }
    keep.sort_unstable();
    keep
}

/// A finite set of objective vectors sharing one orientation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApproximationSet {
    points: Vec<Vec<f64>>,
    orientation: Orientation,
}

impl ApproximationSet {
    pub fn new(points: Vec<Vec<f64>>, orientation: Orientation) -> Result<Self> {
        if let Some(first) = points.first() {
            let m = first.len();
            if m == 0 {
                return Err(Error::DimensionMismatch { expected: 1, got: 0 });
            }
            for p in &points {
                check_dim(m, p.len())?;
                if p.iter().any(|x| !x.is_finite()) {
                    return Err(Error::OutOfRange("non-finite objective value".into()));
                }
            }
        }
        Ok(Self { points, orientation })
    }

    pub fn minimizing(points: Vec<Vec<f64>>) -> Result<Self> {
        Self::new(points, Orientation::Minimize)
    }

    pub fn empty(orientation: Orientation) -> Self {
        Self { points: Vec::new(), orientation }
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn orientation(&self) -> Orientation {
        self.orientation
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> Option<usize> {
        self.points.first().map(Vec::len)
    }

    /// The points mapped into minimization orientation.
    pub fn to_minimization(&self) -> Vec<Vec<f64>> {
        self.points.iter().map(|p| self.orientation.to_min(p)).collect()
    }

    pub fn pareto_filter(&self) -> ApproximationSet {
        let keep = pareto_filter_indices(&self.to_minimization());
        ApproximationSet {
            points: keep.into_iter().map(|i| self.points[i].clone()).collect(),
            orientation: self.orientation,
        }
    }

    /// Hypervolume with `reference` given in the set's own orientation.
    pub fn hypervolume(&self, reference: &[f64]) -> Result<f64> {
        hypervolume(&self.to_minimization(), &self.orientation.to_min(reference))
    }
}

/// Axis-aligned box `[lower, upper]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxisBox {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl AxisBox {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        check_dim(lower.len(), upper.len())?;
        if lower.iter().zip(&upper).any(|(l, u)| l > u) {
            return Err(Error::OutOfRange("box lower bound exceeds upper bound".into()));
        }
        Ok(Self { lower, upper })
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn volume(&self) -> f64 {
        self.lower.iter().zip(&self.upper).map(|(l, u)| (u - l).max(0.0)).product()
    }

    pub fn contains(&self, y: &[f64]) -> bool {
        y.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .all(|(v, (l, u))| l <= v && v <= u)
    }
}

/// One term of a signed inclusion-exclusion expansion.
#[derive(Debug, Clone, PartialEq)]
pub struct SignedBox {
    pub sign: f64,
    pub cell: AxisBox,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Decomposition {
    /// Interior-disjoint boxes (m <= 2).
    Disjoint(Vec<AxisBox>),
    /// Signed boxes whose signed volume sum is the region volume (m >= 3).
    Signed(Vec<SignedBox>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct DominatedRegion {
    pub parts: Decomposition,
    /// Input indices whose coordinates exceeded the reference and were clipped.
    pub clipped: Vec<usize>,
}

impl DominatedRegion {
    pub fn volume(&self) -> f64 {
        match &self.parts {
            Decomposition::Disjoint(b) => b.iter().map(AxisBox::volume).sum(),
            Decomposition::Signed(t) => t.iter().map(|s| s.sign * s.cell.volume()).sum(),
        }
    }
}

fn clip_to_reference(points: &[Vec<f64>], r: &[f64]) -> Result<(Vec<Vec<f64>>, Vec<usize>)> {
    let mut clipped = Vec::new();
    let mut out = Vec::with_capacity(points.len());
    for (i, p) in points.iter().enumerate() {
        check_dim(r.len(), p.len())?;
        if p.iter().zip(r).any(|(a, b)| a > b) {
            clipped.push(i);
        }
        out.push(p.iter().zip(r).map(|(a, b)| a.min(*b)).collect());
    }
    Ok((out, clipped))
}

/// Clipped, filtered points (minimization) that bound a positive volume.
fn effective_points(points: &[Vec<f64>], r: &[f64]) -> Result<(Vec<Vec<f64>>, Vec<usize>)> {
    let (clipped_pts, clipped) = clip_to_reference(points, r)?;
    let live: Vec<Vec<f64>> = clipped_pts
        .into_iter()
        .filter(|p| p.iter().zip(r).all(|(a, b)| a < b))
        .collect();
    let keep = pareto_filter_indices(&live);
    Ok((keep.into_iter().map(|i| live[i].clone()).collect(), clipped))
}

/// Decomposes `Dom_r(A)` for minimization points `points`.
///
/// Two objectives give horizontal strips from a sorted sweep; one objective a
/// single interval; three or more a signed inclusion-exclusion list over the
/// nondominated points (at most [`INCLUSION_EXCLUSION_CAP`]).
pub fn decompose_dominated_region(points: &[Vec<f64>], r: &[f64]) -> Result<DominatedRegion> {
    let (pts, clipped) = effective_points(points, r)?;
    let m = r.len();
    let parts = match m {
        0 => return Err(Error::DimensionMismatch { expected: 1, got: 0 }),
        1 => {
            let lo = pts.iter().map(|p| p[0]).fold(f64::INFINITY, f64::min);
            if pts.is_empty() {
                Decomposition::Disjoint(Vec::new())
            } else {
                Decomposition::Disjoint(vec![AxisBox { lower: vec![lo], upper: r.to_vec() }])
            }
        }
        2 => {
            let mut sorted = pts;
            sorted.sort_by(|a, b| a[0].total_cmp(&b[0]));
            let mut top = r[1];
            let mut boxes = Vec::with_capacity(sorted.len());
            for p in sorted {
                boxes.push(AxisBox { lower: vec![p[0], p[1]], upper: vec![r[0], top] });
                top = p[1];
            }
            Decomposition::Disjoint(boxes)
        }
        _ => {
            if pts.len() > INCLUSION_EXCLUSION_CAP {
                return Err(Error::CapExceeded { cap: INCLUSION_EXCLUSION_CAP, got: pts.len() });
            }
            let mut terms = Vec::new();
            inclusion_exclusion(&pts, r, 0, None, 0, &mut |sign, lower| {
                terms.push(SignedBox {
                    sign,
                    cell: AxisBox { lower: lower.to_vec(), upper: r.to_vec() },
                })
            });
            Decomposition::Signed(terms)
        }
    };
    Ok(DominatedRegion { parts, clipped })
}

/// Depth-first enumeration of nonempty subsets; supersets of a degenerate
/// intersection are pruned since they are degenerate too.
fn inclusion_exclusion<F: FnMut(f64, &[f64])>(
    pts: &[Vec<f64>],
    r: &[f64],
    start: usize,
    current: Option<&[f64]>,
    depth: usize,
    visit: &mut F,
) {
    for i in start..pts.len() {
        let lower: Vec<f64> = match current {
            None => pts[i].clone(),
            Some(c) => c.iter().zip(&pts[i]).map(|(a, b)| a.max(*b)).collect(),
        };
        if lower.iter().zip(r).any(|(a, b)| a >= b) {
            continue;
        }
        let sign = if depth.is_multiple_of(2) { 1.0 } else { -1.0 };
        visit(sign, &lower);
        inclusion_exclusion(pts, r, i + 1, Some(&lower), depth + 1, visit);
    }
}

/// Hypervolume of minimization points with respect to reference `r`.
pub fn hypervolume(points: &[Vec<f64>], r: &[f64]) -> Result<f64> {
    let (pts, _) = effective_points(points, r)?;
    match r.len() {
        0 => Err(Error::DimensionMismatch { expected: 1, got: 0 }),
        1 => Ok(pts.iter().map(|p| r[0] - p[0]).fold(0.0, f64::max)),
        2 => Ok(Front2d::from_filtered(pts, r).volume()),
        _ => {
            if pts.len() > INCLUSION_EXCLUSION_CAP {
                return Err(Error::CapExceeded { cap: INCLUSION_EXCLUSION_CAP, got: pts.len() });
            }
            let mut total = 0.0;
            inclusion_exclusion(&pts, r, 0, None, 0, &mut |sign, lower| {
                total += sign * lower.iter().zip(r).map(|(a, b)| b - a).product::<f64>();
            });
            Ok(total.max(0.0))
        }
    }
}

/// Hypervolume improvement `HV(A ∪ {y}) - HV(A)` (minimization).
pub fn hvi(y: &[f64], points: &[Vec<f64>], r: &[f64]) -> Result<f64> {
    check_dim(r.len(), y.len())?;
    if r.len() == 2 {
        return Ok(Front2d::new(points, r)?.improvement(y));
    }
    let mut with = points.to_vec();
    with.push(y.to_vec());
    Ok((hypervolume(&with, r)? - hypervolume(points, r)?).max(0.0))
}

/// Sorted two-objective front with an allocation-free improvement query.
#[derive(Debug, Clone)]
pub struct Front2d {
    /// Nondominated, clipped points sorted by the first objective.
    pts: Vec<[f64; 2]>,
    r: [f64; 2],
}

impl Front2d {
    pub fn new(points: &[Vec<f64>], r: &[f64]) -> Result<Self> {
        check_dim(2, r.len())?;
        let (pts, _) = effective_points(points, r)?;
        Ok(Self::from_filtered(pts, r))
    }

    fn from_filtered(pts: Vec<Vec<f64>>, r: &[f64]) -> Self {
        let mut pts: Vec<[f64; 2]> = pts.into_iter().map(|p| [p[0], p[1]]).collect();
        pts.sort_by(|a, b| a[0].total_cmp(&b[0]));
        Self { pts, r: [r[0], r[1]] }
    }

    pub fn volume(&self) -> f64 {
        staircase_volume(self.pts.iter().copied(), self.r)
    }

    /// Exclusive volume that `y` adds to the front.
    pub fn improvement(&self, y: &[f64]) -> f64 {
        let y0 = y[0].min(self.r[0]);
        let y1 = y[1].min(self.r[1]);
        if y0 >= self.r[0] || y1 >= self.r[1] {
            return 0.0;
        }
        let own = (self.r[0] - y0) * (self.r[1] - y1);
        // Dom(A) ∩ [y, r] is the region dominated by the coordinate-wise maxima.
        let shared = staircase_volume(self.pts.iter().map(|p| [p[0].max(y0), p[1].max(y1)]), self.r);
        (own - shared).max(0.0)
    }
}

/// Volume under a staircase given points sorted by the first coordinate with
/// nonincreasing second coordinate.
fn staircase_volume<I: Iterator<Item = [f64; 2]>>(pts: I, r: [f64; 2]) -> f64 {
    let mut top = r[1];
    let mut v = 0.0;
    for p in pts {
        if p[1] < top {
            v += (r[0] - p[0]) * (top - p[1]);
            top = p[1];
        }
    }
    v
}

/// Simplicial cone generated by the columns of an invertible matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplicialCone {
    generator: DMatrix<f64>,
    inverse: DMatrix<f64>,
    abs_determinant: f64,
}

impl SimplicialCone {
    /// Builds the cone from a row-major square generator matrix.
    pub fn new(rows: &[Vec<f64>]) -> Result<Self> {
        let m = rows.len();
        for row in rows {
            check_dim(m, row.len())?;
        }
        let generator = DMatrix::from_fn(m, m, |i, j| rows[i][j]);
        let det = generator.determinant();
        if !det.is_finite() || det.abs() < 1e-14 {
            return Err(Error::SingularMatrix);
        }
        let inverse = generator.clone().try_inverse().ok_or(Error::SingularMatrix)?;
        let residual = (&inverse * &generator - DMatrix::<f64>::identity(m, m)).amax();
        if residual > 1e-10 {
            return Err(Error::SingularMatrix);
        }
        Ok(Self { generator, inverse, abs_determinant: det.abs() })
    }

    pub fn identity(m: usize) -> Self {
        let rows: Vec<Vec<f64>> =
            (0..m).map(|i| (0..m).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
        Self::new(&rows).expect("identity is invertible")
    }

    pub fn dim(&self) -> usize {
        self.generator.nrows()
    }

    pub fn abs_determinant(&self) -> f64 {
        self.abs_determinant
    }

    pub fn generator(&self) -> &DMatrix<f64> {
        &self.generator
    }

    pub fn inverse(&self) -> &DMatrix<f64> {
        &self.inverse
    }

    /// `L y` with `L = C^{-1}`.
    pub fn to_cone_coords(&self, y: &[f64]) -> Vec<f64> {
        let m = self.dim();
        (0..m).map(|i| (0..m).map(|j| self.inverse[(i, j)] * y[j]).sum()).collect()
    }

    /// For a generalized permutation `L` (one nonzero per row and column),
    /// returns `(column, coefficient)` per row.
    pub fn monomial_rows(&self) -> Option<Vec<(usize, f64)>> {
        let m = self.dim();
        let mut used = vec![false; m];
        let mut out = Vec::with_capacity(m);
        for i in 0..m {
            let nz: Vec<usize> = (0..m).filter(|&j| self.inverse[(i, j)].abs() > 1e-14).collect();
            if nz.len() != 1 || used[nz[0]] {
                return None;
            }
            used[nz[0]] = true;
            out.push((nz[0], self.inverse[(i, nz[0])]));
        }
        Some(out)
    }

    /// `y'` is cone-dominated by `y` when `L (y' - y) >= 0`.
    pub fn cone_dominated_by(&self, y_prime: &[f64], y: &[f64]) -> bool {
        let diff: Vec<f64> = y_prime.iter().zip(y).map(|(a, b)| a - b).collect();
        self.to_cone_coords(&diff).iter().all(|v| *v >= 0.0)
    }
}

/// Volume of the cone-dominated region: `|det C| · HV(L·A, L·r)`.
pub fn cone_hypervolume(points: &[Vec<f64>], r: &[f64], cone: &SimplicialCone) -> Result<f64> {
    check_dim(cone.dim(), r.len())?;
    for p in points {
        check_dim(cone.dim(), p.len())?;
    }
    let la: Vec<Vec<f64>> = points.iter().map(|p| cone.to_cone_coords(p)).collect();
    let lr = cone.to_cone_coords(r);
    Ok(cone.abs_determinant() * hypervolume(&la, &lr)?)
}

/// Continuous nondecreasing piecewise-linear map `T` with knots. Its
/// derivative is the piecewise-constant kernel `k = T'`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseLinearMap {
    knots: Vec<f64>,
    values: Vec<f64>,
}

impl PiecewiseLinearMap {
    pub fn new(knots: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if knots.len() < 2 || knots.len() != values.len() {
            return Err(Error::InvalidDesirability("need at least two knots with matching values".into()));
        }
        for w in knots.windows(2) {
            if w[1] < w[0] {
                return Err(Error::InvalidDesirability("knots must be nondecreasing".into()));
            }
        }
        for (i, w) in values.windows(2).enumerate() {
            if w[1] < w[0] {
                return Err(Error::InvalidDesirability("map must be nondecreasing".into()));
            }
            if knots[i + 1] == knots[i] && w[1] != w[0] {
                return Err(Error::InvalidDesirability("map must be continuous".into()));
            }
        }
        Ok(Self { knots, values })
    }

    /// `T(t) = ∫_{start}^t k`, with `k` given as `(length, slope)` pieces.
    /// Zero-length pieces are allowed and only mark a knot.
    pub fn from_kernel(start: f64, pieces: &[(f64, f64)]) -> Result<Self> {
        let mut knots = vec![start];
        let mut values = vec![0.0];
        for &(len, slope) in pieces {
            if len < 0.0 || slope < 0.0 {
                return Err(Error::InvalidDesirability("negative piece length or slope".into()));
            }
            knots.push(knots.last().unwrap() + len);
            values.push(values.last().unwrap() + len * slope);
        }
        Self::new(knots, values)
    }

    pub fn identity(lo: f64, hi: f64) -> Self {
        Self { knots: vec![lo, hi], values: vec![lo, hi] }
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.knots[0], *self.knots.last().unwrap())
    }

    fn piece(&self, t: f64) -> Option<usize> {
        let (lo, hi) = self.domain();
        if !(lo..=hi).contains(&t) {
            return None;
        }
        let idx = self.knots.partition_point(|k| *k <= t);
        Some(idx.clamp(1, self.knots.len() - 1) - 1)
    }

    pub fn eval(&self, t: f64) -> Option<f64> {
        let i = self.piece(t)?;
        let (k0, k1) = (self.knots[i], self.knots[i + 1]);
        if k1 == k0 {
            return Some(self.values[i]);
        }
        let w = (t - k0) / (k1 - k0);
        Some(self.values[i] + w * (self.values[i + 1] - self.values[i]))
    }

    /// Kernel value `k(t)` (right-continuous at knots).
    pub fn kernel(&self, t: f64) -> Option<f64> {
        let i = self.piece(t)?;
        let len = self.knots[i + 1] - self.knots[i];
        Some(if len > 0.0 { (self.values[i + 1] - self.values[i]) / len } else { 0.0 })
    }

    /// Every positive-length piece meeting `[start, upper]` has positive slope.
    fn positive_ae_up_to(&self, upper: f64) -> bool {
        let (lo, hi) = self.domain();
        if upper > hi || upper < lo {
            return false;
        }
        self.knots.windows(2).zip(self.values.windows(2)).all(|(k, v)| {
            let len = k[1] - k[0];
            len <= 0.0 || k[0] >= upper || v[1] > v[0]
        })
    }
}

/// Coordinate-wise desirability transform `T = (T_1, ..., T_m)` with product
/// kernel `K(y) = ∏ k_j(y_j)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesirabilityMap {
    pub maps: Vec<PiecewiseLinearMap>,
}

impl DesirabilityMap {
    pub fn new(maps: Vec<PiecewiseLinearMap>) -> Self {
        Self { maps }
    }

    pub fn identity(bounds: &[(f64, f64)]) -> Self {
        Self { maps: bounds.iter().map(|&(l, h)| PiecewiseLinearMap::identity(l, h)).collect() }
    }

    pub fn dim(&self) -> usize {
        self.maps.len()
    }

    pub fn transform(&self, y: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim(), y.len())?;
        y.iter()
            .zip(&self.maps)
            .enumerate()
            .map(|(j, (v, t))| t.eval(*v).ok_or(Error::DesirabilityDomain { coordinate: j, value: *v }))
            .collect()
    }

    pub fn kernel_density(&self, y: &[f64]) -> Result<f64> {
        check_dim(self.dim(), y.len())?;
        y.iter()
            .zip(&self.maps)
            .enumerate()
            .map(|(j, (v, t))| t.kernel(*v).ok_or(Error::DesirabilityDomain { coordinate: j, value: *v }))
            .product()
    }
}

/// Weighted hypervolume `∫_{Dom_r(A)} ∏ k_j(y_j) dy`, evaluated as the ordinary
/// hypervolume of `T(A)` with reference `T(r)`.
pub fn whv_product_density(points: &[Vec<f64>], r: &[f64], d: &DesirabilityMap) -> Result<f64> {
    let tr = d.transform(r)?;
    let (clipped, _) = clip_to_reference(points, r)?;
    let ta = clipped.iter().map(|p| d.transform(p)).collect::<Result<Vec<_>>>()?;
    hypervolume(&ta, &tr)
}

/// Every marginal kernel is integrable on `[start_j, r_j]` and positive almost
/// everywhere there.
pub fn kernel_admissible(d: &DesirabilityMap, r: &[f64]) -> bool {
    d.dim() == r.len() && d.maps.iter().zip(r).all(|(t, rj)| t.positive_ae_up_to(*rj))
}

/// Reduced magnitude of an axis box in the plane with side lengths `(a, b)`.
pub fn reduced_magnitude_box(a: f64, b: f64) -> Result<f64> {
    for s in [a, b] {
        if s < 0.0 {
            return Err(Error::NegativeLength(s));
        }
    }
    Ok((a + b) / 2.0 + a * b / 4.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::rng;
    use rand::Rng;

    fn fig1() -> (Vec<Vec<f64>>, Vec<f64>) {
        (vec![vec![1.0, 3.5], vec![2.0, 2.5], vec![3.0, 1.5]], vec![5.0, 4.0])
    }

    /// Membership oracle: uniform samples in `[lo, r]` tested for dominance.
    fn mc_volume(points: &[Vec<f64>], lo: &[f64], r: &[f64], n: usize, seed: u64) -> (f64, f64) {
        let mut g = rng(seed);
        let vol: f64 = lo.iter().zip(r).map(|(a, b)| b - a).product();
        let mut hits = 0usize;
        let mut y = vec![0.0; r.len()];
        for _ in 0..n {
            for j in 0..r.len() {
                y[j] = g.random_range(lo[j]..r[j]);
            }
            if points.iter().any(|a| a.iter().zip(&y).all(|(ai, yi)| ai <= yi)) {
                hits += 1;
            }
        }
        let p = hits as f64 / n as f64;
        (vol * p, vol * (p * (1.0 - p) / n as f64).sqrt())
    }

    #[test]
    fn dominance_examples() {
        let o = Orientation::Minimize;
        assert!(dominates(&[1.0, 2.0], &[2.0, 3.0], o).unwrap());
        assert!(!dominates(&[1.0, 2.0], &[1.0, 2.0], o).unwrap());
        assert!(!dominates(&[1.0, 3.0], &[3.0, 1.0], o).unwrap());
        assert!(dominates(&[2.0, 3.0], &[1.0, 2.0], Orientation::Maximize).unwrap());
        assert_eq!(
            dominates(&[1.0], &[1.0, 2.0], o),
            Err(Error::DimensionMismatch { expected: 1, got: 2 })
        );
    }

    #[test]
    fn filter_examples() {
        let s = ApproximationSet::minimizing(vec![
            vec![1.0, 3.0],
            vec![2.0, 2.0],
            vec![3.0, 1.0],
            vec![2.0, 3.0],
        ])
        .unwrap();
        assert_eq!(s.pareto_filter().points(), &[vec![1.0, 3.0], vec![2.0, 2.0], vec![3.0, 1.0]]);
        assert!(ApproximationSet::empty(Orientation::Minimize).pareto_filter().is_empty());
        let d = ApproximationSet::minimizing(vec![vec![0.0, 0.0], vec![0.0, 0.0]]).unwrap();
        assert_eq!(d.pareto_filter().len(), 1);
    }

    #[test]
    fn fig1_strips_and_volume() {
        let (a, r) = fig1();
        let region = decompose_dominated_region(&a, &r).unwrap();
        match &region.parts {
            Decomposition::Disjoint(b) => assert_eq!(b.len(), 3),
            _ => panic!("expected strips"),
        }
        assert!((region.volume() - 7.0).abs() < 1e-12);
        assert!((hypervolume(&a, &r).unwrap() - 7.0).abs() < 1e-12);
    }

    #[test]
    fn fig1_matches_membership_oracle() {
        let (a, r) = fig1();
        let (est, se) = mc_volume(&a, &[0.0, 0.0], &r, 2_000_000, 11);
        assert!((est - 7.0).abs() < 3.0 * se, "{est} ± {se}");
    }

    #[test]
    fn fig1_hvi() {
        let (a, r) = fig1();
        let v = hvi(&[2.45, 1.05], &a, &r).unwrap();
        assert!((v - 1.6975).abs() < 1e-12);
        assert_eq!(hvi(&[3.0, 2.0], &a, &r).unwrap(), 0.0);
        assert_eq!(hvi(&[0.0, 0.0], &[], &[1.0, 1.0]).unwrap(), 1.0);
    }

    #[test]
    fn trivial_volumes() {
        let region = decompose_dominated_region(&[vec![0.0, 0.0, 0.0]], &[1.0, 1.0, 1.0]).unwrap();
        assert_eq!(region.volume(), 1.0);
        let empty = decompose_dominated_region(&[], &[1.0, 1.0]).unwrap();
        assert_eq!(empty.parts, Decomposition::Disjoint(vec![]));
        assert_eq!(hypervolume(&[vec![1.0, 1.0]], &[1.0, 1.0]).unwrap(), 0.0);
        assert_eq!(hypervolume(&[vec![0.0, 0.0]], &[1.0, 1.0]).unwrap(), 1.0);
    }

    #[test]
    fn clipping_is_flagged() {
        let region = decompose_dominated_region(&[vec![0.5, 2.0], vec![0.5, 0.5]], &[1.0, 1.0]).unwrap();
        assert_eq!(region.clipped, vec![0]);
        assert!((region.volume() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn cap_is_enforced_in_three_dimensions() {
        let pts: Vec<Vec<f64>> = (0..21)
            .map(|i| {
                let t = i as f64 / 20.0;
                vec![t, 1.0 - t, 0.5 * (1.0 - (2.0 * t - 1.0).abs())]
            })
            .collect();
        let r = vec![2.0, 2.0, 2.0];
        assert!(matches!(hypervolume(&pts, &r), Err(Error::CapExceeded { .. })));
    }

    #[test]
    fn three_dim_matches_oracle() {
        let mut g = rng(5);
        for seed in 0..3 {
            let pts: Vec<Vec<f64>> =
                (0..6).map(|_| (0..3).map(|_| g.random_range(0.0..1.0)).collect()).collect();
            let r = vec![1.0, 1.0, 1.0];
            let hv = hypervolume(&pts, &r).unwrap();
            let dec = decompose_dominated_region(&pts, &r).unwrap().volume();
            assert!((hv - dec).abs() < 1e-12);
            let (est, se) = mc_volume(&pts, &[0.0; 3], &r, 1_000_000, seed);
            assert!((est - hv).abs() < 3.0 * se + 1e-12, "{est} ± {se} vs {hv}");
        }
    }

    #[test]
    fn maximization_boundary() {
        let s = ApproximationSet::new(vec![vec![1.0, 1.0]], Orientation::Maximize).unwrap();
        assert_eq!(s.hypervolume(&[0.0, 0.0]).unwrap(), 1.0);
    }

    #[test]
    fn cone_examples() {
        let id = SimplicialCone::identity(2);
        assert_eq!(cone_hypervolume(&[vec![0.0, 0.0]], &[1.0, 1.0], &id).unwrap(), 1.0);
        let scaled = SimplicialCone::new(&[vec![2.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert_eq!(scaled.abs_determinant(), 2.0);
        // L·A = (0,0), L·r = (0.5, 1) so the transformed volume is 0.5.
        assert!((cone_hypervolume(&[vec![0.0, 0.0]], &[1.0, 1.0], &scaled).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(
            SimplicialCone::new(&[vec![1.0, 2.0], vec![2.0, 4.0]]),
            Err(Error::SingularMatrix)
        );
    }

    #[test]
    fn obtuse_cone_matches_rejection_oracle() {
        // Columns (1, -0.4) and (-0.3, 1) open the cone beyond the orthant.
        let cone = SimplicialCone::new(&[vec![1.0, -0.3], vec![-0.4, 1.0]]).unwrap();
        let a = vec![vec![0.2, 0.6], vec![0.5, 0.3], vec![0.7, 0.1]];
        let r = vec![1.2, 1.1];
        let exact = cone_hypervolume(&a, &r, &cone).unwrap();

        // Each cone interval {a ≼ y ≼ r} is the parallelogram a + C·[0, L(r - a)].
        let c = cone.generator();
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for p in &a {
            let diff: Vec<f64> = r.iter().zip(p).map(|(x, y)| x - y).collect();
            let t = cone.to_cone_coords(&diff);
            for mask in 0..4u8 {
                for j in 0..2 {
                    let mut v = p[j];
                    for k in 0..2 {
                        if mask & (1 << k) != 0 {
                            v += c[(j, k)] * t[k];
                        }
                    }
                    lo[j] = lo[j].min(v);
                    hi[j] = hi[j].max(v);
                }
            }
        }
        let mut g = rng(9);
        let n = 2_000_000;
        let box_vol = (hi[0] - lo[0]) * (hi[1] - lo[1]);
        let mut hits = 0usize;
        for _ in 0..n {
            let y = [g.random_range(lo[0]..hi[0]), g.random_range(lo[1]..hi[1])];
            let bounded = cone.cone_dominated_by(&r, &y);
            if bounded && a.iter().any(|p| cone.cone_dominated_by(&y, p)) {
                hits += 1;
            }
        }
        let p = hits as f64 / n as f64;
        let est = box_vol * p;
        let se = box_vol * (p * (1.0 - p) / n as f64).sqrt();
        assert!((est - exact).abs() < 3.0 * se, "{est} ± {se} vs {exact}");
    }

    #[test]
    fn desirability_examples() {
        let (a, r) = fig1();
        let id = DesirabilityMap::identity(&[(0.0, 5.0), (0.0, 4.0)]);
        assert!((whv_product_density(&a, &r, &id).unwrap() - 7.0).abs() < 1e-12);

        // T(t) = t² on [0, 1] as a fine ramp approximation is not exact, so
        // check the endpoints, which only need T(0) = 0 and T(1) = 1.
        let sq = PiecewiseLinearMap::new(vec![0.0, 0.5, 1.0], vec![0.0, 0.25, 1.0]).unwrap();
        let d = DesirabilityMap::new(vec![sq.clone(), sq]);
        assert_eq!(whv_product_density(&[vec![0.0, 0.0]], &[1.0, 1.0], &d).unwrap(), 1.0);

        let short = DesirabilityMap::identity(&[(0.0, 0.5), (0.0, 0.5)]);
        assert!(matches!(
            whv_product_density(&[vec![0.0, 0.0]], &[1.0, 1.0], &short),
            Err(Error::DesirabilityDomain { .. })
        ));
    }

    #[test]
    fn random_kernels_match_weighted_mc_integral() {
        let mut g = rng(21);
        for trial in 0..3 {
            let maps: Vec<PiecewiseLinearMap> = (0..2)
                .map(|_| {
                    let pieces: Vec<(f64, f64)> =
                        (0..4).map(|_| (0.25, g.random_range(0.2..3.0))).collect();
                    PiecewiseLinearMap::from_kernel(0.0, &pieces).unwrap()
                })
                .collect();
            let d = DesirabilityMap::new(maps);
            let a: Vec<Vec<f64>> =
                (0..4).map(|_| vec![g.random_range(0.0..1.0), g.random_range(0.0..1.0)]).collect();
            let r = vec![1.0, 1.0];
            let exact = whv_product_density(&a, &r, &d).unwrap();
            let n = 1_000_000;
            let mut sum = 0.0;
            let mut sum2 = 0.0;
            for _ in 0..n {
                let y = [g.random_range(0.0..1.0), g.random_range(0.0..1.0)];
                let v = if a.iter().any(|p| p[0] <= y[0] && p[1] <= y[1]) {
                    d.kernel_density(&y).unwrap()
                } else {
                    0.0
                };
                sum += v;
                sum2 += v * v;
            }
            let mean = sum / n as f64;
            let se = ((sum2 / n as f64 - mean * mean) / n as f64).sqrt();
            assert!((mean - exact).abs() < 3.0 * se, "trial {trial}: {mean} ± {se} vs {exact}");
        }
    }

    #[test]
    fn admissibility() {
        let ones = PiecewiseLinearMap::from_kernel(0.0, &[(0.5, 1.0), (0.5, 1.0)]).unwrap();
        let flat = PiecewiseLinearMap::from_kernel(0.0, &[(0.5, 1.0), (0.25, 0.0), (0.25, 1.0)]).unwrap();
        let knot = PiecewiseLinearMap::from_kernel(0.0, &[(0.5, 1.0), (0.0, 0.0), (0.5, 1.0)]).unwrap();
        let r = [1.0, 1.0];
        assert!(kernel_admissible(&DesirabilityMap::new(vec![ones.clone(), ones.clone()]), &r));
        assert!(!kernel_admissible(&DesirabilityMap::new(vec![ones.clone(), flat]), &r));
        assert!(kernel_admissible(&DesirabilityMap::new(vec![ones.clone(), knot]), &r));
        // Reference beyond the map's domain: kernel not integrable there.
        assert!(!kernel_admissible(&DesirabilityMap::new(vec![ones.clone(), ones]), &[1.0, 2.0]));
    }

    #[test]
    fn reduced_magnitude() {
        let p = 6f64.sqrt() - 2.0;
        assert!((reduced_magnitude_box(p, p).unwrap() - 0.5).abs() < 1e-12);
        assert_eq!(reduced_magnitude_box(0.0, 0.5).unwrap(), 0.25);
        assert_eq!(reduced_magnitude_box(0.0, 0.0).unwrap(), 0.0);
        assert_eq!(reduced_magnitude_box(-1.0, 0.0), Err(Error::NegativeLength(-1.0)));
    }
}
