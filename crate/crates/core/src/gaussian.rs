//! Scalar Gaussian machinery: normal CDF/PDF and expected-improvement kernels.
//!
//! All kernels take a standard deviation (never a variance). A zero standard
//! deviation denotes a point mass and every formula takes its analytic limit.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use libm::erfc;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest truncation mass accepted by [`TruncatedGaussian1D`].
pub const MIN_TRUNCATION_MASS: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Gaussian1D {
    pub mean: f64,
    pub std: f64,
}

impl Gaussian1D {
    pub fn new(mean: f64, std: f64) -> Self {
        debug_assert!(std >= 0.0, "negative standard deviation");
        Self { mean, std }
    }

    pub fn point_mass(mean: f64) -> Self {
        Self { mean, std: 0.0 }
    }
}

/// Φ(u), via the complementary error function.
pub fn std_normal_cdf(u: f64) -> f64 {
    0.5 * erfc(-u * FRAC_1_SQRT_2)
}

/// 1 - Φ(u), accurate in the upper tail.
pub fn std_normal_sf(u: f64) -> f64 {
    0.5 * erfc(u * FRAC_1_SQRT_2)
}

/// φ(u).
pub fn std_normal_pdf(u: f64) -> f64 {
    (-0.5 * u * u).exp() / (2.0 * PI).sqrt()
}

/// Φ⁻¹(p) for `p` in (0, 1): Acklam's rational approximation followed by one
/// Halley step against [`std_normal_cdf`].
pub fn std_normal_quantile(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_69e2,
        -3.066_479_806_614_716e1,
        2.506_628_277_459_239,
    ];
    const B: [f64; 5] = [
        -5.447_609_879_822_406e1,
        1.615_858_368_580_409e2,
        -1.556_989_798_598_866e2,
        6.680_131_188_771_972e1,
        -1.328_068_155_288_572e1,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_293e-3,
        -3.223_964_580_411_365e-1,
        -2.400_758_277_161_838,
        -2.549_732_539_343_734,
        4.374_664_141_464_968,
        2.938_163_982_698_783,
    ];
    const D: [f64; 4] = [
        7.784_695_709_041_462e-3,
        3.224_671_290_700_398e-1,
        2.445_134_137_142_996,
        3.754_408_661_907_416,
    ];
    if p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
    let tail = |q: f64| {
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };
    let x = if p < 0.02425 {
        tail((-2.0 * p.ln()).sqrt())
    } else if p > 1.0 - 0.02425 {
        -tail((-2.0 * (1.0 - p).ln()).sqrt())
    } else {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    };
    let e = std_normal_cdf(x) - p;
    let u = e * (2.0 * PI).sqrt() * (0.5 * x * x).exp();
    x - u / (1.0 + 0.5 * x * u)
}

/// P(lo <= Z <= hi) for standard normal Z, computed on the tail that keeps
/// the subtraction well-conditioned.
pub fn std_normal_mass(lo: f64, hi: f64) -> f64 {
    if hi <= lo {
        return 0.0;
    }
    if lo > 0.0 {
        std_normal_sf(lo) - std_normal_sf(hi)
    } else {
        std_normal_cdf(hi) - std_normal_cdf(lo)
    }
}

/// `u Φ(u) + φ(u)`, i.e. `E[(u - Z)₊]` for standard normal Z.
fn unit_shortfall(u: f64) -> f64 {
    if u < -30.0 {
        return 0.0;
    }
    (u * std_normal_cdf(u) + std_normal_pdf(u)).max(0.0)
}

/// `E[(c - Y)₊]` for `Y ~ N(mean, std²)`.
pub fn ei_shortfall(c: f64, g: Gaussian1D) -> f64 {
    if g.std == 0.0 {
        return (c - g.mean).max(0.0);
    }
    g.std * unit_shortfall((c - g.mean) / g.std)
}

/// `E[(Y - t)₊]` for `Y ~ N(mean, std²)`.
pub fn ei_exceed(t: f64, g: Gaussian1D) -> f64 {
    if g.std == 0.0 {
        return (g.mean - t).max(0.0);
    }
    g.std * unit_shortfall((g.mean - t) / g.std)
}

/// Gaussian conditioned on `[lower, upper]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncatedGaussian1D {
    pub base: Gaussian1D,
    pub lower: f64,
    pub upper: f64,
}

impl TruncatedGaussian1D {
    pub fn new(base: Gaussian1D, lower: f64, upper: f64) -> Result<Self> {
        if !(lower < upper) {
            return Err(Error::OutOfRange(format!("truncation bounds {lower} >= {upper}")));
        }
        let tg = Self { base, lower, upper };
        let mass = tg.mass();
        if !(mass > MIN_TRUNCATION_MASS) {
            return Err(Error::TruncationMass { mass });
        }
        Ok(tg)
    }

    pub fn mass(&self) -> f64 {
        let Gaussian1D { mean, std } = self.base;
        if std == 0.0 {
            return if (self.lower..=self.upper).contains(&mean) { 1.0 } else { 0.0 };
        }
        std_normal_mass((self.lower - mean) / std, (self.upper - mean) / std)
    }

    /// Inverse-CDF draw from a uniform `u` in (0, 1).
    pub fn sample_from_uniform(&self, u: f64) -> f64 {
        let Gaussian1D { mean, std } = self.base;
        if std == 0.0 {
            return mean;
        }
        let a = (self.lower - mean) / std;
        let b = (self.upper - mean) / std;
        // Work in whichever tail keeps the quantile argument away from 1.
        let z = if a > 0.0 {
            let (sa, sb) = (std_normal_sf(a), std_normal_sf(b));
            -std_normal_quantile(sa - u * (sa - sb))
        } else {
            let (fa, fb) = (std_normal_cdf(a), std_normal_cdf(b));
            std_normal_quantile(fa + u * (fb - fa))
        };
        (mean + std * z).clamp(self.lower, self.upper)
    }
}

/// `E[(Y - t)₊ | lower <= Y <= upper]` from closed-form truncated-normal
/// partial moments.
pub fn truncated_ei_exceed(t: f64, tg: &TruncatedGaussian1D) -> Result<f64> {
    let mass = tg.mass();
    if !(mass > MIN_TRUNCATION_MASS) {
        return Err(Error::TruncationMass { mass });
    }
    let lo = t.max(tg.lower);
    if lo >= tg.upper {
        return Ok(0.0);
    }
    let Gaussian1D { mean, std } = tg.base;
    if std == 0.0 {
        return Ok((mean - t).max(0.0));
    }
    let alpha = (lo - mean) / std;
    let beta = (tg.upper - mean) / std;
    // ∫_lo^b (y - t) p(y) dy = (μ - t) P(lo ≤ Y ≤ b) + s (φ(α) - φ(β))
    let partial = (mean - t) * std_normal_mass(alpha, beta)
        + std * (std_normal_pdf(alpha) - std_normal_pdf(beta));
    Ok((partial / mass).clamp(0.0, tg.upper - t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::adaptive_simpson;
    use crate::sampling::rng;
    use rand::Rng;

    #[test]
    fn cdf_pdf_values() {
        assert_eq!(std_normal_cdf(0.0), 0.5);
        assert!((std_normal_pdf(0.0) - 0.398_942_280_401_432_7).abs() < 1e-15);
        // Φ(1) = 0.5 erfc(-1/√2); reference from a 30-digit erf evaluation.
        assert!((std_normal_cdf(1.0) - 0.841_344_746_068_542_9).abs() < 1e-13);
        assert!((std_normal_cdf(-8.0) - 6.220_960_574_271_785e-16).abs() < 1e-27);
    }

    #[test]
    fn quantile_inverts_cdf() {
        for p in [1e-12, 1e-6, 0.01, 0.3, 0.5, 0.77, 0.99, 1.0 - 1e-9] {
            let x = std_normal_quantile(p);
            assert!((std_normal_cdf(x) - p).abs() < 1e-14 * p.max(1e-3), "{p}");
        }
    }

    #[test]
    fn pdf_is_derivative_of_cdf() {
        for i in -40..=40 {
            let u = i as f64 * 0.2;
            let h = 1e-5;
            let fd = (std_normal_cdf(u + h) - std_normal_cdf(u - h)) / (2.0 * h);
            assert!((fd - std_normal_pdf(u)).abs() < 1e-9);
        }
    }

    #[test]
    fn shortfall_examples() {
        assert!((ei_shortfall(0.0, Gaussian1D::new(0.0, 1.0)) - 0.398_942_280_4).abs() < 1e-10);
        // Φ(1) + φ(1)
        assert!((ei_shortfall(1.0, Gaussian1D::new(0.0, 1.0)) - 1.083_315_470_6).abs() < 1e-10);
        assert_eq!(ei_shortfall(1.0, Gaussian1D::point_mass(3.0)), 0.0);
    }

    #[test]
    fn exceed_examples_and_reflection() {
        assert!((ei_exceed(0.0, Gaussian1D::new(0.0, 1.0)) - 0.398_942_280_4).abs() < 1e-10);
        assert_eq!(ei_exceed(0.0, Gaussian1D::point_mass(1.0)), 1.0);
        let mut g = rng(1);
        for _ in 0..1000 {
            let t = g.random_range(-5.0..5.0);
            let mu = g.random_range(-5.0..5.0);
            let s = g.random_range(0.0..3.0);
            let a = ei_exceed(t, Gaussian1D::new(mu, s));
            let b = ei_shortfall(-t, Gaussian1D::new(-mu, s));
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn shortfall_monotone_in_std_and_threshold() {
        let mut g = rng(2);
        for _ in 0..1000 {
            let c = g.random_range(-4.0..4.0);
            let mu = g.random_range(-4.0..4.0);
            let s = g.random_range(0.0..3.0);
            let base = ei_shortfall(c, Gaussian1D::new(mu, s));
            assert!(ei_shortfall(c, Gaussian1D::new(mu, s + 0.1)) >= base - 1e-15);
            assert!(ei_shortfall(c + 0.1, Gaussian1D::new(mu, s)) >= base - 1e-15);
        }
    }

    #[test]
    fn truncation_vanishes_for_wide_bounds() {
        let mut g = rng(3);
        for _ in 0..200 {
            let t = g.random_range(-10.0..10.0);
            let mu = g.random_range(-10.0..10.0);
            let s = g.random_range(0.01..10.0);
            let base = Gaussian1D::new(mu, s);
            let tg = TruncatedGaussian1D::new(base, -1e6, 1e6).unwrap();
            let v = truncated_ei_exceed(t, &tg).unwrap();
            assert!((v - ei_exceed(t, base)).abs() < 1e-9);
        }
    }

    #[test]
    fn truncated_examples() {
        let tg = TruncatedGaussian1D::new(Gaussian1D::new(0.0, 1.0), 0.0, 1e6).unwrap();
        assert_eq!(truncated_ei_exceed(1e6, &tg).unwrap(), 0.0);
        // E[Y | Y > 0] = 2φ(0)
        let v = truncated_ei_exceed(0.0, &tg).unwrap();
        assert!((v - 0.797_884_560_8).abs() < 1e-10);

        let mut g = rng(4);
        let n = 10_000_000;
        let mut sum = 0.0;
        let mut sum2 = 0.0;
        for _ in 0..n {
            let y = tg.sample_from_uniform(g.random());
            sum += y;
            sum2 += y * y;
        }
        let mean = sum / n as f64;
        let se = ((sum2 / n as f64 - mean * mean) / n as f64).sqrt();
        assert!((mean - v).abs() < 3.0 * se, "{mean} ± {se}");
    }

    #[test]
    fn truncated_bounded_by_range() {
        let mut g = rng(5);
        for _ in 0..1000 {
            let mu = g.random_range(-3.0..3.0);
            let s = g.random_range(0.05..3.0);
            let a = g.random_range(-3.0..2.0);
            let b = a + g.random_range(0.1..3.0);
            let t = g.random_range(-4.0..4.0);
            let tg = TruncatedGaussian1D::new(Gaussian1D::new(mu, s), a, b).unwrap();
            let v = truncated_ei_exceed(t, &tg).unwrap();
            assert!(v >= 0.0 && v <= (b - t).max(0.0) + 1e-15);
        }
    }

    #[test]
    fn truncation_mass_underflow() {
        let base = Gaussian1D::new(0.0, 1.0);
        assert!(matches!(
            TruncatedGaussian1D::new(base, 60.0, 61.0),
            Err(Error::TruncationMass { .. })
        ));
        // Far tail, but still representable through the survival function.
        let tg = TruncatedGaussian1D::new(base, 30.0, 31.0).unwrap();
        let v = truncated_ei_exceed(30.0, &tg).unwrap();
        assert!(v > 0.0 && v < 0.05);
    }

    #[test]
    fn layer_cake_matches_closed_form() {
        let mu = 0.3;
        let s = 1.7;
        let c = 1.1;
        let lower = mu - 12.0 * s;
        let q = adaptive_simpson(|t| std_normal_cdf((t - mu) / s), lower, c, 1e-12);
        assert!((q - ei_shortfall(c, Gaussian1D::new(mu, s))).abs() < 1e-9);
    }
}
