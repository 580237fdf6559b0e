//! Seeded sampling helpers shared by the oracles, searches and loops.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Deterministic RNG for a given seed.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Latin-hypercube sample of `n` points in `[lower, upper]`.
pub fn latin_hypercube<R: Rng>(rng: &mut R, n: usize, lower: &[f64], upper: &[f64]) -> Vec<Vec<f64>> {
    let d = lower.len();
    let mut out = vec![vec![0.0; d]; n];
    for j in 0..d {
        let mut perm: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            let k = rng.random_range(0..=i);
            perm.swap(i, k);
        }
        for (i, row) in out.iter_mut().enumerate() {
            let u: f64 = rng.random();
            let t = (perm[i] as f64 + u) / n as f64;
            row[j] = lower[j] + t * (upper[j] - lower[j]);
        }
    }
    out
}

/// Radical inverse of `i` in `base` (van der Corput).
pub fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut r = 0.0;
    while i > 0 {
        r += f * (i % base) as f64;
        i /= base;
        f *= inv;
    }
    r
}

pub(crate) const PRIMES: [u64; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];

/// `dim`-dimensional Halton point with index `i` (skipping index 0).
pub fn halton(i: u64, dim: usize) -> Vec<f64> {
    assert!(dim <= PRIMES.len());
    (0..dim).map(|j| radical_inverse(i + 1, PRIMES[j])).collect()
}
