//! Deterministic low-discrepancy points (Halton) in balls, spheres and intervals.
//!
//! A `seed` is a skip offset into the sequence, so two runs with the same seed see
//! identical points.

use std::f64::consts::PI;

const PRIMES: [u8; 32] = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97,
    101, 103, 107, 109, 113, 127, 131,
];

/// Coordinate `dim` (0-based) of Halton point number `index` (0-based) after skipping `seed`.
pub fn halton(seed: u64, index: usize, dim: usize) -> f64 {
    halton::number(PRIMES[dim % PRIMES.len()], seed as usize + index + 1)
}

/// Unit vector in `R^n` from consecutive Halton coordinates (Box–Muller on pairs).
pub fn sphere_point(n: usize, seed: u64, index: usize, first_dim: usize) -> Vec<f64> {
    let mut v = Vec::with_capacity(n + 1);
    let mut d = first_dim;
    while v.len() < n {
        let u1 = halton(seed, index, d).max(1e-300);
        let u2 = halton(seed, index, d + 1);
        d += 2;
        let rad = (-2.0 * u1.ln()).sqrt();
        v.push(rad * (2.0 * PI * u2).cos());
        v.push(rad * (2.0 * PI * u2).sin());
    }
    v.truncate(n);
    let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
    if norm == 0.0 {
        let mut e = vec![0.0; n];
        e[0] = 1.0;
        return e;
    }
    v.iter().map(|a| a / norm).collect()
}

/// Point of the open unit ball in `R^n`, uniform in volume.
pub fn ball_point(n: usize, seed: u64, index: usize) -> Vec<f64> {
    let dir = sphere_point(n, seed, index, 1);
    let rad = halton(seed, index, 0).powf(1.0 / n as f64) * (1.0 - 1e-12);
    dir.into_iter().map(|a| a * rad).collect()
}
