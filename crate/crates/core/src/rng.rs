//! Deterministic randomness: a single 64-bit master seed from which every
//! sweep derives its own named stream, plus a Halton sequence for
//! low-discrepancy seeding.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Derive a ChaCha stream from the master seed and a stage label, so
/// independent sweeps stay decoupled and reruns are reproducible.
pub fn stream(master_seed: u64, label: &str) -> ChaCha8Rng {
    let mut h: u64 = 0xcbf29ce484222325;
    for b in label.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    ChaCha8Rng::seed_from_u64(master_seed ^ h)
}

const PRIMES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

/// Radical-inverse Halton point, component `dim`, index `i` (1-based
/// internally to avoid the origin).
pub fn halton(i: usize, dim: usize) -> f64 {
    let base = PRIMES[dim % PRIMES.len()];
    let mut n = i as u64 + 1;
    let mut f = 1.0;
    let mut r = 0.0;
    while n > 0 {
        f /= base as f64;
        r += f * (n % base) as f64;
        n /= base;
    }
    r
}

/// Halton point in `[-1, 1]^d`, scaled by `scale`.
pub fn halton_box(i: usize, d: usize, scale: f64) -> Vec<f64> {
    (0..d).map(|k| scale * (2.0 * halton(i, k) - 1.0)).collect()
}
