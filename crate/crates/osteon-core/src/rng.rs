//! Deterministic random sampling helpers over a counter-based stream RNG.

use rand_chacha::rand_core::RngCore;
use rand_chacha::ChaCha8Rng;

use crate::fmath;

/// Uniform in `[0, 1)`.
pub fn uniform(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

pub fn uniform_in(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * uniform(rng)
}

/// Standard normal via Box-Muller.
pub fn normal(rng: &mut ChaCha8Rng) -> f64 {
    let u1 = loop {
        let u = uniform(rng);
        if u > 0.0 {
            break u;
        }
    };
    let u2 = uniform(rng);
    fmath::sqrt(-2.0 * fmath::ln(u1)) * fmath::cos(core::f64::consts::TAU * u2)
}
