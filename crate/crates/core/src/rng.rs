//! Seeded, stream-split random number generation.
//!
//! Every draw comes from ChaCha8 keyed by the user seed. The 64-bit stream
//! id selects an independent keystream:
//!
//! ```text
//! stream = (purpose << 48) | chunk
//! ```
//!
//! where `purpose` names the consumer (see [`Purpose`]) and `chunk` is the
//! index of a fixed-size block of output. Work is split into chunks of a
//! fixed size, so results do not depend on thread count or scheduling.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use rand_distr::{Distribution, StandardNormal};

/// Draws per parallel work unit.
pub const CHUNK: usize = 8192;

/// Consumer tag occupying the top 16 bits of the stream id.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u16)]
pub enum Purpose {
    SisoSnr = 1,
    MisoSnr = 2,
    Bootstrap = 3,
    KappaFit = 4,
    InverseCdf = 5,
}

pub fn stream(seed: u64, purpose: Purpose, chunk: u64) -> ChaCha8Rng {
    debug_assert!(chunk < 1 << 48);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((purpose as u64) << 48) | chunk);
    rng
}

/// Uniform on `(0, 1]` with 53 random bits; never returns zero.
#[inline]
pub fn uniform_open0(rng: &mut impl RngCore) -> f64 {
    ((rng.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Rayleigh amplitude with scale 1 by inversion: `sqrt(-2 ln U)`.
#[inline]
pub fn rayleigh(rng: &mut impl RngCore) -> f64 {
    libm::sqrt(-2.0 * libm::log(uniform_open0(rng)))
}

/// Two independent standard normals (real and imaginary part of a
/// `CN(0, 2)` draw).
///
/// Uses the Ziggurat sampler: the MISO channel needs `N·Nt` of these per
/// slot, and transcendental-based transforms are several times slower.
#[inline]
pub fn normal_pair(rng: &mut impl RngCore) -> (f64, f64) {
    (StandardNormal.sample(rng), StandardNormal.sample(rng))
}
