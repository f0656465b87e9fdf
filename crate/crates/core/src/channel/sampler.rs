use num_complex::Complex64;
use rayon::prelude::*;

use super::{snr_scale, LinkConfig};
use crate::error::{Error, Result};
use crate::rng::{self, Purpose, CHUNK};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleKind {
    Snr,
    ServiceBits,
}

impl SampleKind {
    pub fn name(&self) -> &'static str {
        match self {
            SampleKind::Snr => "snr",
            SampleKind::ServiceBits => "service_bits",
        }
    }
}

/// Monte Carlo draws together with the seed that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleBatch {
    values: Vec<f64>,
    seed: u64,
    kind: SampleKind,
}

impl SampleBatch {
    /// Rejects empty batches and negative or non-finite values.
    pub fn new(values: Vec<f64>, seed: u64, kind: SampleKind) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::domain("SampleBatch", "empty batch"));
        }
        if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::domain(
                "SampleBatch",
                format!("values must be finite and nonnegative, found {v}"),
            ));
        }
        Ok(Self { values, seed, kind })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn kind(&self) -> SampleKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }
}

fn check_count(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::domain("sampler", "requested zero samples"));
    }
    if n / CHUNK >= 1 << 48 {
        return Err(Error::domain("sampler", format!("too many samples: {n}")));
    }
    Ok(())
}

// Fills `out` chunk by chunk in parallel; chunk `c` always uses stream
// `(purpose, c)` so the result is independent of the thread pool.
fn fill_chunks<F>(out: &mut [f64], seed: u64, purpose: Purpose, per_slot: F)
where
    F: Fn(&mut rand_chacha::ChaCha8Rng) -> f64 + Sync,
{
    out.par_chunks_mut(CHUNK)
        .enumerate()
        .for_each(|(c, chunk)| {
            let mut rng = rng::stream(seed, purpose, c as u64);
            for v in chunk.iter_mut() {
                *v = per_slot(&mut rng);
            }
        });
}

/// Per-slot SISO SNR after ideal IRS phase alignment.
///
/// Each slot draws N pairs of unit-scale Rayleigh amplitudes `(a_i, b_i)`
/// for the two hops and returns `p_t ζ (Σ a_i b_i)² / σ²`.
pub fn sample_siso_snr(cfg: &LinkConfig, seed: u64, n: usize) -> Result<SampleBatch> {
    check_count(n)?;
    let scale = snr_scale(cfg)?;
    let elems = cfg.n_elems;
    let mut values = vec![0.0; n];
    fill_chunks(&mut values, seed, Purpose::SisoSnr, |rng| {
        let mut sum = 0.0;
        for _ in 0..elems {
            sum += rng::rayleigh(rng) * rng::rayleigh(rng);
        }
        scale * sum * sum
    });
    SampleBatch::new(values, seed, SampleKind::Snr)
}

/// Per-slot MISO SNR with a channel-inverting IRS on the second hop.
///
/// The BS–IRS matrix `H` (N × Nt) has i.i.d. `CN(0, 2)` entries, matching
/// the unit-scale Rayleigh amplitude convention of the SISO sampler. With
/// the reflection matrix cancelling the IRS–UE vector, the effective gain
/// is `|1ᵀ H f|²` and the SNR is `p_t ζ |Σ_i Σ_j h_ij f_j|² / σ²`.
pub fn sample_miso_snr(cfg: &LinkConfig, seed: u64, n: usize) -> Result<SampleBatch> {
    check_count(n)?;
    let scale = snr_scale(cfg)?;
    let f = cfg.precoder_weights();
    let elems = cfg.n_elems;
    let mut values = vec![0.0; n];
    fill_chunks(&mut values, seed, Purpose::MisoSnr, |rng| {
        let mut acc = Complex64::new(0.0, 0.0);
        for _ in 0..elems {
            for fj in &f {
                let (re, im) = rng::normal_pair(rng);
                acc += Complex64::new(re, im) * fj;
            }
        }
        scale * acc.norm_sqr()
    });
    SampleBatch::new(values, seed, SampleKind::Snr)
}
