//! Monte Carlo oracles: simulated service, empirical EC, moments and
//! goodness of fit.

use std::f64::consts::LN_2;

use rand_core::RngCore;
use rayon::prelude::*;

use crate::channel::{
    sample_miso_snr, sample_siso_snr, LinkConfig, SampleBatch, SampleKind, SnrDistribution,
};
use crate::eccore::{check_scenario, QosExponent, Scenario};
use crate::error::{Error, Result};
use crate::rng::{self, Purpose, CHUNK};

/// Block length suggested for correlated service; see [`auto_block_length`].
pub const DEFAULT_BLOCK_LENGTH: usize = 100;
pub const BOOTSTRAP_RESAMPLES: usize = 200;
/// Largest block log-MGF magnitude `L·|ln ρ̂|` accepted by [`auto_block_length`].
pub const MAX_BLOCK_LOG_MGF: f64 = 2.0;
/// `ln(1e-300)`: below this every block's `e^{-αS}` underflows in linear scale.
const LN_UNDERFLOW: f64 = -690.775_527_898_213_7;

#[derive(Debug, Clone, PartialEq)]
pub struct EcEstimate {
    /// bits/slot
    pub value: f64,
    /// Bootstrap standard error, bits/slot.
    pub stderr: f64,
    pub slots: usize,
    pub blocks: usize,
    pub block_length: usize,
    pub warnings: Vec<String>,
}

/// Gärtner–Ellis estimate `-(1/(αL)) ln mean_b e^{-α S_b}` over blocks of
/// `block_length` slots, with a 200-resample percentile bootstrap over
/// blocks for the standard error.
pub fn empirical_ec(
    service: &SampleBatch,
    alpha: QosExponent,
    block_length: usize,
) -> Result<EcEstimate> {
    if service.kind() != SampleKind::ServiceBits {
        return Err(Error::domain(
            "empirical_ec",
            "batch does not hold service bits",
        ));
    }
    let n = service.len();
    if block_length == 0 || !n.is_multiple_of(block_length) {
        return Err(Error::domain(
            "empirical_ec",
            format!("{n} slots are not divisible into blocks of {block_length}"),
        ));
    }
    let a = alpha.value();
    let blocks = n / block_length;
    let logs: Vec<f64> = service
        .values()
        .chunks(block_length)
        .map(|b| -a * b.iter().sum::<f64>())
        .collect();
    let shift = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = logs.iter().map(|l| (l - shift).exp()).collect();
    let scale = -1.0 / (a * block_length as f64);
    let estimate = |sum: f64| scale * (shift + (sum / blocks as f64).ln());

    let value = estimate(weights.iter().sum());
    let mut boot: Vec<f64> = (0..BOOTSTRAP_RESAMPLES)
        .into_par_iter()
        .map(|k| {
            let mut rng = rng::stream(service.seed(), Purpose::Bootstrap, k as u64);
            let mut sum = 0.0;
            for _ in 0..blocks {
                sum += weights[bounded(&mut rng, blocks)];
            }
            estimate(sum)
        })
        .collect();
    boot.sort_by(f64::total_cmp);
    let pct = |p: f64| boot[((p * (boot.len() - 1) as f64).round()) as usize];
    let stderr = (0.5 * (pct(0.841_344_746) - pct(0.158_655_254))).max(0.0);

    let mut warnings = Vec::new();
    if shift < LN_UNDERFLOW {
        warnings.push(format!(
            "every block has e^(-αS) below 1e-300 (largest ln = {shift:.1}); α is large for this sample scale"
        ));
    }
    Ok(EcEstimate {
        value,
        stderr,
        slots: n,
        blocks,
        block_length,
        warnings,
    })
}

// Uniform index in [0, n) by the widening-multiply method.
fn bounded(rng: &mut impl RngCore, n: usize) -> usize {
    ((rng.next_u64() as u128 * n as u128) >> 64) as usize
}

/// Largest block length in `{100, 10, 1}` dividing the batch with
/// `L·|ln ρ̂| ≤ 2`, where `ρ̂` is the per-slot empirical MGF.
///
/// Service is i.i.d. across slots, so every block length has the same
/// limit; long blocks only help when the per-block MGF stays estimable
/// from the available number of blocks.
pub fn auto_block_length(service: &SampleBatch, alpha: QosExponent) -> usize {
    let a = alpha.value();
    let logs: Vec<f64> = service.values().iter().map(|s| -a * s).collect();
    let m = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mean: f64 = logs.iter().map(|l| (l - m).exp()).sum::<f64>() / logs.len() as f64;
    let ln_rho = m + mean.ln();
    [DEFAULT_BLOCK_LENGTH, 10, 1]
        .into_iter()
        .find(|&l| service.len().is_multiple_of(l) && l as f64 * -ln_rho <= MAX_BLOCK_LOG_MGF)
        .unwrap_or(1)
}

/// Maps per-slot SNR to per-slot service bits for `scenario`.
///
/// Perfect CSI: `T·B log₂(1+γ)`. No CSI: `r·T` when `r ≤ B log₂(1+γ)`,
/// otherwise 0.
pub fn service_from_snr(
    snr: &SampleBatch,
    cfg: &LinkConfig,
    scenario: Scenario,
    rate: Option<f64>,
) -> Result<SampleBatch> {
    if snr.kind() != SampleKind::Snr {
        return Err(Error::domain(
            "service_from_snr",
            "batch does not hold SNR values",
        ));
    }
    if scenario.needs_rate() != rate.is_some() {
        return Err(Error::Config(format!(
            "{scenario}: a rate must be given exactly for no-CSI scenarios"
        )));
    }
    let (b, t) = (cfg.bandwidth, cfg.slot);
    let values: Vec<f64> = match rate {
        None => snr
            .values()
            .iter()
            .map(|g| t * b * g.ln_1p() / LN_2)
            .collect(),
        Some(r) => {
            if !(r >= 0.0 && r.is_finite()) {
                return Err(Error::domain("service_from_snr", format!("bad rate {r}")));
            }
            let thr = (r / b * LN_2).exp_m1();
            snr.values()
                .iter()
                .map(|&g| if g >= thr { r * t } else { 0.0 })
                .collect()
        }
    };
    SampleBatch::new(values, snr.seed(), SampleKind::ServiceBits)
}

/// Simulates `slots` slots of service for `scenario`; `rate` must be given
/// exactly for the no-CSI scenarios.
pub fn simulate_service(
    cfg: &LinkConfig,
    scenario: Scenario,
    rate: Option<f64>,
    seed: u64,
    slots: usize,
) -> Result<SampleBatch> {
    check_scenario(scenario, cfg, rate)?;
    let snr = if scenario.is_siso() {
        sample_siso_snr(cfg, seed, slots)?
    } else {
        sample_miso_snr(cfg, seed, slots)?
    };
    service_from_snr(&snr, cfg, scenario, rate)
}

/// `(mean, E[s²], variance)` of a batch.
pub fn empirical_moments(samples: &SampleBatch) -> (f64, f64, f64) {
    let n = samples.len() as f64;
    let (s1, s2) = samples
        .values()
        .iter()
        .fold((0.0, 0.0), |(a, b), &v| (a + v, b + v * v));
    let mean = s1 / n;
    let second = s2 / n;
    let var = samples
        .values()
        .iter()
        .map(|v| (v - mean) * (v - mean))
        .sum::<f64>()
        / n;
    (mean, second, var)
}

/// Kolmogorov–Smirnov distance between the empirical CDF of `samples` and
/// `dist`.
pub fn ks_distance(samples: &SampleBatch, dist: &SnrDistribution) -> Result<f64> {
    if samples.kind() != SampleKind::Snr {
        return Err(Error::domain(
            "ks_distance",
            "batch does not hold SNR values",
        ));
    }
    let mut xs = samples.values().to_vec();
    xs.par_sort_unstable_by(f64::total_cmp);
    let n = xs.len() as f64;
    let d = xs
        .par_iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = dist.cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .reduce(|| 0.0, f64::max);
    Ok(d)
}

/// Draws directly from an analytical SNR law: by inversion for the
/// exponential, as `β(Z + √λ)²` for the scaled non-central chi-square.
pub fn sample_from_dist(dist: &SnrDistribution, seed: u64, n: usize) -> Result<SampleBatch> {
    dist.validate()?;
    if n == 0 {
        return Err(Error::domain("sample_from_dist", "requested zero samples"));
    }
    let mut values = vec![0.0; n];
    values
        .par_chunks_mut(CHUNK)
        .enumerate()
        .for_each(|(c, chunk)| {
            let mut rng = rng::stream(seed, Purpose::InverseCdf, c as u64);
            for v in chunk.iter_mut() {
                *v = match *dist {
                    SnrDistribution::Exponential { kappa } => {
                        -libm::log(rng::uniform_open0(&mut rng)) / kappa
                    }
                    SnrDistribution::ScaledNoncentralChiSq { beta, lambda } => {
                        let z = rng::normal_pair(&mut rng).0 + lambda.sqrt();
                        beta * z * z
                    }
                };
            }
        });
    SampleBatch::new(values, seed, SampleKind::Snr)
}
