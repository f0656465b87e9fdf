//! Physical-layer model of the IRS-assisted downlink: pathloss, analytical
//! SNR laws and Monte Carlo channel samplers.

mod config;
mod sampler;

use std::f64::consts::PI;

pub use config::{LinkConfig, Precoder, CONFIG_KEYS};
pub use sampler::{sample_miso_snr, sample_siso_snr, SampleBatch, SampleKind};

use crate::error::{Error, Result};
use crate::specfun::{gaussian_tail, marcum_q_half, marcum_q_half_complement};

/// `16 - π²`, the variance factor of a product of two unit-scale Rayleighs
/// (times four).
pub const RAYLEIGH_PRODUCT_VAR4: f64 = 16.0 - PI * PI;

/// Two-hop pathloss `ζ = G_tG_r/(4π)² · (x y / (d1 d2))² · cos²φ`.
pub fn pathloss(cfg: &LinkConfig) -> Result<f64> {
    cfg.validate()?;
    let area = cfg.x_irs * cfg.y_irs / (cfg.d1 * cfg.d2);
    let c = cfg.phi_inc.cos();
    Ok(cfg.g_t * cfg.g_r / (16.0 * PI * PI) * area * area * c * c)
}

/// Average received SNR per unit of `|channel sum|²`: `p_t ζ / σ²`.
pub fn snr_scale(cfg: &LinkConfig) -> Result<f64> {
    Ok(cfg.p_t * pathloss(cfg)? / cfg.sigma2)
}

/// Law of the per-slot received SNR.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SnrDistribution {
    /// `β X` with `X` non-central chi-square, one degree of freedom,
    /// non-centrality `λ`.
    ScaledNoncentralChiSq { beta: f64, lambda: f64 },
    /// Exponential with rate `κ` (mean `1/κ`).
    Exponential { kappa: f64 },
}

impl SnrDistribution {
    pub fn noncentral(beta: f64, lambda: f64) -> Result<Self> {
        let d = Self::ScaledNoncentralChiSq { beta, lambda };
        d.validate()?;
        Ok(d)
    }

    pub fn exponential(kappa: f64) -> Result<Self> {
        let d = Self::Exponential { kappa };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |v: f64| v > 0.0 && v.is_finite();
        match *self {
            Self::ScaledNoncentralChiSq { beta, lambda } if ok(beta) && ok(lambda) => Ok(()),
            Self::Exponential { kappa } if ok(kappa) => Ok(()),
            _ => Err(Error::domain(
                "SnrDistribution",
                format!("parameters must be positive and finite: {self:?}"),
            )),
        }
    }

    /// `P(γ ≤ x)`; zero for `x ≤ 0`.
    pub fn cdf(&self, x: f64) -> f64 {
        if !(x > 0.0) {
            return 0.0;
        }
        match *self {
            Self::ScaledNoncentralChiSq { beta, lambda } => {
                marcum_q_half_complement(lambda.sqrt(), (x / beta).sqrt())
            }
            Self::Exponential { kappa } => -(-kappa * x).exp_m1(),
        }
    }

    /// `P(γ > x)`, accurate in the upper tail.
    pub fn sf(&self, x: f64) -> f64 {
        if !(x > 0.0) {
            return 1.0;
        }
        match *self {
            Self::ScaledNoncentralChiSq { beta, lambda } => {
                marcum_q_half(lambda.sqrt(), (x / beta).sqrt())
            }
            Self::Exponential { kappa } => (-kappa * x).exp(),
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            Self::ScaledNoncentralChiSq { beta, lambda } => beta * (1.0 + lambda),
            Self::Exponential { kappa } => 1.0 / kappa,
        }
    }

    pub fn variance(&self) -> f64 {
        match *self {
            Self::ScaledNoncentralChiSq { beta, lambda } => {
                2.0 * beta * beta * (1.0 + 2.0 * lambda)
            }
            Self::Exponential { kappa } => 1.0 / (kappa * kappa),
        }
    }

    /// Inverse CDF for `p ∈ [0, 1)`.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(0.0..1.0).contains(&p) {
            return Err(Error::domain(
                "quantile",
                format!("requires p in [0, 1), got {p}"),
            ));
        }
        if p == 0.0 {
            return Ok(0.0);
        }
        match *self {
            Self::Exponential { kappa } => Ok(-(-p).ln_1p() / kappa),
            Self::ScaledNoncentralChiSq { beta, lambda } => {
                // Solve on the amplitude scale b = sqrt(x/β), where the law is
                // a folded normal N(√λ, 1).
                let a = lambda.sqrt();
                let q = 1.0 - p;
                let tail = |b: f64| gaussian_tail(b - a) + gaussian_tail(b + a);
                let (mut lo, mut hi) = (0.0, a + 1.0);
                while tail(hi) > q {
                    hi *= 2.0;
                }
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if !(mid > lo && mid < hi) {
                        break;
                    }
                    if tail(mid) > q {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                let b = 0.5 * (lo + hi);
                Ok(beta * b * b)
            }
        }
    }
}

/// `P(γ ≤ x)` for either law.
pub fn snr_cdf(dist: &SnrDistribution, x: f64) -> f64 {
    dist.cdf(x)
}

/// Non-centrality of the coherently combined SISO channel; depends only on N.
pub fn siso_lambda(n_elems: usize) -> f64 {
    n_elems as f64 * PI * PI / RAYLEIGH_PRODUCT_VAR4
}

/// SISO SNR law: `β X`, `X ~ χ²₁(λ)`.
pub fn siso_snr_dist(cfg: &LinkConfig) -> Result<SnrDistribution> {
    if cfg.n_tx != 1 {
        return Err(Error::Config(format!(
            "SISO SNR law requires n_tx = 1, got {}",
            cfg.n_tx
        )));
    }
    let n = cfg.n_elems as f64;
    let beta = n * snr_scale(cfg)? * RAYLEIGH_PRODUCT_VAR4 / 4.0;
    SnrDistribution::noncentral(beta, siso_lambda(cfg.n_elems))
}

/// How the exponential rate of the MISO SNR is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum KappaMode {
    /// `κ = σ² / (2N p_t ζ Σ|f_j|²)`, the reciprocal of the exact mean of
    /// the sampled model.
    #[default]
    Variance,
    /// `κ = σ⁴ / (2N² (p_t ζ Σ|f_j|²)²)`, the literal published expression.
    Paper,
    /// Maximum-likelihood fit `1 / sample mean` over `draws` simulated slots.
    Fitted { seed: u64, draws: usize },
}

impl KappaMode {
    pub fn name(&self) -> &'static str {
        match self {
            KappaMode::Variance => "variance",
            KappaMode::Paper => "paper",
            KappaMode::Fitted { .. } => "fitted",
        }
    }
}

pub fn kappa_variance(cfg: &LinkConfig) -> Result<f64> {
    let denom = 2.0 * cfg.n_elems as f64 * snr_scale(cfg)? * cfg.precoder_power();
    Ok(1.0 / denom)
}

pub fn kappa_paper(cfg: &LinkConfig) -> Result<f64> {
    let n = cfg.n_elems as f64;
    let s = snr_scale(cfg)? * cfg.precoder_power();
    Ok(1.0 / (2.0 * n * n * s * s))
}

pub fn kappa_fitted(cfg: &LinkConfig, seed: u64, draws: usize) -> Result<f64> {
    let batch = sample_miso_snr(cfg, seed, draws)?;
    Ok(1.0 / batch.mean())
}

/// MISO SNR law: exponential with rate chosen by `mode`.
pub fn miso_snr_dist(cfg: &LinkConfig, mode: KappaMode) -> Result<SnrDistribution> {
    cfg.validate()?;
    let kappa = match mode {
        KappaMode::Variance => kappa_variance(cfg)?,
        KappaMode::Paper => kappa_paper(cfg)?,
        KappaMode::Fitted { seed, draws } => kappa_fitted(cfg, seed, draws)?,
    };
    SnrDistribution::exponential(kappa)
}

/// SNR law of the configured link: SISO when `n_tx = 1`, MISO otherwise.
pub fn snr_dist(cfg: &LinkConfig, mode: KappaMode) -> Result<SnrDistribution> {
    if cfg.n_tx == 1 {
        siso_snr_dist(cfg)
    } else {
        miso_snr_dist(cfg, mode)
    }
}
