use crate::channel::SnrDistribution;
use crate::error::{Error, Result};
use crate::specfun::{marcum_q_half, marcum_q_half_complement};

use super::QosExponent;

/// Two-state i.i.d. ON-OFF service: `rate·slot` bits with probability
/// `p_on`, nothing otherwise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OnOffChannel {
    pub p_on: f64,
    pub p_off: f64,
    /// bits/second
    pub rate: f64,
    /// seconds
    pub slot: f64,
}

impl OnOffChannel {
    pub fn new(p_on: f64, p_off: f64, rate: f64, slot: f64) -> Result<Self> {
        let chain = Self {
            p_on,
            p_off,
            rate,
            slot,
        };
        chain.validate()?;
        Ok(chain)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.p_on) || !(0.0..=1.0).contains(&self.p_off) {
            return Err(Error::domain(
                "OnOffChannel",
                format!(
                    "probabilities out of range: p_on={}, p_off={}",
                    self.p_on, self.p_off
                ),
            ));
        }
        if (self.p_on + self.p_off - 1.0).abs() > 1e-12 {
            return Err(Error::domain(
                "OnOffChannel",
                format!("p_on + p_off = {} ≠ 1", self.p_on + self.p_off),
            ));
        }
        if !(self.rate >= 0.0 && self.rate.is_finite())
            || !(self.slot > 0.0 && self.slot.is_finite())
        {
            return Err(Error::domain(
                "OnOffChannel",
                format!(
                    "need rate ≥ 0 and slot > 0, got {} and {}",
                    self.rate, self.slot
                ),
            ));
        }
        Ok(())
    }

    /// Bits delivered in an ON slot.
    pub fn bits_on(&self) -> f64 {
        self.rate * self.slot
    }

    pub fn mean_service(&self) -> f64 {
        self.p_on * self.bits_on()
    }

    /// `ρ = p_on e^{-α r T} + p_off`, evaluated as `1 - p_on(1 - e^{-αrT})`
    /// so that `1 - ρ` keeps full relative precision.
    pub fn mgf(&self, alpha: QosExponent) -> f64 {
        1.0 - self.one_minus_mgf(alpha)
    }

    /// `ln ρ`, through `ln1p` near one and the direct sum far from it.
    pub fn ln_mgf(&self, alpha: QosExponent) -> f64 {
        let x = self.one_minus_mgf(alpha);
        if x <= 0.5 {
            (-x).ln_1p()
        } else {
            (self.p_off + self.p_on * (-alpha.value() * self.bits_on()).exp()).ln()
        }
    }

    fn one_minus_mgf(&self, alpha: QosExponent) -> f64 {
        self.p_on * -(-alpha.value() * self.bits_on()).exp_m1()
    }

    /// Transition matrix times the per-state MGF factors, states ordered
    /// (OFF, ON). Every row of the transition matrix is `(p_off, p_on)`.
    pub fn transition_mgf_matrix(&self, alpha: QosExponent) -> [[f64; 2]; 2] {
        let on = (-alpha.value() * self.bits_on()).exp();
        [[self.p_off, self.p_on * on], [self.p_off, self.p_on * on]]
    }
}

/// Largest eigenvalue of a nonnegative 2×2 matrix.
///
/// Uses `((a+d) + sqrt((a-d)² + 4bc)) / 2`, which avoids the cancellation
/// of the `tr² - 4 det` form and is exact when the matrix has rank one.
pub fn spectral_radius_2x2(m: [[f64; 2]; 2]) -> f64 {
    let [[a, b], [c, d]] = m;
    let disc = (a - d) * (a - d) + 4.0 * b * c;
    0.5 * (a + d + disc.max(0.0).sqrt())
}

/// ON probability `p0 = P(rate ≤ B log₂(1 + γ))` and its complement.
pub fn on_off_probs(dist: &SnrDistribution, rate: f64, bandwidth: f64) -> Result<(f64, f64)> {
    if !(rate >= 0.0) || !(bandwidth > 0.0) {
        return Err(Error::domain(
            "on_off_probs",
            format!("need rate ≥ 0 and bandwidth > 0, got {rate}, {bandwidth}"),
        ));
    }
    if rate == 0.0 {
        return Ok((1.0, 0.0));
    }
    // SNR threshold 2^{r/B} - 1
    let thr = (rate / bandwidth * std::f64::consts::LN_2).exp_m1();
    Ok(match *dist {
        SnrDistribution::ScaledNoncentralChiSq { beta, lambda } => {
            let (a, xi) = (lambda.sqrt(), (thr / beta).sqrt());
            (marcum_q_half(a, xi), marcum_q_half_complement(a, xi))
        }
        SnrDistribution::Exponential { kappa } => {
            let p0 = (-kappa * thr).exp();
            (p0, -(-kappa * thr).exp_m1())
        }
    })
}

/// EC of the ON-OFF channel in bits/slot: `-(1/α) ln(p_on e^{-αrT} + p_off)`.
pub fn ec_on_off(chain: &OnOffChannel, alpha: QosExponent) -> f64 {
    (-chain.ln_mgf(alpha) / alpha.value()).max(0.0)
}

/// Same EC through the spectral radius of the 2×2 matrix.
pub fn ec_on_off_spectral(chain: &OnOffChannel, alpha: QosExponent) -> f64 {
    let rho = spectral_radius_2x2(chain.transition_mgf_matrix(alpha));
    (-rho.ln() / alpha.value()).max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(a: f64) -> QosExponent {
        QosExponent::new(a).unwrap()
    }

    #[test]
    fn reference_exponential_value() {
        // p0 = e^{-0.5}, EC = -10 ln(p0 e^{-0.1} + 1 - p0)
        let d = SnrDistribution::exponential(0.5).unwrap();
        let (p0, p1) = on_off_probs(&d, 1.0, 1.0).unwrap();
        assert!((p0 - (-0.5f64).exp()).abs() < 1e-15);
        let ch = OnOffChannel::new(p0, p1, 1.0, 1.0).unwrap();
        let ec = ec_on_off(&ch, q(0.1));
        let hand = -10.0 * (p0 * (-0.1f64).exp() + 1.0 - p0).ln();
        assert!((ec - hand).abs() < 1e-13);
        assert!((ec - 0.594_517_724_679_71).abs() < 1e-12, "{ec}");
    }

    #[test]
    fn degenerate_chains() {
        let ch = OnOffChannel::new(1.0, 0.0, 2.5, 2.0).unwrap();
        assert!((ec_on_off(&ch, q(3.0)) - 5.0).abs() < 1e-12);
        let ch = OnOffChannel::new(0.3, 0.7, 0.0, 1.0).unwrap();
        assert_eq!(ec_on_off(&ch, q(3.0)), 0.0);
        let ch = OnOffChannel::new(0.3, 0.7, 2.0, 1.0).unwrap();
        let ec = ec_on_off(&ch, q(1e-6));
        assert!((ec / 0.6 - 1.0).abs() < 1e-4);
        assert!(OnOffChannel::new(0.3, 0.6, 1.0, 1.0).is_err());
        assert!(OnOffChannel::new(0.3, 0.7, -1.0, 1.0).is_err());
    }

    #[test]
    fn spectral_radius_agrees() {
        let ch = OnOffChannel::new(0.42, 0.58, 1.3, 0.7).unwrap();
        for a in [1e-3, 0.1, 1.0, 10.0] {
            let m = ch.transition_mgf_matrix(q(a));
            assert!((spectral_radius_2x2(m) - ch.mgf(q(a))).abs() < 1e-15);
        }
        assert_eq!(spectral_radius_2x2([[2.0, 0.0], [0.0, 3.0]]), 3.0);
    }

    #[test]
    fn zero_rate_is_always_on() {
        for d in [
            SnrDistribution::exponential(2.0).unwrap(),
            SnrDistribution::noncentral(0.01, 160.0).unwrap(),
        ] {
            assert_eq!(on_off_probs(&d, 0.0, 1.0).unwrap(), (1.0, 0.0));
        }
    }
}
