use std::f64::consts::{FRAC_1_SQRT_2, PI};

use crate::error::{Error, Result};

/// Upper tail `P(Z > x)` of the standard normal distribution.
pub fn gaussian_tail(x: f64) -> f64 {
    0.5 * libm::erfc(x * FRAC_1_SQRT_2)
}

/// Marcum Q-function of order 1/2.
///
/// For order 1/2 the function is the tail of a folded, shifted normal:
/// `Q_{1/2}(a, b) = P(|Z + a| > b) = Φc(b - a) + Φc(b + a)`. The result is
/// clamped to `[0, 1]`. Both arguments must be nonnegative.
pub fn marcum_q_half(a: f64, b: f64) -> f64 {
    debug_assert!(a >= 0.0 && b >= 0.0, "marcum_q_half requires a, b >= 0");
    (gaussian_tail(b - a) + gaussian_tail(b + a)).clamp(0.0, 1.0)
}

/// `1 - Q_{1/2}(a, b)`, evaluated without cancellation when `Q` is close to one.
pub fn marcum_q_half_complement(a: f64, b: f64) -> f64 {
    debug_assert!(a >= 0.0 && b >= 0.0);
    (gaussian_tail(a - b) - gaussian_tail(a + b)).clamp(0.0, 1.0)
}

/// Partial derivative `∂Q_{1/2}(a, b)/∂b`.
///
/// Uses the Bessel form `-b^{1/2} a^{1/2} e^{-(a²+b²)/2} I_{-1/2}(ab)`,
/// assembled in the log domain so large `ab` does not overflow. At `a = 0`
/// the limit `-2φ(b)` is returned.
pub fn marcum_q_half_db(a: f64, b: f64) -> f64 {
    if b <= 0.0 {
        // The folded density at the origin.
        return -2.0 * (-0.5 * a * a).exp() / (2.0 * PI).sqrt();
    }
    if a == 0.0 {
        return -2.0 * (-0.5 * b * b).exp() / (2.0 * PI).sqrt();
    }
    let ln_mag = 0.5 * b.ln() + 0.5 * a.ln() - 0.5 * (a * a + b * b)
        + ln_bessel_i_minus_half_unchecked(a * b);
    -ln_mag.exp()
}

/// Modified Bessel function of the first kind, order -1/2:
/// `I_{-1/2}(z) = sqrt(2/(πz)) cosh z`.
pub fn bessel_i_minus_half(z: f64) -> Result<f64> {
    if !(z > 0.0) {
        return Err(Error::domain(
            "bessel_i_minus_half",
            format!("requires z > 0, got {z}"),
        ));
    }
    if z > 700.0 {
        return Ok(ln_bessel_i_minus_half_unchecked(z).exp());
    }
    Ok((2.0 / (PI * z)).sqrt() * z.cosh())
}

/// `ln I_{-1/2}(z)`, finite for all positive `z`.
pub fn ln_bessel_i_minus_half(z: f64) -> Result<f64> {
    if !(z > 0.0) {
        return Err(Error::domain(
            "ln_bessel_i_minus_half",
            format!("requires z > 0, got {z}"),
        ));
    }
    Ok(ln_bessel_i_minus_half_unchecked(z))
}

fn ln_bessel_i_minus_half_unchecked(z: f64) -> f64 {
    // cosh z = e^z (1 + e^{-2z}) / 2
    0.5 * (2.0 / (PI * z)).ln() + z + (-2.0 * z).exp().ln_1p() - std::f64::consts::LN_2
}
