use std::ops::{Add, Div, Mul, Sub};

use super::EULER_GAMMA;
use crate::error::{Error, Result};

const CF_MAX_ITERS: usize = 100_000;
const CF_EPS: f64 = 1e-16;
const TINY: f64 = 1e-300;

/// `e^x E₁(x)` for `x > 0`.
///
/// Power series for `x ≤ 1`, modified-Lentz continued fraction above.
pub fn expint_e1_scaled(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::domain(
            "expint_e1_scaled",
            format!("requires finite x > 0, got {x}"),
        ));
    }
    if x <= 1.0 {
        // E₁(x) = -γ - ln x - Σ_{n≥1} (-x)^n / (n n!)
        let mut sum = 0.0;
        let mut fact = 1.0;
        for n in 1..200 {
            let nf = n as f64;
            fact *= -x / nf;
            let term = fact / nf;
            sum += term;
            if term.abs() < 1e-17 * sum.abs().max(1e-300) {
                break;
            }
        }
        return Ok((-EULER_GAMMA - x.ln() - sum) * x.exp());
    }
    Ok(scaled_en_continued_fraction(Dual::constant(1.0), x)?.re)
}

/// `-e^x ∂E_s(x)/∂s` at `s = 1`, i.e. `e^x ∫₁^∞ ln t · e^{-xt} / t dt`.
///
/// Evaluated by differentiating the `E_s` continued fraction with respect to
/// its order through forward-mode dual numbers. Intended for `x ≳ 1`, where
/// the fraction converges quickly and no cancellation occurs.
pub fn expint_order_derivative_scaled(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::domain(
            "expint_order_derivative_scaled",
            format!("requires finite x > 0, got {x}"),
        ));
    }
    Ok(-scaled_en_continued_fraction(Dual::variable(1.0), x)?.eps)
}

// e^x E_n(x) = 1/(x+n- 1·n/(x+n+2- 2(n+1)/(x+n+4- ...)))
fn scaled_en_continued_fraction(n: Dual, x: f64) -> Result<Dual> {
    let one = Dual::constant(1.0);
    let mut b = n + x;
    let mut c = Dual::constant(1.0 / TINY);
    let mut d = one / b;
    let mut h = d;
    for i in 1..CF_MAX_ITERS {
        let fi = i as f64;
        let a = (n + (fi - 1.0)) * (-fi);
        b = b + 2.0;
        d = one / (a * d + b);
        c = b + a / c;
        let del = c * d;
        h = h * del;
        if (del.re - 1.0).abs() < CF_EPS && del.eps.abs() < CF_EPS * h.eps.abs().max(1.0) {
            return Ok(h);
        }
    }
    Err(Error::Convergence {
        func: "expint continued fraction",
        terms: CF_MAX_ITERS,
    })
}

/// First-order dual number `re + eps·ε`, `ε² = 0`.
#[derive(Debug, Clone, Copy)]
struct Dual {
    re: f64,
    eps: f64,
}

impl Dual {
    fn constant(re: f64) -> Self {
        Self { re, eps: 0.0 }
    }

    fn variable(re: f64) -> Self {
        Self { re, eps: 1.0 }
    }
}

impl Add for Dual {
    type Output = Dual;
    fn add(self, o: Dual) -> Dual {
        Dual {
            re: self.re + o.re,
            eps: self.eps + o.eps,
        }
    }
}

impl Add<f64> for Dual {
    type Output = Dual;
    fn add(self, o: f64) -> Dual {
        Dual {
            re: self.re + o,
            eps: self.eps,
        }
    }
}

impl Sub for Dual {
    type Output = Dual;
    fn sub(self, o: Dual) -> Dual {
        Dual {
            re: self.re - o.re,
            eps: self.eps - o.eps,
        }
    }
}

impl Mul for Dual {
    type Output = Dual;
    fn mul(self, o: Dual) -> Dual {
        Dual {
            re: self.re * o.re,
            eps: self.re * o.eps + self.eps * o.re,
        }
    }
}

impl Mul<f64> for Dual {
    type Output = Dual;
    fn mul(self, o: f64) -> Dual {
        Dual {
            re: self.re * o,
            eps: self.eps * o,
        }
    }
}

impl Div for Dual {
    type Output = Dual;
    fn div(self, o: Dual) -> Dual {
        let inv = 1.0 / o.re;
        Dual {
            re: self.re * inv,
            eps: (self.eps * o.re - self.re * o.eps) * inv * inv,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn e1_reference_values() {
        // quadrature of ∫₁^∞ e^{-t}/t dt, scaled by e
        let v = expint_e1_scaled(1.0).unwrap();
        assert!((v / 0.596_347_362_323_194_074_34 - 1.0).abs() < 1e-13);
        // small-argument expansion -ln x - γ
        let v = expint_e1_scaled(1e-8).unwrap();
        assert!((v / 17.843_465_267_485_484_369 - 1.0).abs() < 1e-12);
        let v = expint_e1_scaled(100.0).unwrap();
        assert!((v / 0.009_901_942_286_733_018_406_4 - 1.0).abs() < 1e-13);
    }

    #[test]
    fn e1_is_continuous_across_branch_point() {
        let lo = expint_e1_scaled(1.0).unwrap();
        let hi = expint_e1_scaled(1.0 + 1e-12).unwrap();
        assert!(((lo - hi) / lo).abs() < 1e-11);
    }

    #[test]
    fn e1_large_argument_asymptote() {
        let x = 1e4;
        let v = expint_e1_scaled(x).unwrap();
        assert!((v * x - 1.0).abs() < 1e-3);
        assert!(expint_e1_scaled(0.0).is_err());
        assert!(expint_e1_scaled(-1.0).is_err());
    }

    #[test]
    fn order_derivative_large_argument_expansion() {
        // e^x J(x) ~ Σ_{n≥1} (-1)^{n+1} H_n n! / x^{n+1}
        let x: f64 = 60.0;
        let mut sum = 0.0;
        let mut harmonic = 0.0;
        let mut fact = 1.0;
        for n in 1..30 {
            let nf = n as f64;
            harmonic += 1.0 / nf;
            fact *= nf;
            let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
            sum += sign * harmonic * fact / x.powi(n + 1);
        }
        let v = expint_order_derivative_scaled(x).unwrap();
        assert!(((v - sum) / sum).abs() < 1e-12, "{v} vs {sum}");
    }
}
