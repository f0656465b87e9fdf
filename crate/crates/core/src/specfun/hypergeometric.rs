use super::{ln_gamma, ln_gamma_abs, KahanSum, SeriesControl};
use crate::error::{Error, Result};

/// Argument at or above which `ln_hyp1f1` tries the large-x asymptotic
/// expansion before falling back to the log-scaled power series.
pub const HYP1F1_ASYMPTOTIC_THRESHOLD: f64 = 30.0;

// Rescaling step for series whose partial sums grow like e^x.
const RESCALE_AT: f64 = 1e250;
const LN_RESCALE_AT: f64 = 575.646_273_248_511_4;

/// `₀F₁(;c;x) = Σ x^n / ((c)_n n!)`.
pub fn hyp0f1(c: f64, x: f64, ctl: SeriesControl) -> Result<f64> {
    if !(c > 0.0) {
        return Err(Error::domain("hyp0f1", format!("requires c > 0, got {c}")));
    }
    let mut sum = KahanSum::new(1.0);
    let mut term = 1.0;
    for n in 0..ctl.max_terms() {
        let nf = n as f64;
        term *= x / ((c + nf) * (nf + 1.0));
        sum.add(term);
        if term.abs() <= ctl.rel_tol() * sum.value().abs() {
            return Ok(sum.value());
        }
    }
    Err(Error::Convergence {
        func: "hyp0f1",
        terms: ctl.max_terms(),
    })
}

/// `ln ₁F₁(a; b; x)` for `a > 0`, `b > 0`.
///
/// Negative arguments go through Kummer's transformation
/// `₁F₁(a;b;x) = e^x ₁F₁(b-a;b;-x)`. For `x ≥ 30` the asymptotic expansion
/// `Γ(b)/Γ(a) e^x x^{a-b} Σ (b-a)_k (1-a)_k / (k! x^k)` is used when it
/// reaches `rel_tol` before its terms start growing; otherwise, and below
/// the threshold, a Kahan-summed power series with running log rescaling.
pub fn ln_hyp1f1(a: f64, b: f64, x: f64, ctl: SeriesControl) -> Result<f64> {
    if !(b > 0.0) {
        return Err(Error::domain(
            "ln_hyp1f1",
            format!("requires b > 0, got {b}"),
        ));
    }
    if !(a > 0.0) {
        return Err(Error::domain(
            "ln_hyp1f1",
            format!("requires a > 0, got {a}"),
        ));
    }
    if !x.is_finite() {
        return Err(Error::domain("ln_hyp1f1", format!("non-finite x {x}")));
    }
    ln_hyp1f1_any(a, b, x, ctl)
}

fn ln_hyp1f1_any(a: f64, b: f64, x: f64, ctl: SeriesControl) -> Result<f64> {
    if x == 0.0 || a == 0.0 {
        return Ok(0.0);
    }
    if x < 0.0 {
        return Ok(x + ln_hyp1f1_any(b - a, b, -x, ctl)?);
    }
    if x >= HYP1F1_ASYMPTOTIC_THRESHOLD && a > 0.0 {
        if let Some(v) = hyp1f1_asymptotic(a, b, x, ctl)? {
            return Ok(v);
        }
    }
    ln_hyp1f1_series(a, b, x, ctl)
}

pub(crate) fn ln_hyp1f1_series(a: f64, b: f64, x: f64, ctl: SeriesControl) -> Result<f64> {
    let mut log_scale = 0.0;
    let mut sum = KahanSum::new(1.0);
    let mut term = 1.0;
    for n in 0..ctl.max_terms() {
        let nf = n as f64;
        let ratio = (a + nf) / (b + nf) * x / (nf + 1.0);
        term *= ratio;
        sum.add(term);
        let s = sum.value();
        if s.abs() > RESCALE_AT {
            sum.scale(1.0 / RESCALE_AT);
            term /= RESCALE_AT;
            log_scale += LN_RESCALE_AT;
        }
        // Once the ratio drops below one the remaining tail is bounded by a
        // geometric series.
        let r = ratio.abs();
        if term == 0.0 || (r < 1.0 && term.abs() <= ctl.rel_tol() * sum.value().abs() * (1.0 - r)) {
            let s = sum.value();
            if !(s > 0.0) {
                return Err(Error::domain(
                    "ln_hyp1f1",
                    format!("₁F₁({a};{b};{x}) is not positive"),
                ));
            }
            return Ok(s.ln() + log_scale);
        }
    }
    Err(Error::Convergence {
        func: "ln_hyp1f1",
        terms: ctl.max_terms(),
    })
}

pub(crate) fn hyp1f1_asymptotic(a: f64, b: f64, x: f64, ctl: SeriesControl) -> Result<Option<f64>> {
    // The recessive e^{0} branch Γ(b)/Γ(b-a) (-x)^{-a} vanishes identically
    // when b-a is a nonpositive integer; otherwise it must be negligible.
    let ba = b - a;
    let recessive_vanishes = ba <= 0.0 && ba == ba.floor();
    if !recessive_vanishes {
        let ln_ratio = ln_gamma_abs(a)? - ln_gamma_abs(ba)? - x + (b - 2.0 * a) * x.ln();
        if ln_ratio > ctl.rel_tol().ln() {
            return Ok(None);
        }
    }
    let mut sum = KahanSum::new(1.0);
    let mut term: f64 = 1.0;
    let mut converged = false;
    for k in 0..ctl.max_terms() {
        let kf = k as f64;
        let next = term * (ba + kf) * (1.0 - a + kf) / ((kf + 1.0) * x);
        if next == 0.0 {
            converged = true;
            break;
        }
        if next.abs() > term.abs() {
            break;
        }
        sum.add(next);
        term = next;
        if term.abs() <= ctl.rel_tol() * sum.value().abs() {
            converged = true;
            break;
        }
    }
    let s = sum.value();
    if !converged || !(s > 0.0) {
        return Ok(None);
    }
    Ok(Some(
        ln_gamma(b)? - ln_gamma(a)? + x + (a - b) * x.ln() + s.ln(),
    ))
}

/// `₃F₃([1,1,1];[2,2,2];x) = Σ x^n / ((n+1)³ n!)`.
pub fn hyp3f3_unit(x: f64, ctl: SeriesControl) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::domain("hyp3f3_unit", format!("non-finite x {x}")));
    }
    let mut sum = KahanSum::new(1.0);
    let mut pow_fact = 1.0; // x^n / n!
    for n in 1..ctl.max_terms() {
        let nf = n as f64;
        pow_fact *= x / nf;
        let term = pow_fact / ((nf + 1.0) * (nf + 1.0) * (nf + 1.0));
        sum.add(term);
        if nf > x.abs() && term.abs() <= ctl.rel_tol() * sum.value().abs() {
            return Ok(sum.value());
        }
    }
    Err(Error::Convergence {
        func: "hyp3f3_unit",
        terms: ctl.max_terms(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctl() -> SeriesControl {
        SeriesControl::default()
    }

    #[test]
    fn hyp0f1_identities() {
        assert_eq!(hyp0f1(0.5, 0.0, ctl()).unwrap(), 1.0);
        assert_eq!(hyp0f1(3.7, 0.0, ctl()).unwrap(), 1.0);
        // ₀F₁(;1/2;z²/4) = cosh z
        assert!((hyp0f1(0.5, 0.25, ctl()).unwrap() - 1f64.cosh()).abs() < 1e-14);
        let z: f64 = 7.3;
        let v = hyp0f1(0.5, z * z / 4.0, ctl()).unwrap();
        assert!((v / z.cosh() - 1.0).abs() < 1e-13);
        // extended-precision series value
        let v = hyp0f1(0.5, 10.0, ctl()).unwrap();
        assert!((v / 279.055_685_129_963_242_915 - 1.0).abs() < 1e-13);
    }

    #[test]
    fn hyp0f1_rejects_bad_c_and_reports_truncation() {
        assert!(hyp0f1(0.0, 1.0, ctl()).is_err());
        let tight = SeriesControl::new(3, 1e-15).unwrap();
        assert!(matches!(
            hyp0f1(0.5, 50.0, tight),
            Err(Error::Convergence { .. })
        ));
    }

    #[test]
    fn hyp0f1_is_increasing() {
        let mut prev = 0.0;
        for i in 0..100 {
            let v = hyp0f1(1.5, i as f64 * 0.5, ctl()).unwrap();
            assert!(v > prev);
            prev = v;
        }
    }

    #[test]
    fn ln_hyp1f1_exponential_identity() {
        assert_eq!(ln_hyp1f1(2.0, 3.0, 0.0, ctl()).unwrap(), 0.0);
        for i in 0..=400 {
            let x = -50.0 + i as f64 * 0.25;
            let v = ln_hyp1f1(1.0, 1.0, x, ctl()).unwrap();
            assert!((v - x).abs() <= 1e-12, "x={x} got {v}");
        }
    }

    #[test]
    fn ln_hyp1f1_matches_extended_precision() {
        // mpmath at 40 digits: log(hyp1f1(2.5, 0.5, 40))
        let v = ln_hyp1f1(2.5, 0.5, 40.0, ctl()).unwrap();
        assert!((v / 47.738_197_593_730_250_45 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn branches_agree_around_threshold() {
        for &(a, b) in &[(0.3557, 0.5), (1.6427, 0.5), (0.05, 0.5), (2.5, 1.5)] {
            for &x in &[30.0, 45.0, 80.5] {
                let series = ln_hyp1f1_series(a, b, x, ctl()).unwrap();
                let asym = hyp1f1_asymptotic(a, b, x, ctl()).unwrap();
                if let Some(asym) = asym {
                    assert!(
                        ((asym - series) / series).abs() < 1e-11,
                        "a={a} b={b} x={x}: {asym} vs {series}"
                    );
                }
            }
        }
    }

    #[test]
    fn large_parameter_falls_back_to_series() {
        // a = 10/ln2 + 3/2: asymptotic terms diverge at x ≈ 80
        let a = 10.0 / std::f64::consts::LN_2 + 1.5;
        assert!(hyp1f1_asymptotic(a, 0.5, 80.5, ctl()).unwrap().is_none());
        let v = ln_hyp1f1(a, 0.5, 80.5, ctl()).unwrap();
        assert!(v.is_finite() && v > 80.5);
    }

    #[test]
    fn hyp3f3_values() {
        assert_eq!(hyp3f3_unit(0.0, ctl()).unwrap(), 1.0);
        let tight = SeriesControl::new(10_000, 1e-17).unwrap();
        let v = hyp3f3_unit(-1.0, tight).unwrap();
        assert!((v - 0.891_212_798_111_302_376_07).abs() < 1e-15);
    }
}
