//! Fixed-rate (no-CSI) transmission rate optimization.
//!
//! Maximizing the ON-OFF EC is the same as minimizing
//! `ρ(r) = p0(r) e^{-αrT} + 1 - p0(r)`.

mod brent;

use std::f64::consts::LN_2;
use std::fmt;
use std::str::FromStr;

use crate::channel::{miso_snr_dist, siso_snr_dist, KappaMode, LinkConfig, SnrDistribution};
use crate::eccore::{ec_nocsi_dist, on_off_probs, QosExponent, Scenario};
use crate::error::{Error, Result};
use crate::specfun::marcum_q_half_db;

pub use brent::maximize_bracketed;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RateMethod {
    GradientDescent,
    ClosedForm,
    RootFind,
    Grid,
}

impl RateMethod {
    pub fn name(self) -> &'static str {
        match self {
            RateMethod::GradientDescent => "gradient_descent",
            RateMethod::ClosedForm => "closed_form",
            RateMethod::RootFind => "root_find",
            RateMethod::Grid => "grid",
        }
    }
}

impl fmt::Display for RateMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateSolution {
    /// bits/second
    pub r_star: f64,
    /// bits/slot
    pub ec_at_r_star: f64,
    pub iterations: usize,
    pub method: RateMethod,
    /// False when the method's own approximation is known not to hold.
    pub valid: bool,
    pub warnings: Vec<String>,
}

/// Fixed-step descent parameters: start, step `δ`, tolerance `ε_c`, cap.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DescentSettings {
    pub r0: f64,
    pub step: f64,
    pub conv_tol: f64,
    pub max_iters: usize,
}

impl DescentSettings {
    pub fn new(r0: f64, step: f64, conv_tol: f64, max_iters: usize) -> Result<Self> {
        let s = Self {
            r0,
            step,
            conv_tol,
            max_iters,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        let pos = |v: f64| v > 0.0 && v.is_finite();
        if !pos(self.r0) || !pos(self.step) || !pos(self.conv_tol) || self.max_iters == 0 {
            return Err(Error::Config(format!("invalid descent settings {self:?}")));
        }
        Ok(())
    }

    /// `r0 = B`, `δ = 0.05 B`, `ε_c = 1e-8 B`, `10⁵` iterations.
    pub fn paper_defaults(bandwidth: f64) -> Self {
        Self {
            r0: bandwidth,
            step: 0.05 * bandwidth,
            conv_tol: 1e-8 * bandwidth,
            max_iters: 100_000,
        }
    }

    /// Starts at the best point of a coarse scan and sets `δ = 1/ρ''` there,
    /// so the fixed-step law behaves like a Newton iteration near `r*`.
    pub fn for_objective(obj: &NoCsiObjective) -> Result<Self> {
        let mut s = Self::paper_defaults(obj.bandwidth);
        let r_max = obj.rate_upper_bound()?;
        let n = 64;
        let (mut best_r, mut best) = (r_max / n as f64, f64::NEG_INFINITY);
        for i in 1..=n {
            let r = r_max * i as f64 / n as f64;
            let g = obj.ec(r);
            if g > best {
                best = g;
                best_r = r;
            }
        }
        s.r0 = best_r;
        let h = 1e-4 * best_r;
        let curv = (obj.gradient(best_r + h)? - obj.gradient(best_r - h)?) / (2.0 * h);
        if curv > 0.0 && curv.is_finite() {
            s.step = 1.0 / curv;
        }
        Ok(s)
    }

    pub fn for_link(cfg: &LinkConfig, alpha: QosExponent, scenario: Scenario) -> Result<Self> {
        Self::for_objective(&NoCsiObjective::from_link(
            cfg,
            alpha,
            scenario,
            KappaMode::default(),
        )?)
    }
}

/// The no-CSI objective for one SNR law and QoS exponent.
#[derive(Debug, Clone, Copy)]
pub struct NoCsiObjective {
    pub dist: SnrDistribution,
    pub scenario: Scenario,
    pub alpha: QosExponent,
    pub bandwidth: f64,
    pub slot: f64,
}

impl NoCsiObjective {
    pub fn from_link(
        cfg: &LinkConfig,
        alpha: QosExponent,
        scenario: Scenario,
        kappa: KappaMode,
    ) -> Result<Self> {
        let dist = match scenario {
            Scenario::SisoNoCsi => siso_snr_dist(cfg)?,
            Scenario::MisoNoCsi => miso_snr_dist(cfg, kappa)?,
            _ => {
                return Err(Error::Config(format!(
                    "rate optimization applies to no-CSI scenarios, not {scenario}"
                )))
            }
        };
        Ok(Self {
            dist,
            scenario,
            alpha,
            bandwidth: cfg.bandwidth,
            slot: cfg.slot,
        })
    }

    fn probs(&self, r: f64) -> (f64, f64) {
        on_off_probs(&self.dist, r.max(0.0), self.bandwidth).unwrap_or((0.0, 1.0))
    }

    fn p0(&self, r: f64) -> f64 {
        self.probs(r).0
    }

    /// `1 - ρ(r) = p0 (1 - e^{-αrT})`, without cancellation.
    pub fn gain(&self, r: f64) -> f64 {
        if r <= 0.0 {
            return 0.0;
        }
        self.p0(r) * -(-self.alpha.value() * r * self.slot).exp_m1()
    }

    pub fn rho(&self, r: f64) -> f64 {
        self.ln_rho(r).exp()
    }

    /// `ln ρ(r)`, accurate both when `ρ ≈ 1` and when `ρ ≪ 1`.
    pub fn ln_rho(&self, r: f64) -> f64 {
        if r <= 0.0 {
            return 0.0;
        }
        let (p0, p1) = self.probs(r);
        let x = self.alpha.value() * r * self.slot;
        let gain = p0 * -(-x).exp_m1();
        if gain <= 0.5 {
            (-gain).ln_1p()
        } else {
            (p1 + p0 * (-x).exp()).ln()
        }
    }

    pub fn ec(&self, r: f64) -> f64 {
        (-self.ln_rho(r) / self.alpha.value()).max(0.0)
    }

    /// `∂ρ/∂r = (∂p0/∂r)(e^{-αrT} - 1) - αT e^{-αrT} p0`.
    pub fn gradient(&self, r: f64) -> Result<f64> {
        if !(r > 0.0) {
            return Err(Error::Singularity { rate: r });
        }
        let (a, t, b) = (self.alpha.value(), self.slot, self.bandwidth);
        let decay = (-a * r * t).exp();
        let growth = r / b * LN_2;
        let dp0 = match self.dist {
            SnrDistribution::ScaledNoncentralChiSq { beta, lambda } => {
                // Ξ = sqrt((2^{r/B} - 1)/β)
                let xi = (growth.exp_m1() / beta).sqrt();
                let dxi = LN_2 / b * growth.exp() / (2.0 * beta * xi);
                marcum_q_half_db(lambda.sqrt(), xi) * dxi
            }
            SnrDistribution::Exponential { kappa } => -kappa * LN_2 / b * growth.exp() * self.p0(r),
        };
        Ok(dp0 * (-a * r * t).exp_m1() - a * t * decay * self.p0(r))
    }

    /// A rate beyond which `p0` is below 1e-12: `B log₂(1 + q)` at the
    /// `1 - 1e-12` SNR quantile.
    pub fn rate_upper_bound(&self) -> Result<f64> {
        let q = self.dist.quantile(1.0 - 1e-12)?;
        Ok(self.bandwidth * q.ln_1p() / LN_2)
    }

    fn solution(&self, r: f64, iterations: usize, method: RateMethod) -> Result<RateSolution> {
        let ec = ec_nocsi_dist(
            &self.dist,
            self.scenario,
            self.alpha,
            r,
            self.bandwidth,
            self.slot,
        )?;
        Ok(RateSolution {
            r_star: r,
            ec_at_r_star: ec.ec_bits_per_slot,
            iterations,
            method,
            valid: true,
            warnings: Vec::new(),
        })
    }
}

/// `∂ρ/∂r` for the SISO no-CSI link. Undefined at `r = 0`.
pub fn siso_ec_gradient(cfg: &LinkConfig, alpha: QosExponent, rate: f64) -> Result<f64> {
    NoCsiObjective::from_link(cfg, alpha, Scenario::SisoNoCsi, KappaMode::default())?.gradient(rate)
}

/// Runs `r ← r - δ ∂ρ/∂r` until `|Δr| ≤ ε_c`.
///
/// Safeguards: a nonpositive iterate is projected to `ε_c`; a step that
/// increases `ρ` is rejected and the step halved. After an accepted step the
/// step doubles back toward `δ`, and convergence is only declared at the
/// nominal `δ` so a shrunken step cannot fake it.
pub fn descend(obj: &NoCsiObjective, settings: &DescentSettings) -> Result<RateSolution> {
    settings.validate()?;
    let mut r = settings.r0;
    let mut step = settings.step;
    let mut ln_rho = obj.ln_rho(r);
    for it in 1..=settings.max_iters {
        let g = obj.gradient(r)?;
        let mut next = r - step * g;
        if next <= 0.0 {
            next = settings.conv_tol;
        }
        let next_ln_rho = obj.ln_rho(next);
        if next_ln_rho > ln_rho * (1.0 - 4.0 * f64::EPSILON) {
            step *= 0.5;
            continue;
        }
        let dr = (next - r).abs();
        let nominal = step == settings.step;
        r = next;
        ln_rho = next_ln_rho;
        step = (2.0 * step).min(settings.step);
        if nominal && dr <= settings.conv_tol {
            let mut sol = obj.solution(r, it, RateMethod::GradientDescent)?;
            if -ln_rho < 1e-12 {
                sol.warnings.push(format!(
                    "stopped where EC is numerically zero (r = {r}); the start may lie on a flat plateau"
                ));
            }
            return Ok(sol);
        }
    }
    Err(Error::NonConvergence {
        iterations: settings.max_iters,
        last: r,
    })
}

pub fn optimize_rate_siso(
    cfg: &LinkConfig,
    alpha: QosExponent,
    settings: &DescentSettings,
) -> Result<RateSolution> {
    let obj = NoCsiObjective::from_link(cfg, alpha, Scenario::SisoNoCsi, KappaMode::default())?;
    descend(&obj, settings)
}

/// Which form of the MISO stationarity condition to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MisoRateForm {
    /// `(r/B) ln2 + ln(e^{αrT} - 1) = ln(BαT/(κ ln2))`, the condition
    /// `∂ρ/∂r = 0` for the exponential law.
    #[default]
    Stationary,
    /// Published variant whose right side lacks the logarithm.
    Printed,
}

impl FromStr for MisoRateForm {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "stationary" => Ok(Self::Stationary),
            "printed" => Ok(Self::Printed),
            _ => Err(Error::Unknown {
                kind: "MISO rate form",
                name: s.to_string(),
            }),
        }
    }
}

fn miso_rhs(kappa: f64, alpha: f64, b: f64, t: f64, form: MisoRateForm) -> f64 {
    let x = b * alpha * t / (kappa * LN_2);
    match form {
        MisoRateForm::Stationary => x.ln(),
        MisoRateForm::Printed => x,
    }
}

/// Left side `(r/B) ln2 + ln(e^{αrT} - 1)`, strictly increasing in `r`.
pub fn miso_rate_equation_lhs(r: f64, alpha: f64, bandwidth: f64, slot: f64) -> f64 {
    r / bandwidth * LN_2 + (alpha * r * slot).exp_m1().ln()
}

/// Closed-form rate from `e^{αrT} - 1 ≈ e^{αrT}`:
/// `r* = RHS / (ln2/B + αT)`. Returns `(r*, valid)`; `valid` is false when
/// `e^{αr*T} < 10` or the formula gives a nonpositive rate (clamped to 0).
pub fn miso_rate_closed_form(
    kappa: f64,
    alpha: QosExponent,
    bandwidth: f64,
    slot: f64,
    form: MisoRateForm,
) -> (f64, bool) {
    let a = alpha.value();
    let r = miso_rhs(kappa, a, bandwidth, slot, form) / (LN_2 / bandwidth + a * slot);
    if !(r > 0.0) {
        return (0.0, false);
    }
    (r, (a * r * slot).exp() >= 10.0)
}

/// Root of the MISO rate equation by bisection; the bracket `(0, r_hi]` is
/// grown by doubling.
pub fn miso_rate_root(
    kappa: f64,
    alpha: QosExponent,
    bandwidth: f64,
    slot: f64,
    form: MisoRateForm,
) -> Result<(f64, usize)> {
    let a = alpha.value();
    let rhs = miso_rhs(kappa, a, bandwidth, slot, form);
    let f = |r: f64| miso_rate_equation_lhs(r, a, bandwidth, slot) - rhs;
    if !rhs.is_finite() {
        return Err(Error::Bracket(format!("right side is not finite: {rhs}")));
    }
    let mut hi = bandwidth;
    let mut iters = 0;
    while f(hi) < 0.0 {
        hi *= 2.0;
        iters += 1;
        if iters > 2000 || !hi.is_finite() {
            return Err(Error::Bracket(format!("no sign change up to r = {hi}")));
        }
    }
    // The left side tends to -∞ as r → 0⁺, so (0, hi] always brackets.
    let mut lo = 0.0;
    while hi - lo > 1e-15 * hi {
        let mid = 0.5 * (lo + hi);
        if !(mid > lo && mid < hi) {
            break;
        }
        iters += 1;
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((0.5 * (lo + hi), iters))
}

fn miso_objective(cfg: &LinkConfig, alpha: QosExponent) -> Result<NoCsiObjective> {
    NoCsiObjective::from_link(cfg, alpha, Scenario::MisoNoCsi, KappaMode::default())
}

fn kappa_of(obj: &NoCsiObjective) -> f64 {
    match obj.dist {
        SnrDistribution::Exponential { kappa } => kappa,
        _ => unreachable!("MISO objective has an exponential law"),
    }
}

pub fn optimize_rate_miso_closed(cfg: &LinkConfig, alpha: QosExponent) -> Result<RateSolution> {
    optimize_rate_miso_closed_form(&miso_objective(cfg, alpha)?, MisoRateForm::default())
}

pub fn optimize_rate_miso_closed_form(
    obj: &NoCsiObjective,
    form: MisoRateForm,
) -> Result<RateSolution> {
    let (r, valid) = miso_rate_closed_form(kappa_of(obj), obj.alpha, obj.bandwidth, obj.slot, form);
    let mut sol = obj.solution(r, 0, RateMethod::ClosedForm)?;
    sol.valid = valid;
    if !valid {
        sol.warnings.push(format!(
            "closed form outside its validity range (e^(α r* T) = {:.3} < 10)",
            (obj.alpha.value() * r * obj.slot).exp()
        ));
    }
    Ok(sol)
}

pub fn solve_rate_miso_exact(cfg: &LinkConfig, alpha: QosExponent) -> Result<RateSolution> {
    solve_rate_miso_form(&miso_objective(cfg, alpha)?, MisoRateForm::default())
}

pub fn solve_rate_miso_form(obj: &NoCsiObjective, form: MisoRateForm) -> Result<RateSolution> {
    let (r, iters) = miso_rate_root(kappa_of(obj), obj.alpha, obj.bandwidth, obj.slot, form)?;
    obj.solution(r, iters, RateMethod::RootFind)
}

/// Grid search over `[0, r_max]` followed by a parabolic (Brent) refinement
/// inside the bracket formed by the best grid point's neighbours.
pub fn grid_argmax(obj: &NoCsiObjective, r_max: f64, points: usize) -> Result<RateSolution> {
    if points < 3 || !(r_max > 0.0) {
        return Err(Error::Config(format!(
            "grid search needs points ≥ 3 and r_max > 0, got {points}, {r_max}"
        )));
    }
    let h = r_max / (points - 1) as f64;
    let values: Vec<f64> = (0..points).map(|i| obj.ec(i as f64 * h)).collect();
    let (best, _) = values
        .iter()
        .enumerate()
        .fold(
            (0, f64::NEG_INFINITY),
            |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc },
        );
    if values[best] <= 0.0 {
        return obj.solution(0.0, points, RateMethod::Grid);
    }
    let lo = best.saturating_sub(1) as f64 * h;
    let hi = (best + 1).min(points - 1) as f64 * h;
    let (r, evals) = maximize_bracketed(|r| obj.ec(r), lo, hi, 1e-14);
    let r = if obj.ec(r) >= values[best] {
        r
    } else {
        best as f64 * h
    };
    obj.solution(r, points + evals, RateMethod::Grid)
}

pub fn grid_argmax_rate(
    cfg: &LinkConfig,
    alpha: QosExponent,
    scenario: Scenario,
    r_max: f64,
    points: usize,
) -> Result<RateSolution> {
    grid_argmax(
        &NoCsiObjective::from_link(cfg, alpha, scenario, KappaMode::default())?,
        r_max,
        points,
    )
}
