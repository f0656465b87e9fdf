//! Effective capacity of the four link scenarios and the ON-OFF chain.
//!
//! Throughout, `α` is in 1/bit, rates in bits/second, the slot length `T`
//! in seconds and every EC in bits/slot.

mod onoff;

use std::collections::BTreeMap;
use std::f64::consts::{LN_2, PI};
use std::fmt;
use std::str::FromStr;

pub use onoff::{ec_on_off, ec_on_off_spectral, on_off_probs, spectral_radius_2x2, OnOffChannel};

use crate::channel::{miso_snr_dist, siso_snr_dist, KappaMode, LinkConfig, SnrDistribution};
use crate::error::{Error, Result};
use crate::specfun::{
    expint_e1_scaled, expint_order_derivative_scaled, hyp3f3_unit, ln_gamma, ln_hyp1f1, quad,
    SeriesControl, EULER_GAMMA,
};

/// QoS exponent `α > 0` (1/bit).
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct QosExponent(f64);

impl QosExponent {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::domain(
                "QosExponent",
                format!("alpha must be positive and finite, got {alpha}"),
            ));
        }
        Ok(Self(alpha))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Scenario {
    SisoCsi,
    SisoNoCsi,
    MisoCsi,
    MisoNoCsi,
}

impl Scenario {
    pub const ALL: [Scenario; 4] = [
        Scenario::SisoCsi,
        Scenario::SisoNoCsi,
        Scenario::MisoCsi,
        Scenario::MisoNoCsi,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::SisoCsi => "siso_csi",
            Scenario::SisoNoCsi => "siso_nocsi",
            Scenario::MisoCsi => "miso_csi",
            Scenario::MisoNoCsi => "miso_nocsi",
        }
    }

    /// No-CSI scenarios transmit at a fixed rate.
    pub fn needs_rate(self) -> bool {
        matches!(self, Scenario::SisoNoCsi | Scenario::MisoNoCsi)
    }

    pub fn is_siso(self) -> bool {
        matches!(self, Scenario::SisoCsi | Scenario::SisoNoCsi)
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Scenario::ALL
            .into_iter()
            .find(|sc| sc.name() == s)
            .ok_or_else(|| Error::Unknown {
                kind: "scenario",
                name: s.to_string(),
            })
    }
}

/// How the SISO perfect-CSI moment generating function is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SisoCsiMethod {
    /// Adaptive quadrature of `E[(1 + βX)^{-k}]`; no approximation.
    #[default]
    Exact,
    /// Closed form of `E[(βX)^{-k}]` (high-SNR relaxation `1 + βx ≈ βx`).
    /// Finite only for `k < 1/2`.
    Relaxed,
    /// The published log-domain closed form, evaluated term by term.
    Printed,
}

impl SisoCsiMethod {
    pub fn name(self) -> &'static str {
        match self {
            SisoCsiMethod::Exact => "exact",
            SisoCsiMethod::Relaxed => "relaxed",
            SisoCsiMethod::Printed => "printed",
        }
    }
}

impl FromStr for SisoCsiMethod {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(Self::Exact),
            "relaxed" => Ok(Self::Relaxed),
            "printed" => Ok(Self::Printed),
            _ => Err(Error::Unknown {
                kind: "siso_csi method",
                name: s.to_string(),
            }),
        }
    }
}

/// How the MISO perfect-CSI EC is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MisoCsiMethod {
    /// `μ - (α/2)σ²` from the first two moments of the service.
    #[default]
    Gaussian,
    /// Quadrature of `E[(1+γ)^{-k}]` over the exponential law.
    Exact,
}

impl MisoCsiMethod {
    pub fn name(self) -> &'static str {
        match self {
            MisoCsiMethod::Gaussian => "gaussian",
            MisoCsiMethod::Exact => "exact",
        }
    }
}

impl FromStr for MisoCsiMethod {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian" => Ok(Self::Gaussian),
            "exact" => Ok(Self::Exact),
            _ => Err(Error::Unknown {
                kind: "miso_csi method",
                name: s.to_string(),
            }),
        }
    }
}

/// Knobs shared by the scenario evaluators.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EcOptions {
    pub siso_csi: SisoCsiMethod,
    pub miso_csi: MisoCsiMethod,
    pub kappa: KappaMode,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EcResult {
    /// Nonnegative; a negative raw value is kept as `ec_raw` in diagnostics.
    pub ec_bits_per_slot: f64,
    pub scenario: Scenario,
    pub diagnostics: BTreeMap<String, f64>,
    pub warnings: Vec<String>,
}

impl EcResult {
    fn new(scenario: Scenario, raw: f64) -> Self {
        let mut diagnostics = BTreeMap::new();
        diagnostics.insert("ec_raw".to_string(), raw);
        Self {
            ec_bits_per_slot: raw.max(0.0),
            scenario,
            diagnostics,
            warnings: Vec::new(),
        }
    }

    fn diag(&mut self, key: &str, v: f64) {
        self.diagnostics.insert(key.to_string(), v);
    }
}

/// `B log₂(1 + snr)` in bits/second.
pub fn shannon_rate(snr: f64, bandwidth: f64) -> f64 {
    bandwidth * snr.ln_1p() / LN_2
}

/// Exponent `k = αBT/ln2` such that `e^{-α s} = (1+γ)^{-k}` for Shannon service.
pub fn shannon_exponent(alpha: QosExponent, bandwidth: f64, slot: f64) -> f64 {
    alpha.value() * bandwidth * slot / LN_2
}

/// SNR below which `1 + γ ≈ γ` is considered poor.
pub const RELAXATION_SNR: f64 = 9.0;
/// Probability mass below [`RELAXATION_SNR`] that triggers the warning.
pub const RELAXATION_MASS: f64 = 0.1;

// ---------------------------------------------------------------- SISO CSI

/// `ln E[(1 + βX)^{-k}]`, `X ~ χ²₁(λ)`, by adaptive quadrature.
///
/// With `X = (Z + a)²`, `a = √λ`, the expectation is a smooth integral
/// against the standard normal density. When the exponent stays small over
/// the bulk, the integrand `φ(z)·expm1(·)` is used so `α → 0` keeps full
/// relative precision; otherwise the integrand is shifted in the log
/// domain to avoid underflow at large `k`.
pub fn ln_mgf_noncentral_exact(beta: f64, lambda: f64, k: f64) -> Result<f64> {
    let a = lambda.sqrt();
    let norm = 1.0 / (2.0 * PI).sqrt();
    let expo = |z: f64| -k * (beta * (z + a) * (z + a)).ln_1p();
    let lo = -a - 40.0;
    let hi = 40.0;
    let breaks = [-a, 0.0];
    if k * (beta * (a + 8.0) * (a + 8.0)).ln_1p() < 0.5 {
        let r = quad::integrate(
            |z| norm * (-0.5 * z * z).exp() * expo(z).exp_m1(),
            lo,
            hi,
            &breaks,
            1e-300,
            1e-13,
            2000,
        )?;
        return Ok(r.value.ln_1p());
    }
    let shift = expo(0.0).max(-0.5 * lambda);
    let r = quad::integrate(
        |z| norm * (-0.5 * z * z + expo(z) - shift).exp(),
        lo,
        hi,
        &breaks,
        1e-300,
        1e-13,
        2000,
    )?;
    Ok(shift + r.value.ln())
}

/// `ln E[(βX)^{-k}] = -k ln(2β) - λ/2 + ln Γ(1/2-k) - ln Γ(1/2) + ln ₁F₁(1/2-k; 1/2; λ/2)`.
pub fn ln_mgf_noncentral_relaxed(beta: f64, lambda: f64, k: f64) -> Result<f64> {
    if !(k < 0.5) {
        return Err(Error::domain(
            "ln_mgf_noncentral_relaxed",
            format!("E[(βX)^-k] diverges for k ≥ 1/2, got k = {k}"),
        ));
    }
    let ctl = SeriesControl::default();
    Ok(
        -k * (2.0 * beta).ln() - 0.5 * lambda + ln_gamma(0.5 - k)? - ln_gamma(0.5)?
            + ln_hyp1f1(0.5 - k, 0.5, 0.5 * lambda, ctl)?,
    )
}

/// Addends of the published closed form for `ln E[e^{-α s}]`, in order.
pub fn ln_mgf_noncentral_printed_terms(
    beta: f64,
    lambda: f64,
    k: f64,
) -> Result<[(&'static str, f64); 7]> {
    let ctl = SeriesControl::default();
    Ok([
        ("printed_exp", -0.5 * lambda),
        ("printed_const", -0.5 * LN_2 - ln_gamma(0.5)?),
        ("printed_beta", -k * beta.ln()),
        ("printed_lambda_quarter", -(k + 0.5) * (0.25 * lambda).ln()),
        ("printed_lambda_half", (k + 1.5) * (0.5 * lambda).ln()),
        ("printed_gamma", ln_gamma(k + 1.5)?),
        (
            "printed_hyp1f1",
            ln_hyp1f1(k + 1.5, 0.5, 0.5 * lambda, ctl)?,
        ),
    ])
}

pub fn ln_mgf_noncentral_printed(beta: f64, lambda: f64, k: f64) -> Result<f64> {
    Ok(ln_mgf_noncentral_printed_terms(beta, lambda, k)?
        .iter()
        .map(|t| t.1)
        .sum())
}

/// SISO perfect-CSI EC for a given `(β, λ)` law.
pub fn ec_noncentral_csi(
    beta: f64,
    lambda: f64,
    alpha: QosExponent,
    bandwidth: f64,
    slot: f64,
    method: SisoCsiMethod,
) -> Result<EcResult> {
    let dist = SnrDistribution::noncentral(beta, lambda)?;
    let k = shannon_exponent(alpha, bandwidth, slot);
    let ln_mgf = match method {
        SisoCsiMethod::Exact => ln_mgf_noncentral_exact(beta, lambda, k)?,
        SisoCsiMethod::Relaxed => ln_mgf_noncentral_relaxed(beta, lambda, k)?,
        SisoCsiMethod::Printed => ln_mgf_noncentral_printed(beta, lambda, k)?,
    };
    let mut res = EcResult::new(Scenario::SisoCsi, -ln_mgf / alpha.value());
    res.diag("beta", beta);
    res.diag("lambda", lambda);
    res.diag("k", k);
    res.diag("ln_mgf", ln_mgf);
    // The alternatives are recorded side by side; NaN marks a form that
    // does not exist at this k.
    let relaxed = ln_mgf_noncentral_relaxed(beta, lambda, k).unwrap_or(f64::NAN);
    res.diag("ec_relaxed", -relaxed / alpha.value());
    match ln_mgf_noncentral_printed_terms(beta, lambda, k) {
        Ok(terms) => {
            let total: f64 = terms.iter().map(|t| t.1).sum();
            for (name, v) in terms {
                res.diag(name, v);
            }
            res.diag("ec_printed", -total / alpha.value());
        }
        Err(_) => res.diag("ec_printed", f64::NAN),
    }
    let low_mass = dist.cdf(RELAXATION_SNR);
    res.diag("relaxation_mass", low_mass);
    if low_mass > RELAXATION_MASS {
        res.warnings.push(format!(
            "high-SNR relaxation is poor: P(SNR < {RELAXATION_SNR}) = {low_mass:.3}"
        ));
    }
    if method != SisoCsiMethod::Exact && res.ec_bits_per_slot != res.diagnostics["ec_raw"] {
        res.warnings
            .push("closed form produced a negative EC; clamped to 0".to_string());
    }
    Ok(res)
}

pub fn ec_siso_csi(cfg: &LinkConfig, alpha: QosExponent) -> Result<EcResult> {
    ec_siso_csi_with(cfg, alpha, SisoCsiMethod::default())
}

pub fn ec_siso_csi_with(
    cfg: &LinkConfig,
    alpha: QosExponent,
    method: SisoCsiMethod,
) -> Result<EcResult> {
    let SnrDistribution::ScaledNoncentralChiSq { beta, lambda } = siso_snr_dist(cfg)? else {
        unreachable!("SISO law is non-central chi-square")
    };
    ec_noncentral_csi(beta, lambda, alpha, cfg.bandwidth, cfg.slot, method)
}

// ---------------------------------------------------------------- MISO CSI

/// Below this rate the series form of the second log-moment is used; above
/// it, the continued-fraction form.
pub const SECOND_MOMENT_SERIES_MAX_KAPPA: f64 = 4.0;

/// `E[ln(1+X)]` and `E[ln²(1+X)]` for `X ~ Exp(κ)`, in nats.
///
/// The first is `e^κ E₁(κ)`. The second is
/// `e^κ [π²/6 + (C + ln κ)² - 2κ ₃F₃(1,1,1; 2,2,2; -κ)]` for small `κ`;
/// for larger `κ` that bracket cancels to `O(e^{-κ})` and the equivalent
/// `2 e^κ ∫₁^∞ ln t e^{-κt}/t dt` is used instead.
pub fn exponential_log_moments(kappa: f64) -> Result<(f64, f64)> {
    let m1 = expint_e1_scaled(kappa)?;
    let m2 = if kappa <= SECOND_MOMENT_SERIES_MAX_KAPPA {
        second_log_moment_series(kappa)?
    } else {
        2.0 * expint_order_derivative_scaled(kappa)?
    };
    Ok((m1, m2))
}

pub(crate) fn second_log_moment_series(kappa: f64) -> Result<f64> {
    let c = EULER_GAMMA + kappa.ln();
    let ctl = SeriesControl::new(10_000, 1e-16)?;
    let bracket = PI * PI / 6.0 + c * c - 2.0 * kappa * hyp3f3_unit(-kappa, ctl)?;
    Ok(kappa.exp() * bracket)
}

/// `ln E[(1+X)^{-k}]` for `X ~ Exp(κ)`, by quadrature of
/// `∫ e^{-u} ((1+u/κ)^{-k} - 1) du` so that small `k` keeps its digits.
pub fn ln_mgf_exponential_exact(kappa: f64, k: f64) -> Result<f64> {
    SnrDistribution::exponential(kappa)?;
    if !(k >= 0.0 && k.is_finite()) {
        return Err(Error::domain(
            "ln_mgf_exponential_exact",
            format!("bad exponent {k}"),
        ));
    }
    let knee = kappa / k.max(1e-300);
    let breaks = [knee.min(700.0), 1.0, 10.0, 100.0];
    let r = quad::integrate(
        |u| (-u).exp() * (-k * (u / kappa).ln_1p()).exp_m1(),
        0.0,
        745.0,
        &breaks,
        1e-300,
        1e-13,
        4000,
    )?;
    Ok(r.value.max(-1.0).ln_1p())
}

/// MISO perfect-CSI EC under the Gaussian approximation of the service.
/// The exact value is recorded as `ec_exact`.
pub fn ec_exponential_csi(
    kappa: f64,
    alpha: QosExponent,
    bandwidth: f64,
    slot: f64,
) -> Result<EcResult> {
    ec_exponential_csi_with(kappa, alpha, bandwidth, slot, MisoCsiMethod::Gaussian)
}

pub fn ec_exponential_csi_with(
    kappa: f64,
    alpha: QosExponent,
    bandwidth: f64,
    slot: f64,
    method: MisoCsiMethod,
) -> Result<EcResult> {
    SnrDistribution::exponential(kappa)?;
    let k = alpha.value() * bandwidth * slot / LN_2;
    let exact = -ln_mgf_exponential_exact(kappa, k)? / alpha.value();
    if method == MisoCsiMethod::Exact {
        let mut res = EcResult::new(Scenario::MisoCsi, exact);
        res.diag("kappa", kappa);
        res.diag("ln_mgf", -alpha.value() * exact);
        return Ok(res);
    }
    let (m1, m2) = exponential_log_moments(kappa)?;
    let scale = bandwidth * slot / LN_2;
    let mu = scale * m1;
    let eta = scale * scale * m2;
    let var = eta - mu * mu;
    let raw = mu - 0.5 * alpha.value() * var;
    let mut res = EcResult::new(Scenario::MisoCsi, raw);
    res.diag("kappa", kappa);
    res.diag("mu", mu);
    res.diag("eta", eta);
    res.diag("sigma2", var);
    res.diag("ln_mgf", -alpha.value() * raw);
    res.diag("ec_exact", exact);
    if raw < 0.0 {
        res.warnings.push(format!(
            "Gaussian approximation gave EC = {raw:.6}; clamped to 0"
        ));
    } else if (raw - exact).abs() > 0.01 * exact {
        res.warnings.push(format!(
            "Gaussian approximation is {:+.1}% off the exact value {exact:.6}",
            100.0 * (raw / exact - 1.0)
        ));
    }
    Ok(res)
}

pub fn ec_miso_csi(cfg: &LinkConfig, alpha: QosExponent) -> Result<EcResult> {
    ec_miso_csi_with(cfg, alpha, KappaMode::default())
}

pub fn ec_miso_csi_with(cfg: &LinkConfig, alpha: QosExponent, mode: KappaMode) -> Result<EcResult> {
    ec_miso_csi_opts(cfg, alpha, mode, MisoCsiMethod::Gaussian)
}

pub fn ec_miso_csi_opts(
    cfg: &LinkConfig,
    alpha: QosExponent,
    mode: KappaMode,
    method: MisoCsiMethod,
) -> Result<EcResult> {
    let SnrDistribution::Exponential { kappa } = miso_snr_dist(cfg, mode)? else {
        unreachable!("MISO law is exponential")
    };
    ec_exponential_csi_with(kappa, alpha, cfg.bandwidth, cfg.slot, method)
}

// ---------------------------------------------------------------- no CSI

/// No-CSI EC for any SNR law: the fixed-rate ON-OFF channel.
pub fn ec_nocsi_dist(
    dist: &SnrDistribution,
    scenario: Scenario,
    alpha: QosExponent,
    rate: f64,
    bandwidth: f64,
    slot: f64,
) -> Result<EcResult> {
    let (p0, p1) = on_off_probs(dist, rate, bandwidth)?;
    let chain = OnOffChannel::new(p0, p1, rate, slot)?;
    let ec = ec_on_off(&chain, alpha);
    let mut res = EcResult::new(scenario, ec);
    res.diag("p0", p0);
    res.diag("rate", rate);
    res.diag("ln_mgf", chain.ln_mgf(alpha));
    let thr = (rate / bandwidth * LN_2).exp_m1();
    match *dist {
        SnrDistribution::ScaledNoncentralChiSq { beta, lambda } => {
            res.diag("beta", beta);
            res.diag("lambda", lambda);
            res.diag("xi", (thr / beta).sqrt());
        }
        SnrDistribution::Exponential { kappa } => {
            res.diag("kappa", kappa);
            res.diag("snr_threshold", thr);
        }
    }
    Ok(res)
}

pub fn ec_siso_nocsi(cfg: &LinkConfig, alpha: QosExponent, rate: f64) -> Result<EcResult> {
    let dist = siso_snr_dist(cfg)?;
    ec_nocsi_dist(
        &dist,
        Scenario::SisoNoCsi,
        alpha,
        rate,
        cfg.bandwidth,
        cfg.slot,
    )
}

pub fn ec_miso_nocsi(cfg: &LinkConfig, alpha: QosExponent, rate: f64) -> Result<EcResult> {
    ec_miso_nocsi_with(cfg, alpha, rate, KappaMode::default())
}

pub fn ec_miso_nocsi_with(
    cfg: &LinkConfig,
    alpha: QosExponent,
    rate: f64,
    mode: KappaMode,
) -> Result<EcResult> {
    let dist = miso_snr_dist(cfg, mode)?;
    ec_nocsi_dist(
        &dist,
        Scenario::MisoNoCsi,
        alpha,
        rate,
        cfg.bandwidth,
        cfg.slot,
    )
}

/// Dispatches on `scenario`; `rate` is required exactly for no-CSI scenarios.
pub fn evaluate(
    scenario: Scenario,
    cfg: &LinkConfig,
    alpha: QosExponent,
    rate: Option<f64>,
    opts: &EcOptions,
) -> Result<EcResult> {
    check_scenario(scenario, cfg, rate)?;
    match scenario {
        Scenario::SisoCsi => ec_siso_csi_with(cfg, alpha, opts.siso_csi),
        Scenario::MisoCsi => ec_miso_csi_opts(cfg, alpha, opts.kappa, opts.miso_csi),
        Scenario::SisoNoCsi => ec_siso_nocsi(cfg, alpha, rate.unwrap_or_default()),
        Scenario::MisoNoCsi => ec_miso_nocsi_with(cfg, alpha, rate.unwrap_or_default(), opts.kappa),
    }
}

/// Ergodic mean service in bits/slot, the `α → 0` limit of every branch:
/// `T·E[B log₂(1+γ)]` with CSI, `p0·r·T` without.
pub fn mean_service(
    scenario: Scenario,
    cfg: &LinkConfig,
    rate: Option<f64>,
    opts: &EcOptions,
) -> Result<f64> {
    check_scenario(scenario, cfg, rate)?;
    let scale = cfg.bandwidth * cfg.slot / LN_2;
    match scenario {
        Scenario::SisoCsi => {
            let SnrDistribution::ScaledNoncentralChiSq { beta, lambda } = siso_snr_dist(cfg)?
            else {
                unreachable!("SISO law is non-central")
            };
            let a = lambda.sqrt();
            let norm = 1.0 / (2.0 * PI).sqrt();
            let r = quad::integrate(
                |z| norm * (-0.5 * z * z).exp() * (beta * (z + a) * (z + a)).ln_1p(),
                -a - 40.0,
                40.0,
                &[-a, 0.0],
                1e-300,
                1e-13,
                2000,
            )?;
            Ok(scale * r.value)
        }
        Scenario::MisoCsi => {
            let SnrDistribution::Exponential { kappa } = miso_snr_dist(cfg, opts.kappa)? else {
                unreachable!("MISO law is exponential")
            };
            Ok(scale * expint_e1_scaled(kappa)?)
        }
        Scenario::SisoNoCsi | Scenario::MisoNoCsi => {
            let r = rate.unwrap_or_default();
            let (p0, _) =
                on_off_probs(&snr_dist_for(scenario, cfg, opts.kappa)?, r, cfg.bandwidth)?;
            Ok(p0 * r * cfg.slot)
        }
    }
}

fn snr_dist_for(scenario: Scenario, cfg: &LinkConfig, kappa: KappaMode) -> Result<SnrDistribution> {
    if scenario.is_siso() {
        siso_snr_dist(cfg)
    } else {
        miso_snr_dist(cfg, kappa)
    }
}

/// Verifies that `rate` is present iff the scenario needs it, and that the
/// antenna count matches.
pub fn check_scenario(scenario: Scenario, cfg: &LinkConfig, rate: Option<f64>) -> Result<()> {
    match (scenario.needs_rate(), rate) {
        (true, None) => {
            return Err(Error::Config(format!("{scenario} requires a rate")));
        }
        (false, Some(_)) => {
            return Err(Error::Config(format!(
                "{scenario} transmits at capacity; no rate allowed"
            )));
        }
        _ => {}
    }
    if scenario.is_siso() && cfg.n_tx != 1 {
        return Err(Error::Config(format!(
            "{scenario} requires n_tx = 1, got {}",
            cfg.n_tx
        )));
    }
    Ok(())
}
