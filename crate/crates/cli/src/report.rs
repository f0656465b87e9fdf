//! Self-check of the analytic evaluators against the Monte Carlo oracle.

use std::fmt;

use irs_ec::channel::{siso_snr_dist, LinkConfig, SnrDistribution};
use irs_ec::eccore::{EcOptions, QosExponent, Scenario, SisoCsiMethod};
use irs_ec::mcoracle::{auto_block_length, empirical_ec, ks_distance};
use irs_ec::registry::{EcScenario, OptimizerRegistry, ScenarioRegistry};

use crate::error::Result;

pub const DEFAULT_SLOTS: usize = 200_000;
pub const KS_TOL: f64 = 0.01;
pub const REL_TOL: f64 = 0.03;
pub const STDERR_MULT: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub status: Status,
    pub detail: String,
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.status {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
        };
        write!(f, "{tag} {}: {}", self.name, self.detail)
    }
}

#[derive(Debug, Clone, Default)]
pub struct Report {
    pub checks: Vec<Check>,
}

impl Report {
    fn push(&mut self, name: impl Into<String>, ok: bool, detail: String) {
        self.checks.push(Check {
            name: name.into(),
            status: if ok { Status::Pass } else { Status::Fail },
            detail,
        });
    }

    pub fn failures(&self) -> usize {
        self.checks
            .iter()
            .filter(|c| c.status == Status::Fail)
            .count()
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(f, "{c}")?;
        }
        write!(
            f,
            "{} checks, {} failed",
            self.checks.len(),
            self.failures()
        )
    }
}

#[derive(Debug, Clone)]
pub struct ValidateSpec {
    /// Empty means all four.
    pub scenarios: Vec<Scenario>,
    /// Reference link; `n_tx` is forced to 1 for SISO scenarios.
    pub base: LinkConfig,
    pub slots: usize,
    pub seed: u64,
    pub options: EcOptions,
}

impl Default for ValidateSpec {
    fn default() -> Self {
        Self {
            scenarios: Vec::new(),
            base: LinkConfig::default(),
            slots: DEFAULT_SLOTS,
            seed: 42,
            options: EcOptions::default(),
        }
    }
}

/// Analytic EC plus the oracle estimate and its standard error.
fn compare(
    scen: &dyn EcScenario,
    cfg: &LinkConfig,
    alpha: QosExponent,
    rate: Option<f64>,
    opts: &EcOptions,
    snr: &irs_ec::channel::SampleBatch,
) -> Result<(f64, f64, f64)> {
    let analytic = scen.evaluate(cfg, alpha, rate, opts)?.ec_bits_per_slot;
    let service = scen.service(snr, cfg, rate)?;
    let est = empirical_ec(&service, alpha, auto_block_length(&service, alpha))?;
    Ok((analytic, est.value, est.stderr))
}

fn series(v: &[f64]) -> String {
    v.iter()
        .map(|x| format!("{x:.4e}"))
        .collect::<Vec<_>>()
        .join(" ")
}

fn within(analytic: f64, oracle: f64, stderr: f64, rel: f64) -> bool {
    (analytic - oracle).abs() <= (rel * oracle.abs()).max(STDERR_MULT * stderr)
}

pub fn run_validate(spec: &ValidateSpec) -> Result<Report> {
    let scenarios = ScenarioRegistry::builtin();
    let optimizers = OptimizerRegistry::builtin();
    let wanted: Vec<Scenario> = if spec.scenarios.is_empty() {
        Scenario::ALL.to_vec()
    } else {
        spec.scenarios.clone()
    };
    let mut report = Report::default();
    let config_for = |sc: Scenario, n: usize| {
        let mut c = spec.base.clone();
        c.n_elems = n;
        if sc.is_siso() {
            c.n_tx = 1;
        } else if c.n_tx == 1 {
            c.n_tx = LinkConfig::default().n_tx;
        }
        c
    };

    // Distribution fit of the physical SNR samples.
    for siso in [true, false] {
        if !wanted.iter().any(|s| s.is_siso() == siso) {
            continue;
        }
        let sc = if siso {
            Scenario::SisoCsi
        } else {
            Scenario::MisoCsi
        };
        let cfg = config_for(sc, 100);
        let snr = scenarios
            .get(sc.name())?
            .sample_snr(&cfg, spec.seed, spec.slots)?;
        let (label, dist) = if siso {
            ("non-central chi-square", siso_snr_dist(&cfg)?)
        } else {
            (
                "fitted exponential",
                SnrDistribution::exponential(1.0 / snr.mean())?,
            )
        };
        let d = ks_distance(&snr, &dist)?;
        report.push(
            format!("ks {} N=100", if siso { "siso" } else { "miso" }),
            d <= KS_TOL,
            format!("D = {d:.5} vs {label} (tol {KS_TOL})"),
        );
    }

    // Analytic vs oracle on the reference grid.
    for &sc in &wanted {
        let scen = scenarios.get(sc.name())?;
        for n in [16, 100] {
            let cfg = config_for(sc, n);
            let snr = scen.sample_snr(&cfg, spec.seed, spec.slots)?;
            for a in [0.1, 10.0] {
                let alpha = QosExponent::new(a)?;
                let rate = if sc.needs_rate() {
                    let opt = optimizers.get(OptimizerRegistry::default_for(sc))?;
                    Some(opt.optimize_link(&cfg, alpha, sc, &spec.options)?.r_star)
                } else {
                    None
                };
                let (an, or, se) = compare(scen, &cfg, alpha, rate, &spec.options, &snr)?;
                report.push(
                    format!("{sc} N={n} α={a}"),
                    within(an, or, se, REL_TOL),
                    format!("analytic {an:.6} oracle {or:.6} ± {se:.2e}"),
                );
            }
            // The high-SNR SISO forms only make sense at the larger surface.
            if sc == Scenario::SisoCsi && n == 100 {
                let alpha = QosExponent::new(0.1)?;
                for method in [SisoCsiMethod::Relaxed, SisoCsiMethod::Printed] {
                    let opts = EcOptions {
                        siso_csi: method,
                        ..spec.options
                    };
                    let raw = scen.evaluate(&cfg, alpha, None, &opts)?.diagnostics["ec_raw"];
                    let (_, or, se) = compare(scen, &cfg, alpha, None, &spec.options, &snr)?;
                    report.push(
                        format!("{sc} {} N=100 α=0.1", method.name()),
                        within(raw, or, se, 0.05),
                        format!("form {raw:.6} oracle {or:.6} ± {se:.2e} (tol 5%)"),
                    );
                }
            }
        }
    }

    // Monotone trends of the analytic values.
    for &sc in &wanted {
        let scen = scenarios.get(sc.name())?;
        let ec_at = |cfg: &LinkConfig, a: f64| -> Result<f64> {
            let alpha = QosExponent::new(a)?;
            let rate = if sc.needs_rate() {
                let opt = optimizers.get(OptimizerRegistry::default_for(sc))?;
                Some(opt.optimize_link(cfg, alpha, sc, &spec.options)?.r_star)
            } else {
                None
            };
            Ok(scen
                .evaluate(cfg, alpha, rate, &spec.options)?
                .ec_bits_per_slot)
        };
        let cfg = config_for(sc, 100);
        let by_alpha = [0.01, 0.1, 1.0, 10.0]
            .iter()
            .map(|&a| ec_at(&cfg, a))
            .collect::<Result<Vec<_>>>()?;
        report.push(
            format!("{sc} nonincreasing in α"),
            by_alpha.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12)),
            series(&by_alpha),
        );
        let by_n = [16, 32, 64, 100]
            .iter()
            .map(|&n| ec_at(&config_for(sc, n), 1.0))
            .collect::<Result<Vec<_>>>()?;
        report.push(
            format!("{sc} nondecreasing in N"),
            by_n.windows(2).all(|w| w[1] >= w[0] * (1.0 - 1e-12)),
            series(&by_n),
        );
    }
    Ok(report)
}
