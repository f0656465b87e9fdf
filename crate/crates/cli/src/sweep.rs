//! Parameter sweeps over one link variable and a list of QoS exponents.

use std::fmt;
use std::str::FromStr;

use irs_ec::channel::{LinkConfig, SampleBatch};
use irs_ec::eccore::{EcOptions, QosExponent, Scenario};
use irs_ec::mcoracle::{auto_block_length, empirical_ec};
use irs_ec::registry::{EcScenario, OptimizerRegistry, RateOptimizer, ScenarioRegistry};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepVar {
    /// Transmit power in watts.
    Pt,
    N,
    Nt,
    Alpha,
    /// Fixed transmission rate (no-CSI only); skips rate optimization.
    Rate,
}

impl SweepVar {
    pub const ALL: [SweepVar; 5] = [
        SweepVar::Pt,
        SweepVar::N,
        SweepVar::Nt,
        SweepVar::Alpha,
        SweepVar::Rate,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SweepVar::Pt => "p_t",
            SweepVar::N => "N",
            SweepVar::Nt => "N_t",
            SweepVar::Alpha => "alpha",
            SweepVar::Rate => "rate",
        }
    }
}

impl fmt::Display for SweepVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepVar {
    type Err = CliError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "p_t" | "pt" => Ok(SweepVar::Pt),
            "N" | "n" | "n_elems" => Ok(SweepVar::N),
            "N_t" | "nt" | "n_tx" => Ok(SweepVar::Nt),
            "alpha" => Ok(SweepVar::Alpha),
            "rate" => Ok(SweepVar::Rate),
            _ => Err(CliError::Usage(format!(
                "unknown sweep variable `{s}` (expected p_t, N, N_t, alpha or rate)"
            ))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub scenario: Scenario,
    pub sweep_var: SweepVar,
    /// Strictly increasing.
    pub values: Vec<f64>,
    pub fixed: LinkConfig,
    /// Ignored for alpha sweeps, where each value is the exponent.
    pub alphas: Vec<f64>,
    pub seed: u64,
    /// Monte Carlo slots per row; 0 disables the oracle columns.
    pub mc_slots: usize,
    pub options: EcOptions,
    /// Rate optimizer name; `None` picks the scenario default.
    pub optimizer: Option<String>,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(CliError::Spec("no sweep values".into()));
        }
        if self.values.iter().any(|v| !v.is_finite()) {
            return Err(CliError::Spec("sweep values must be finite".into()));
        }
        if self.values.windows(2).any(|w| w[1] <= w[0]) {
            return Err(CliError::Spec(
                "sweep values must be strictly increasing".into(),
            ));
        }
        if self.sweep_var != SweepVar::Alpha && self.alphas.is_empty() {
            return Err(CliError::Spec("at least one α is required".into()));
        }
        match self.sweep_var {
            SweepVar::Nt if self.scenario.is_siso() => {
                return Err(CliError::Spec(format!(
                    "{} sweeps need a MISO scenario",
                    self.sweep_var
                )));
            }
            SweepVar::Rate if !self.scenario.needs_rate() => {
                return Err(CliError::Spec(format!(
                    "rate sweeps need a no-CSI scenario, not {}",
                    self.scenario
                )));
            }
            SweepVar::N | SweepVar::Nt => {
                if let Some(v) = self.values.iter().find(|v| **v < 1.0 || v.fract() != 0.0) {
                    return Err(CliError::Spec(format!(
                        "{} values must be positive integers, got {v}",
                        self.sweep_var
                    )));
                }
            }
            _ => {}
        }
        self.fixed.validate()?;
        Ok(())
    }

    /// `(value, α)` pairs in output order: value-major.
    pub fn points(&self) -> Vec<(f64, f64)> {
        let mut out = Vec::new();
        for &v in &self.values {
            if self.sweep_var == SweepVar::Alpha {
                out.push((v, v));
            } else {
                out.extend(self.alphas.iter().map(|&a| (v, a)));
            }
        }
        out
    }

    /// The fixed configuration with the swept variable set to `value`.
    pub fn config_at(&self, value: f64) -> LinkConfig {
        let mut cfg = self.fixed.clone();
        match self.sweep_var {
            SweepVar::Pt => cfg.p_t = value,
            SweepVar::N => cfg.n_elems = value as usize,
            SweepVar::Nt => cfg.n_tx = value as usize,
            SweepVar::Alpha | SweepVar::Rate => {}
        }
        cfg
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub value: f64,
    pub alpha: f64,
    pub ec_analytical: Option<f64>,
    pub ec_oracle: Option<f64>,
    pub oracle_stderr: Option<f64>,
    pub r_star: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub scenario: Scenario,
    pub sweep_var: SweepVar,
    pub rows: Vec<Row>,
}

pub fn run_sweep(spec: &SweepSpec) -> Result<Table> {
    run_sweep_with(
        spec,
        &ScenarioRegistry::builtin(),
        &OptimizerRegistry::builtin(),
    )
}

/// Runs the sweep with the given strategy registries. Failures inside a row
/// land in its `error` column; only an invalid spec fails the whole run.
pub fn run_sweep_with(
    spec: &SweepSpec,
    scenarios: &ScenarioRegistry,
    optimizers: &OptimizerRegistry,
) -> Result<Table> {
    spec.validate()?;
    let scen = scenarios.get(spec.scenario.name())?;
    let optimizer = if spec.scenario.needs_rate() && spec.sweep_var != SweepVar::Rate {
        let name = spec
            .optimizer
            .as_deref()
            .unwrap_or(OptimizerRegistry::default_for(spec.scenario));
        let opt = optimizers.get(name)?;
        if !opt.supports(spec.scenario) {
            return Err(CliError::Spec(format!(
                "optimizer `{name}` does not handle {}",
                spec.scenario
            )));
        }
        Some(opt)
    } else {
        None
    };

    // SNR draws depend only on the configuration, so rows sharing it reuse
    // one batch (common random numbers across α and rate).
    let mut cache: Option<(LinkConfig, SampleBatch)> = None;
    let rows = spec
        .points()
        .into_iter()
        .map(|(value, alpha)| {
            let mut row = Row {
                value,
                alpha,
                ec_analytical: None,
                ec_oracle: None,
                oracle_stderr: None,
                r_star: None,
                error: None,
            };
            if let Err(e) = fill_row(spec, scen, optimizer, &mut row, &mut cache) {
                row.error = Some(e.to_string());
            }
            row
        })
        .collect();
    Ok(Table {
        scenario: spec.scenario,
        sweep_var: spec.sweep_var,
        rows,
    })
}

fn fill_row(
    spec: &SweepSpec,
    scen: &dyn EcScenario,
    optimizer: Option<&dyn RateOptimizer>,
    row: &mut Row,
    cache: &mut Option<(LinkConfig, SampleBatch)>,
) -> Result<()> {
    let cfg = spec.config_at(row.value);
    cfg.validate()?;
    let alpha = QosExponent::new(row.alpha)?;
    let rate = match (scen.needs_rate(), optimizer) {
        (false, _) => None,
        (true, None) => Some(row.value),
        (true, Some(opt)) => {
            let sol = opt.optimize_link(&cfg, alpha, spec.scenario, &spec.options)?;
            row.r_star = Some(sol.r_star);
            Some(sol.r_star)
        }
    };
    row.ec_analytical = Some(
        scen.evaluate(&cfg, alpha, rate, &spec.options)?
            .ec_bits_per_slot,
    );

    if spec.mc_slots > 0 {
        let snr = match cache {
            Some((c, batch)) if *c == cfg => batch,
            _ => {
                let batch = scen.sample_snr(&cfg, spec.seed, spec.mc_slots)?;
                &mut cache.insert((cfg.clone(), batch)).1
            }
        };
        let service = scen.service(snr, &cfg, rate)?;
        let est = empirical_ec(&service, alpha, auto_block_length(&service, alpha))?;
        row.ec_oracle = Some(est.value);
        row.oracle_stderr = Some(est.stderr);
    }
    Ok(())
}
