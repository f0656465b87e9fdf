//! Named strategies: EC scenarios and rate optimizers behind common
//! traits, looked up at runtime.

use crate::channel::{sample_miso_snr, sample_siso_snr, LinkConfig, SampleBatch};
use crate::eccore::{self, EcOptions, EcResult, QosExponent, Scenario};
use crate::error::{Error, Result};
use crate::mcoracle;
use crate::rateopt::{
    descend, grid_argmax, optimize_rate_miso_closed_form, solve_rate_miso_form, DescentSettings,
    MisoRateForm, NoCsiObjective, RateSolution,
};

/// One link scenario: analytic EC, ergodic mean and a physical simulator.
pub trait EcScenario: Send + Sync {
    fn name(&self) -> &'static str;
    fn scenario(&self) -> Scenario;

    fn needs_rate(&self) -> bool {
        self.scenario().needs_rate()
    }

    fn evaluate(
        &self,
        cfg: &LinkConfig,
        alpha: QosExponent,
        rate: Option<f64>,
        opts: &EcOptions,
    ) -> Result<EcResult>;

    /// bits/slot
    fn mean_service(&self, cfg: &LinkConfig, rate: Option<f64>, opts: &EcOptions) -> Result<f64>;

    /// Per-slot SNR from the physical channel model.
    fn sample_snr(&self, cfg: &LinkConfig, seed: u64, slots: usize) -> Result<SampleBatch>;

    /// Maps an SNR batch to per-slot service bits.
    fn service(
        &self,
        snr: &SampleBatch,
        cfg: &LinkConfig,
        rate: Option<f64>,
    ) -> Result<SampleBatch>;

    fn simulate(
        &self,
        cfg: &LinkConfig,
        rate: Option<f64>,
        seed: u64,
        slots: usize,
    ) -> Result<SampleBatch> {
        self.service(&self.sample_snr(cfg, seed, slots)?, cfg, rate)
    }
}

/// The built-in closed-form evaluators for one of the four scenarios.
#[derive(Debug, Clone, Copy)]
pub struct AnalyticScenario(pub Scenario);

impl EcScenario for AnalyticScenario {
    fn name(&self) -> &'static str {
        self.0.name()
    }

    fn scenario(&self) -> Scenario {
        self.0
    }

    fn evaluate(
        &self,
        cfg: &LinkConfig,
        alpha: QosExponent,
        rate: Option<f64>,
        opts: &EcOptions,
    ) -> Result<EcResult> {
        eccore::evaluate(self.0, cfg, alpha, rate, opts)
    }

    fn mean_service(&self, cfg: &LinkConfig, rate: Option<f64>, opts: &EcOptions) -> Result<f64> {
        eccore::mean_service(self.0, cfg, rate, opts)
    }

    fn sample_snr(&self, cfg: &LinkConfig, seed: u64, slots: usize) -> Result<SampleBatch> {
        eccore::check_scenario(self.0, cfg, self.0.needs_rate().then_some(0.0))?;
        if self.0.is_siso() {
            sample_siso_snr(cfg, seed, slots)
        } else {
            sample_miso_snr(cfg, seed, slots)
        }
    }

    fn service(
        &self,
        snr: &SampleBatch,
        cfg: &LinkConfig,
        rate: Option<f64>,
    ) -> Result<SampleBatch> {
        mcoracle::service_from_snr(snr, cfg, self.0, rate)
    }

    fn simulate(
        &self,
        cfg: &LinkConfig,
        rate: Option<f64>,
        seed: u64,
        slots: usize,
    ) -> Result<SampleBatch> {
        mcoracle::simulate_service(cfg, self.0, rate, seed, slots)
    }
}

/// Chooses a transmission rate for a no-CSI scenario.
pub trait RateOptimizer: Send + Sync {
    fn name(&self) -> &'static str;

    fn supports(&self, scenario: Scenario) -> bool;

    fn optimize(&self, obj: &NoCsiObjective) -> Result<RateSolution>;

    fn optimize_link(
        &self,
        cfg: &LinkConfig,
        alpha: QosExponent,
        scenario: Scenario,
        opts: &EcOptions,
    ) -> Result<RateSolution> {
        if !self.supports(scenario) {
            return Err(Error::Config(format!(
                "rate optimizer `{}` does not handle {scenario}",
                self.name()
            )));
        }
        self.optimize(&NoCsiObjective::from_link(
            cfg, alpha, scenario, opts.kappa,
        )?)
    }
}

/// Fixed-step descent on `ρ(r)`. `None` picks the start and step from a
/// coarse scan of the objective.
#[derive(Debug, Clone, Copy, Default)]
pub struct GradientDescent {
    pub settings: Option<DescentSettings>,
}

impl RateOptimizer for GradientDescent {
    fn name(&self) -> &'static str {
        "gradient_descent"
    }

    fn supports(&self, scenario: Scenario) -> bool {
        scenario.needs_rate()
    }

    fn optimize(&self, obj: &NoCsiObjective) -> Result<RateSolution> {
        let settings = match self.settings {
            Some(s) => s,
            None => DescentSettings::for_objective(obj)?,
        };
        descend(obj, &settings)
    }
}

/// High-SNR closed form of the MISO stationarity condition.
#[derive(Debug, Clone, Copy)]
pub struct ClosedForm(pub MisoRateForm);

impl RateOptimizer for ClosedForm {
    fn name(&self) -> &'static str {
        match self.0 {
            MisoRateForm::Stationary => "closed_form",
            MisoRateForm::Printed => "closed_form_printed",
        }
    }

    fn supports(&self, scenario: Scenario) -> bool {
        scenario == Scenario::MisoNoCsi
    }

    fn optimize(&self, obj: &NoCsiObjective) -> Result<RateSolution> {
        optimize_rate_miso_closed_form(obj, self.0)
    }
}

/// Bracketed root of the MISO stationarity condition.
#[derive(Debug, Clone, Copy)]
pub struct RootFind(pub MisoRateForm);

impl RateOptimizer for RootFind {
    fn name(&self) -> &'static str {
        match self.0 {
            MisoRateForm::Stationary => "root_find",
            MisoRateForm::Printed => "root_find_printed",
        }
    }

    fn supports(&self, scenario: Scenario) -> bool {
        scenario == Scenario::MisoNoCsi
    }

    fn optimize(&self, obj: &NoCsiObjective) -> Result<RateSolution> {
        solve_rate_miso_form(obj, self.0)
    }
}

/// Uniform grid up to the rate where `p0 < 1e-12`, then Brent refinement.
#[derive(Debug, Clone, Copy)]
pub struct Grid {
    pub points: usize,
}

impl Default for Grid {
    fn default() -> Self {
        Self { points: 1000 }
    }
}

impl RateOptimizer for Grid {
    fn name(&self) -> &'static str {
        "grid"
    }

    fn supports(&self, scenario: Scenario) -> bool {
        scenario.needs_rate()
    }

    fn optimize(&self, obj: &NoCsiObjective) -> Result<RateSolution> {
        grid_argmax(obj, obj.rate_upper_bound()?, self.points)
    }
}

/// Name-keyed list of trait objects; registration order is kept.
pub struct Registry<T: ?Sized> {
    kind: &'static str,
    entries: Vec<(String, Box<T>)>,
}

impl<T: ?Sized> Registry<T> {
    pub fn empty(kind: &'static str) -> Self {
        Self {
            kind,
            entries: Vec::new(),
        }
    }

    /// Adds or replaces the entry called `name`.
    pub fn register(&mut self, name: impl Into<String>, item: Box<T>) {
        let name = name.into();
        match self.entries.iter_mut().find(|(n, _)| *n == name) {
            Some(slot) => slot.1 = item,
            None => self.entries.push((name, item)),
        }
    }

    pub fn get(&self, name: &str) -> Result<&T> {
        self.entries
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, item)| item.as_ref())
            .ok_or_else(|| Error::Unknown {
                kind: self.kind,
                name: name.to_string(),
            })
    }

    pub fn names(&self) -> Vec<&str> {
        self.entries.iter().map(|(n, _)| n.as_str()).collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &T)> {
        self.entries
            .iter()
            .map(|(n, item)| (n.as_str(), item.as_ref()))
    }
}

pub type ScenarioRegistry = Registry<dyn EcScenario>;
pub type OptimizerRegistry = Registry<dyn RateOptimizer>;

impl Registry<dyn EcScenario> {
    /// `siso_csi`, `siso_nocsi`, `miso_csi`, `miso_nocsi`.
    pub fn builtin() -> Self {
        let mut r = Self::empty("scenario");
        for s in Scenario::ALL {
            r.register(s.name(), Box::new(AnalyticScenario(s)));
        }
        r
    }
}

impl Registry<dyn RateOptimizer> {
    pub fn builtin() -> Self {
        let mut r = Self::empty("rate optimizer");
        let items: [Box<dyn RateOptimizer>; 6] = [
            Box::new(GradientDescent::default()),
            Box::new(ClosedForm(MisoRateForm::Stationary)),
            Box::new(ClosedForm(MisoRateForm::Printed)),
            Box::new(RootFind(MisoRateForm::Stationary)),
            Box::new(RootFind(MisoRateForm::Printed)),
            Box::new(Grid::default()),
        ];
        for item in items {
            r.register(item.name(), item);
        }
        r
    }

    /// Default optimizer for a scenario: the exact root for MISO, descent
    /// for SISO.
    pub fn default_for(scenario: Scenario) -> &'static str {
        match scenario {
            Scenario::MisoNoCsi => "root_find",
            _ => "gradient_descent",
        }
    }
}
