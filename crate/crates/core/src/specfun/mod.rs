//! Special functions needed by the effective-capacity closed forms.
//!
//! Everything here is a pure function of its arguments. Series evaluations
//! take a [`SeriesControl`] so callers can trade accuracy for work; the
//! defaults are generous enough that a convergence failure usually means the
//! caller is in a regime that needs a different branch.

mod expint;
mod gamma;
mod hypergeometric;
mod normal;
pub mod quad;

pub use expint::{expint_e1_scaled, expint_order_derivative_scaled};
pub use gamma::{ln_gamma, ln_gamma_abs};
pub use hypergeometric::{hyp0f1, hyp3f3_unit, ln_hyp1f1, HYP1F1_ASYMPTOTIC_THRESHOLD};
pub use normal::{
    bessel_i_minus_half, gaussian_tail, ln_bessel_i_minus_half, marcum_q_half,
    marcum_q_half_complement, marcum_q_half_db,
};

use crate::error::{Error, Result};

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Truncation control for infinite series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesControl {
    max_terms: usize,
    rel_tol: f64,
}

impl SeriesControl {
    pub fn new(max_terms: usize, rel_tol: f64) -> Result<Self> {
        if max_terms == 0 {
            return Err(Error::Config("series max_terms must be at least 1".into()));
        }
        if !(rel_tol > 0.0 && rel_tol < 1.0) {
            return Err(Error::Config(format!(
                "series rel_tol must lie in (0, 1), got {rel_tol}"
            )));
        }
        Ok(Self { max_terms, rel_tol })
    }

    pub fn max_terms(&self) -> usize {
        self.max_terms
    }

    pub fn rel_tol(&self) -> f64 {
        self.rel_tol
    }
}

impl Default for SeriesControl {
    fn default() -> Self {
        Self {
            max_terms: 10_000,
            rel_tol: 1e-12,
        }
    }
}

/// Kahan–Babuška compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub(crate) fn new(init: f64) -> Self {
        Self {
            sum: init,
            comp: 0.0,
        }
    }

    pub(crate) fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn value(&self) -> f64 {
        self.sum + self.comp
    }

    pub(crate) fn scale(&mut self, factor: f64) {
        self.sum *= factor;
        self.comp *= factor;
    }
}
