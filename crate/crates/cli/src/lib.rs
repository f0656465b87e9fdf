//! Library half of the `irs-ec` command: sweeps, their CSV/SVG output and
//! the oracle validation report.

pub mod error;
pub mod output;
pub mod report;
pub mod sweep;

pub use error::{CliError, Result};
