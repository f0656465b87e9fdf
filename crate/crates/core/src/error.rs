use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error in {func}: {detail}")]
    Domain { func: &'static str, detail: String },

    #[error("{func} did not converge within {terms} terms")]
    Convergence { func: &'static str, terms: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("gradient is singular at rate {rate}")]
    Singularity { rate: f64 },

    #[error("rate search did not converge after {iterations} iterations (last iterate {last})")]
    NonConvergence { iterations: usize, last: f64 },

    #[error("could not bracket a root: {0}")]
    Bracket(String),

    #[error("unknown {kind} `{name}`")]
    Unknown { kind: &'static str, name: String },
}

impl Error {
    pub(crate) fn domain(func: &'static str, detail: impl Into<String>) -> Self {
        Error::Domain {
            func,
            detail: detail.into(),
        }
    }

    /// Short stable identifier used in machine-readable error output.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain { .. } => "domain",
            Error::Convergence { .. } => "convergence",
            Error::Config(_) => "config",
            Error::Singularity { .. } => "singularity",
            Error::NonConvergence { .. } => "non_convergence",
            Error::Bracket(_) => "bracket",
            Error::Unknown { .. } => "unknown",
        }
    }
}
