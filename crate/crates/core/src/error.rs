use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid topology: {0}")]
    Topology(String),

    #[error("invalid flow {flow}: {message}")]
    Flow { flow: usize, message: String },

    #[error("invalid cost function: {0}")]
    Cost(String),

    #[error("invalid action {action}: {message}")]
    Action { action: usize, message: String },

    #[error("policy `{policy}` returned action index {index}, but the action space has {len} actions")]
    PolicyAction {
        policy: String,
        index: usize,
        len: usize,
    },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("state budget exceeded: {states} states > budget {budget}")]
    Budget { states: u128, budget: u128 },

    #[error("invalid simulation parameters: {0}")]
    Simulation(String),

    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),

    #[error("i/o error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error on {}: {source}", path.display())]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Short machine-readable tag used in CLI error records.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Topology(_) => "topology",
            Error::Flow { .. } => "flow",
            Error::Cost(_) => "cost",
            Error::Action { .. } => "action",
            Error::PolicyAction { .. } => "policy_action",
            Error::Dimension { .. } => "dimension",
            Error::Infeasible(_) => "infeasible",
            Error::Unsupported(_) => "unsupported",
            Error::Budget { .. } => "budget",
            Error::Simulation(_) => "simulation",
            Error::Config { .. } => "config",
            Error::UnknownScenario(_) => "unknown_scenario",
            Error::Io { .. } => "io",
            Error::Csv { .. } => "csv",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
