use std::path::PathBuf;

use thiserror::Error;

use crate::model::{AgentId, ArmId};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("network must contain at least one agent")]
    NoAgents,

    #[error("edge {{{agent}, {agent}}} is a self-loop")]
    SelfLoop { agent: AgentId },

    #[error("agent {number} out of range 1..={num_agents}")]
    AgentOutOfRange { number: usize, num_agents: usize },

    #[error("arm {number} out of range 1..={num_arms}")]
    ArmOutOfRange { number: usize, num_arms: usize },

    #[error("sociability of agent {agent} is {value}, expected a value in [0, 1]")]
    InvalidSociability { agent: AgentId, value: f64 },

    #[error("a bandit instance needs at least 2 arms, found {found}")]
    TooFewArms { found: usize },

    #[error("{what}: expected {expected} entries, found {found}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("mean of arm {arm} is not finite ({value})")]
    NonFiniteMean { arm: ArmId, value: f64 },

    #[error("variance proxy of arm {arm} must be strictly positive and finite, got {value}")]
    InvalidVarianceProxy { arm: ArmId, value: f64 },

    #[error("xi must be strictly greater than 1, got {0}")]
    InvalidXi(f64),

    #[error("constant inflation must be finite and non-negative, got {0}")]
    InvalidInflation(f64),

    #[error("zeta must be strictly greater than 1, got {0}")]
    InvalidZeta(f64),

    #[error("cannot build a {degree}-regular ring lattice on {num_agents} agents")]
    InvalidDegree { num_agents: usize, degree: usize },

    #[error("graph is not {expected}-regular: agent {agent} has degree {found}")]
    NotRegular {
        expected: usize,
        agent: AgentId,
        found: usize,
    },

    #[error("agent {agent} has no neighbors; the performance measure is undefined")]
    IsolatedAgent { agent: AgentId },

    #[error("gap is zero (optimal arm); no suboptimal-sample bound applies")]
    ZeroGap,

    #[error("gap must be positive and finite, got {0}")]
    InvalidGap(f64),

    #[error("horizon must be at least {min}, got {found}")]
    HorizonTooShort { min: u64, found: u64 },

    #[error("at least {min} Monte Carlo runs required, got {found}")]
    TooFewRuns { min: usize, found: usize },

    #[error("{0}")]
    InvalidArgument(String),

    #[error("agent {agent} never observed arm {arm} at t={t} in any run")]
    NoObservations { agent: AgentId, arm: ArmId, t: u64 },

    #[error("unknown preset `{0}` (expected one of paper-all-to-all, paper-cyclic, paper-case1, paper-case2)")]
    UnknownPreset(String),

    #[error("{origin}: {message}")]
    Parse { origin: String, message: String },

    #[error("invalid scenario field `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// True for errors caused by the user-supplied scenario or arguments
    /// rather than by the runtime environment.
    pub fn is_config_error(&self) -> bool {
        !matches!(self, Error::Io { .. })
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
