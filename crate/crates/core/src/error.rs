use thiserror::Error;

/// Errors produced by the coverage-game toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid game: {0}")]
    InvalidGame(String),

    #[error("invalid profile: expected {expected} choices, got {got}")]
    ProfileLength { expected: usize, got: usize },

    #[error(
        "invalid profile: agent {agent} chose resource {resource}, which is not in its action set"
    )]
    ChoiceOutsideActionSet { agent: usize, resource: usize },

    #[error("agent index {0} out of range")]
    NoSuchAgent(usize),

    #[error("agent {0} is not compromised")]
    NotCompromised(usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error(
        "instance too large: {profiles} joint profiles exceed the enumeration budget of {budget}"
    )]
    TooLarge { profiles: u128, budget: u64 },

    #[error("optimal welfare is zero; equilibrium ratios are undefined")]
    ZeroWelfare,

    #[error("linear program failed: {0}")]
    Solver(String),

    #[error("failed to parse game file: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True for errors caused by malformed input rather than size or I/O.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidGame(_)
                | Error::ProfileLength { .. }
                | Error::ChoiceOutsideActionSet { .. }
                | Error::NoSuchAgent(_)
                | Error::NotCompromised(_)
                | Error::InvalidParameter(_)
                | Error::ZeroWelfare
                | Error::Parse(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
