use thiserror::Error;

/// Errors produced by state construction, detection, criteria and scenarios.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("mode index {index} out of range for a {modes}-mode state")]
    ModeIndex { index: usize, modes: usize },

    #[error("duplicate mode label `{0}`")]
    LabelCollision(String),

    #[error("unknown mode or signal `{0}`")]
    UnknownName(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("balance phase undefined: mode {0} carries no carrier")]
    DegenerateBalance(usize),

    #[error("mode {mode} too dark for linearized direct detection (power {power:e}, threshold {threshold:e})")]
    LinearizationInvalid { mode: usize, power: f64, threshold: f64 },

    #[error("mode {0} has already been detected")]
    AlreadyConsumed(usize),

    #[error("mode {0} is tapped by more than one signal")]
    OverlappingTaps(usize),

    #[error("unphysical covariance: smallest symplectic eigenvalue {0:e}")]
    Unphysical(f64),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("empty selection")]
    EmptySelection,

    #[error("{modes} modes exceed the enumeration limit of {limit}")]
    TooManyModes { modes: usize, limit: usize },

    #[error("unknown preset `{0}`")]
    UnknownPreset(String),

    #[error("configuration error: {0}")]
    Config(String),
}

impl Error {
    /// True for failures that mean the requested state is not a valid quantum state
    /// or cannot be detected as modelled, as opposed to a malformed request.
    pub fn is_physicality(&self) -> bool {
        matches!(
            self,
            Error::Unphysical(_)
                | Error::Numerical(_)
                | Error::LinearizationInvalid { .. }
                | Error::DegenerateBalance(_)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
