use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Broad failure class, used by the command-line front end to pick an exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Parse,
    Design,
    Runtime,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix contains non-finite entries")]
    InvalidMatrix,
    #[error("dimension mismatch in {what}: expected {expected}, got {got}")]
    DimensionMismatch {
        what: String,
        expected: String,
        got: String,
    },
    #[error("matrix is rank deficient ({what}: rank {rank}, need {needed})")]
    RankDeficient {
        what: &'static str,
        rank: usize,
        needed: usize,
    },
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),
    #[error("operation requires a square system (outputs {outputs} != inputs {inputs})")]
    NonSquare { outputs: usize, inputs: usize },
    #[error("horizon M = {horizon} is shorter than the state dimension {states}")]
    HorizonTooShort { horizon: usize, states: usize },
    #[error("(A, C) is not observable: observability rank {rank} < {states}")]
    ObservabilityViolated { rank: usize, states: usize },
    #[error("assumption violated: {0}")]
    AssumptionViolated(String),
    #[error("improper transfer function: {0}")]
    ImproperTransferFunction(String),
    #[error("system has a transmission zero at z = 1; no rotation can make the filter pair observable")]
    ZeroAtOne,
    #[error("no admissible rotation found after {attempts} attempts (best PBH margin {best_margin:.3e})")]
    RetriesExhausted { attempts: usize, best_margin: f64 },
    #[error("invalid rotation strategy: {0}")]
    InvalidRotation(String),
    #[error("pair is not observable (PBH margin {margin:.3e})")]
    Unobservable { margin: f64 },
    #[error("bad pole set: {0}")]
    BadPoleSet(String),
    #[error("pole placement failed: {0}")]
    PlacementFailed(String),
    #[error("minimum-phase filter not applicable: {0}")]
    MinPhaseScope(String),
    #[error("rotation matrix is not orthogonal (max deviation {0:.3e})")]
    NonOrthogonal(f64),
    #[error("eigenvalue iteration did not converge")]
    EigenFailure,
    #[error("sample window not ready")]
    WindowNotReady,
    #[error("filter state diverged (norm {0:.3e})")]
    Diverged(f64),
    #[error("missing known input sample")]
    MissingInput,
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid configuration at `{path}`: {message}")]
    Semantic { path: String, message: String },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn dims(what: impl Into<String>, expected: impl ToString, got: impl ToString) -> Self {
        Error::DimensionMismatch {
            what: what.into(),
            expected: expected.to_string(),
            got: got.to_string(),
        }
    }

    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Parse { .. } | Error::Semantic { .. } => ErrorClass::Parse,
            Error::WindowNotReady
            | Error::Diverged(_)
            | Error::MissingInput
            | Error::Io(_)
            | Error::Csv(_) => ErrorClass::Runtime,
            _ => ErrorClass::Design,
        }
    }
}
