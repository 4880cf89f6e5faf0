use thiserror::Error;

/// Errors surfaced by the synthesis and verification pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("machine is invalid: {0:?}")]
    InvalidMachine(Vec<crate::machine::Violation>),

    #[error("alphabet mismatch between plant and specification machines")]
    AlphabetMismatch,

    #[error("wrong condition variant: expected {expected}, found {found}")]
    ConditionVariant {
        expected: &'static str,
        found: &'static str,
    },

    #[error("invalid lasso: {0}")]
    InvalidLasso(String),

    #[error("size guard exceeded for {what}: limit {limit}, actual {actual}")]
    SizeGuard {
        what: &'static str,
        limit: usize,
        actual: usize,
    },

    #[error("malformed parity game: {0}")]
    MalformedGame(String),

    #[error("strategy lookup failed: {0}")]
    StrategyUndefined(String),

    #[error("malformed supervisor: {0}")]
    MalformedSupervisor(String),

    #[error("ambiguous strategy where a non-ambiguous one was required: {0}")]
    AmbiguousStrategy(String),

    #[error("no supervisor exists")]
    Unrealizable,

    #[error("internal soundness failure: synthesized supervisor rejected by verifier: {0}")]
    InternalSoundness(String),

    #[error("invalid path: {0}")]
    InvalidPath(String),
}

pub type Result<T> = std::result::Result<T, Error>;
