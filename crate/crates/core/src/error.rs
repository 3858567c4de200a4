use thiserror::Error;

/// Input errors for environment, game and mechanism files.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("malformed JSON: {0}")]
    Json(String),
    #[error("invalid rational {0:?}")]
    InvalidRational(String),
    #[error("duplicate {kind} id {id:?}")]
    DuplicateId { kind: &'static str, id: String },
    #[error("unknown {kind} id {id:?}")]
    UnknownId { kind: &'static str, id: String },
    #[error("missing utility for agent {agent:?}, state {state:?}, outcome {outcome:?}")]
    MissingUtility {
        agent: String,
        state: String,
        outcome: String,
    },
    #[error("scf has no entry for state {0:?}")]
    MissingScf(String),
    #[error("{0}")]
    Invalid(String),
    #[error("strict validation failed: {0}")]
    Strict(String),
}

/// Errors from the linear-feasibility engine.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LpError {
    #[error("empty outcome list")]
    EmptyDomain,
    #[error("constraint has {got} coefficients, expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },
}

/// Errors raised by axiom checkers before any obligation is evaluated.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AxiomError {
    #[error("event enumeration needs |states| <= {cap}, got {got}")]
    EventCap { cap: usize, got: usize },
    #[error("unknown axiom id {0:?}")]
    UnknownAxiom(String),
}
