use thiserror::Error;

/// Errors produced by the potential models, the eigensolver and the checks
/// built on top of them.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument is outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A request that violates an operation's precondition.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// The effective potential is not finite at a grid node.
    #[error("non-finite effective potential {value} at node {index} (r = {r})")]
    Overflow { index: usize, r: f64, value: f64 },

    /// An eigenpair could not be resolved. `index` is the 1-based level.
    #[error("eigenvalue {index} did not converge: {reason}")]
    Convergence { index: usize, reason: String },

    #[error("inconsistent grid ladder: {0}")]
    InconsistentLadder(String),

    #[error("finite-difference step {delta} exceeds beta/10 = {limit}")]
    StepTooLarge { delta: f64, limit: f64 },

    #[error("scaled eigenvalue {0:e} is too close to zero for a relative comparison")]
    DivisionGuard(f64),

    /// A solver failure annotated with the scan parameter that triggered it.
    #[error("at beta = {beta}: {source}")]
    AtBeta {
        beta: f64,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
