use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("the zero expression has no gamma degree")]
    ZeroExpression,

    #[error("coefficient of order {order} lies above the truncation order {trunc}")]
    OutOfWindow { order: i32, trunc: i32 },

    #[error("series window is empty")]
    EmptyWindow,

    #[error("exp needs a series with no polar part and zero constant term (min order {min_order})")]
    ExpDomain { min_order: i32 },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("{form} is singular at the evaluation point")]
    SingularPoint { form: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("cannot transfer a ddbar piece by integration by parts: {0}")]
    StokesTransfer(String),

    #[error(
        "quadrature did not converge: estimate {estimate:.3e} above tolerance at level {level} (value {value:.12e})"
    )]
    NonConvergence { level: usize, value: f64, estimate: f64 },

    #[error("ill-conditioned least-squares fit: condition number {condition:.3e} exceeds {limit:.3e}")]
    IllConditioned { condition: f64, limit: f64 },

    #[error("term {term}: {source}")]
    Term {
        term: String,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
