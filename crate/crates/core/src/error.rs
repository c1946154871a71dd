use thiserror::Error;

/// Failure modes shared by every stage of the toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("Mittag-Leffler evaluation did not converge: {0}")]
    NonConvergence(String),

    #[error("asymptotic series stops decreasing after {optimal} terms, {requested} requested")]
    AsymptoticDivergence { requested: usize, optimal: usize },

    #[error("grid too coarse: {nodes} quadrature nodes cannot resolve {modes} modes")]
    GridTooCoarse { nodes: usize, modes: usize },

    #[error("no moment above tolerance up to index {max_index}")]
    IndexSearchExhausted { max_index: usize },

    #[error("quadrature did not converge: last relative change {change:e}")]
    QuadratureNotConverged { change: f64 },

    #[error("ill-conditioned {context}: condition number {condition:e}")]
    IllConditioned { condition: f64, context: String },

    #[error("exponent collision between {first} and {second} (gap {gap:e})")]
    ExponentCollision {
        first: String,
        second: String,
        gap: f64,
    },

    #[error(
        "alpha = {alpha} is excluded for moment index {ell} (nearest excluded value {nearest})"
    )]
    InadmissibleAlpha {
        alpha: f64,
        ell: usize,
        nearest: f64,
    },

    #[error("degenerate observation point: f(x0) = {value:e}")]
    DegeneratePoint { value: f64 },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    /// `true` for failures caused by floating point limits rather than by
    /// the problem data. Excluded orders and degenerate points count as bad
    /// input.
    pub fn is_numerical(&self) -> bool {
        !matches!(
            self,
            Error::InvalidInput(_)
                | Error::InadmissibleAlpha { .. }
                | Error::ExponentCollision { .. }
                | Error::DegeneratePoint { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
