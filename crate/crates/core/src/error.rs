use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error(
        "quadrature did not reach tolerance after {subdivisions} subdivisions \
         (value {value:.12e}, estimated error {error_estimate:.3e})"
    )]
    Quadrature {
        value: f64,
        error_estimate: f64,
        subdivisions: usize,
    },

    #[error("no sign change on [{lo}, {hi}]: f(lo) = {f_lo:e}, f(hi) = {f_hi:e}")]
    Bracket {
        lo: f64,
        hi: f64,
        f_lo: f64,
        f_hi: f64,
    },

    #[error("bisection did not converge after {iterations} iterations (bracket width {width:e})")]
    NoConvergence { iterations: usize, width: f64 },

    #[error("bracket expansion reached the cap {cap} without a sign change")]
    BracketCap { cap: f64 },

    #[error("channel matrix is rank deficient")]
    RankDeficient,

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// True for failures of an iterative solver, as opposed to bad input.
    pub fn is_convergence_failure(&self) -> bool {
        matches!(
            self,
            Error::Quadrature { .. }
                | Error::Bracket { .. }
                | Error::NoConvergence { .. }
                | Error::BracketCap { .. }
        )
    }
}
