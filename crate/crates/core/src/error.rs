use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("argument {name} = {value} out of domain: {constraint}")]
    Domain {
        name: &'static str,
        value: f64,
        constraint: &'static str,
    },
    #[error("quadrature did not converge: estimate {estimate:e}, requested {requested:e}")]
    Quadrature { estimate: f64, requested: f64 },
    #[error("grid invalid: {0}")]
    Grid(String),
    #[error("precondition violated: {what} measured {measured:e}")]
    Precondition { what: &'static str, measured: f64 },
    #[error("singular tridiagonal system at row {row}")]
    Singular { row: usize },
    #[error("time step rejected: {0}")]
    StepRejected(String),
    #[error("fixed-point iteration diverged, distance history {history:?}")]
    Divergence { history: Vec<f64> },
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check(cond: bool, name: &'static str, value: f64, constraint: &'static str) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::Domain { name, value, constraint })
    }
}
