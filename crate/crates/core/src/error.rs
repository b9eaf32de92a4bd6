use thiserror::Error;

/// Errors raised by the library API.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(
        "step sizes outside the admissible region (tau*sigma*|L|^2 = {product}, bound = {bound}); \
         enable the override flag to run anyway"
    )]
    InvalidParams { product: f64, bound: f64 },

    #[error("non-finite iterate produced at iteration {iteration}")]
    NonFiniteIterate { iteration: usize },

    #[error("non-finite certificate value `{quantity}` at k = {k}")]
    NonFiniteCertificate { quantity: &'static str, k: usize },

    #[error("nonpositive eta denominator {denominator:e}: step condition tau*sigma*|L|^2*(1+theta)^2 <= 4 violated")]
    EtaDenominator { denominator: f64 },

    #[error("KKT oracle rejected: residual {residual:e} exceeds {limit:e}")]
    OracleRejected { residual: f64, limit: f64 },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_dim(context: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            context,
            expected,
            found,
        })
    }
}
