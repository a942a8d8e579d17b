use thiserror::Error;

/// Errors reported by the numerical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("degenerate raster: {0}")]
    DegenerateRaster(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The functional is unbounded below for this Robin parameter.
    #[error("beta = {beta} gives an unbounded problem (inf J = -infinity for beta < -1)")]
    Unbounded { beta: f64 },

    #[error("no sign change of the boundary mismatch found for lambda in [{lo}, {hi}]")]
    BracketNotFound { lo: f64, hi: f64 },

    #[error("radial integration failed at r = {r}: {reason}")]
    StepFailure { r: f64, reason: String },

    #[error("discrete coercivity check failed: 1 + beta * c1_h = {margin} (grid too coarse for beta = {beta})")]
    CoercivityFailure { beta: f64, margin: f64 },

    #[error("the zero field has no Rayleigh quotient")]
    ZeroField,

    #[error("empty set")]
    EmptySet,

    #[error("layer width {eps} is below two cells (h = {h})")]
    LayerUnresolved { eps: f64, h: f64 },

    #[error("{what} did not converge within {iterations} iterations")]
    NotConverged {
        what: &'static str,
        iterations: usize,
    },

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
