use thiserror::Error;

/// Errors raised by the analysis, synthesis and verification routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("grid size {0} must be a power of two and at least 8")]
    InvalidGrid(usize),

    #[error("functions live on grids of different sizes ({left} vs {right})")]
    GridMismatch { left: usize, right: usize },

    #[error("frequency {index} lies outside the coefficient window of an {size}-point grid")]
    OutOfWindow { index: i64, size: usize },

    #[error("input is not real: max imaginary part {max_imag:e} exceeds {tol:e}")]
    NonRealInput { max_imag: f64, tol: f64 },

    #[error("grid of size {grid} is too coarse for bandwidth {bandwidth} (need grid >= 4 * bandwidth)")]
    GridTooCoarse { grid: usize, bandwidth: usize },

    #[error("modulation factor has modulus {0}, expected 1")]
    NonUnimodularFactor(f64),

    #[error("multilinear oracle too large: order {order}, width {width} (limits: order <= 5, width <= 32)")]
    OracleTooLarge { order: usize, width: usize },

    #[error("degree {degree} exceeds the {available} available phases")]
    DegreeOutOfRange { degree: usize, available: usize },

    #[error("phase {index} = {value} is not strictly inside (-pi/2, pi/2)")]
    PhaseOutOfDomain { index: usize, value: f64 },

    #[error("coefficient sequence is not even and purely imaginary (deviation {deviation:e})")]
    SymmetryViolation { deviation: f64 },

    #[error(
        "signal too large: sup |b|^2 = {sup_sq} exceeds {limit} \
         (sup |f| must stay below 2^(-1/2) - epsilon)"
    )]
    SignalTooLarge { sup_sq: f64, limit: f64 },

    #[error("margin epsilon = {0} is not usable (must be > 1e-6 and below 1 - 2^(-1/2) for pair margins)")]
    InvalidEpsilon(f64),

    #[error("pair violates the B_epsilon contract: {0}")]
    NotInBEpsilon(String),

    #[error("fixed-point iteration did not converge in {iterations} iterations (last residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("fixed-point residual grew by a factor {ratio} at iteration {iteration}")]
    ContractionBroken { iteration: usize, ratio: f64 },

    #[error("|a(infinity)| = {0:e} is too small to strip a layer")]
    DegenerateA(f64),

    #[error("Plancherel tail {tail:e} still above {tol:e} after {steps} layers")]
    TailNotDecaying { steps: usize, tail: f64, tol: f64 },

    #[error("a(infinity) must be real and positive, got {0}")]
    NonPositiveAInfinity(f64),

    #[error("malformed file: {0}")]
    Format(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
