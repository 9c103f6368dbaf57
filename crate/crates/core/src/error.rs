use thiserror::Error;

/// Errors raised by the operators, solvers and probes of this crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("fractional order s = {0} is outside the open interval (0, 1)")]
    InvalidOrder(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parameter {name} = {value} is outside its admissible range {range}")]
    Domain {
        name: &'static str,
        value: f64,
        range: String,
    },

    #[error("evaluation point x = {x} is on or too close to the boundary (distance {distance}, need at least {required})")]
    NearBoundary { x: f64, distance: f64, required: f64 },

    #[error("adaptive quadrature did not converge on [{a}, {b}]: estimate {value}, error {error} after {intervals} subintervals")]
    QuadratureNonConvergence {
        a: f64,
        b: f64,
        value: f64,
        error: f64,
        intervals: usize,
    },

    #[error("field has unbounded support on the {side} side but no tail descriptor")]
    TailMissing { side: &'static str },

    #[error("power tail with exponent {exponent} is not integrable against the kernel (need exponent < {limit})")]
    DivergentTail { exponent: f64, limit: f64 },

    #[error("Dirichlet problem requires s > 1/2, got s = {0}; for s <= 1/2 the Neumann solver covers both problems")]
    DirichletOrder(f64),

    #[error("Neumann data violates compatibility: integral of f = {integral:e} (L1 norm {l1_norm:e})")]
    Compatibility { integral: f64, l1_norm: f64 },

    #[error("linear system is singular or not positive definite: {0}")]
    SingularSystem(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("insufficient samples: need at least {needed}, got {got}")]
    InsufficientSamples { needed: usize, got: usize },

    #[error("probe window [{lo:e}, {hi:e}] contains {count} nodes, need at least {needed}")]
    WindowTooThin {
        lo: f64,
        hi: f64,
        count: usize,
        needed: usize,
    },

    #[error("eigensolver failure: {0}")]
    Eigen(String),

    #[error("extrapolation diverged: {0}")]
    Extrapolation(String),
}

pub type Result<T> = std::result::Result<T, Error>;
