use thiserror::Error;

/// Errors raised by the solvers, the parameter planner and the diagnostics.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("tanc pole: |cos({z})| = {cos_abs:e} is below the pole guard")]
    Pole { z: f64, cos_abs: f64 },

    #[error("no sign change of the consistency residual in [{lo}, {hi}]")]
    NoRootInBracket { lo: f64, hi: f64 },

    #[error("|cos(alpha)| = {cos_abs} < 0.5 at alpha = {alpha}")]
    CosineTooSmall { alpha: f64, cos_abs: f64 },

    #[error("root finder did not converge after {iterations} iterations (last iterate {last})")]
    NoConvergence { iterations: usize, last: f64 },

    #[error("|psi(beta)| = {psi_abs:e} too small at beta = {beta}")]
    PsiTooSmall { beta: f64, psi_abs: f64 },

    #[error(
        "stability bound {bound_value} exceeds theta_max = {theta_max}; decrease the time step \
         relative to the mesh width (tau/h must stay below a small constant)"
    )]
    StabilityViolation { bound_value: f64, theta_max: f64 },

    #[error("non-finite value in the numerical state at step {step}")]
    NonFiniteState { step: usize },

    #[error("fixed-point iteration stalled: residual {residual:e} after {iterations} iterations")]
    FixedPointDivergence { iterations: usize, residual: f64 },

    #[error("grid size {0} is not supported by the transform")]
    UnsupportedGridSize(usize),

    #[error("grids are not node aligned: {coarse} points vs reference {fine} points")]
    GridMisaligned { coarse: usize, fine: usize },

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),
}

pub type Result<T> = std::result::Result<T, Error>;
