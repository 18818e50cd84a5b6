use num_complex::Complex64;
use thiserror::Error;

use crate::series::FamilySum;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("non-finite value at step {step}")]
    Overflow { step: usize },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("no sign change with a valid itinerary for period {period}")]
    NoBracket { period: usize },

    #[error("no repelling fixed point found: {0}")]
    NoFixedPoint(String),

    #[error("Newton iteration did not converge (last residual {last:e})")]
    NonConverged { last: f64, history: Vec<f64> },

    #[error("singular Jacobian at iteration {iteration}")]
    SingularJacobian { iteration: usize },

    #[error("nesting violation ({what}) at {point}")]
    NestingViolation { what: String, point: Complex64 },

    #[error("first return violation at {point}: return time {time}, expected {expected}")]
    FirstReturnViolation { point: Complex64, time: usize, expected: usize },

    #[error("critical orbit point {point} (step {step}) meets the closed annulus A'")]
    PostcriticalCollision { point: Complex64, step: usize },

    #[error("node budget of {budget} exceeded")]
    BudgetExceeded { budget: u64, partial: Box<FamilySum> },

    #[error("backward orbit hits the critical point: {orbit:?}")]
    CriticalHit { orbit: Vec<Complex64> },

    #[error("terminal grid is empty")]
    EmptyGrid,

    #[error("orbit without expansion: |Df^{k}| = {derivative} at {point}")]
    NoExpansion { k: usize, derivative: f64, point: Complex64 },

    #[error("divergent tail: ratio r = {ratio} >= 1")]
    DivergentTail { ratio: f64 },

    #[error("no return to V' within {budget} steps")]
    NoReturn { budget: usize },

    #[error("growth-rate regression residual {residual:e} above threshold")]
    BadFit { residual: f64 },

    #[error("{0} outside its supported range")]
    Range(String),

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("v-recursion not contractive at step {step}: factor {factor}")]
    Noncontractive { step: usize, factor: f64 },

    #[error("no certified delta in the requested range")]
    UncertifiableRange,

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("family syntax error: {0}")]
    Syntax(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
