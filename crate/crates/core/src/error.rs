use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("integration diverged at step {step}")]
    Diverged { step: usize },
    #[error("degenerate tangent perturbation (zero norm)")]
    DegeneratePerturbation,
    #[error("insufficient data: need at least {needed} samples, got {got}")]
    InsufficientData { needed: usize, got: usize },
    #[error("column {0} has zero variance and cannot be normalized")]
    ZeroVariance(usize),
    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),
    #[error("degenerate bandwidth: all points coincide")]
    DegenerateBandwidth,
    #[error("selection infeasible: {0}")]
    SelectionInfeasible(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("internal invariant violated: {0}")]
    Internal(String),
    #[error("aliasing: norm*dt/alpha = {ratio:.6} >= pi; minimal admissible alpha is {min_alpha:.6}")]
    Aliasing { ratio: f64, min_alpha: f64 },
    #[error("trotter budget: per-step phase {phase:.6} exceeds pi; use at least {suggested_steps} steps")]
    StepBudget { phase: f64, suggested_steps: usize },
    #[error("resource limit: {0}")]
    Resource(String),
    #[error("empty complex")]
    EmptyComplex,
    #[error("undefined: {0}")]
    Undefined(String),
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
