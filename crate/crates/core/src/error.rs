use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("non-finite matrix entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("eigendecomposition failed: {0}")]
    Eigen(String),

    #[error("matrix is singular or ill-conditioned (condition estimate {condition:.3e}, bound {bound:.3e})")]
    Singular { condition: f64, bound: f64 },

    #[error("linear solve residual {residual:.3e} exceeds tolerance {tolerance:.3e}")]
    Residual { residual: f64, tolerance: f64 },

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid time grid: {0}")]
    InvalidGrid(String),

    #[error("integrator step size underflow at t = {t:.6e} (h = {step:.3e})")]
    StepUnderflow { t: f64, step: f64 },

    #[error("{quantity} drift {drift:.3e} at t = {t:.6e} exceeds the projection bound")]
    InvariantDrift {
        quantity: &'static str,
        drift: f64,
        t: f64,
    },

    #[error("steady state is not unique: {count} eigenvalues have |Re λ| below {threshold:.1e}")]
    DegenerateSteadyState { count: usize, threshold: f64 },

    #[error("outside the closed-form parameter regime: {0}")]
    Regime(String),

    #[error("invalid partition: {0}")]
    Partition(String),

    #[error("elimination step {step} has a singular block: {reason}")]
    SingularBlock { step: u8, reason: String },

    #[error("time step too coarse: single-step jump probability {probability:.3} exceeds {limit}")]
    StepTooCoarse { probability: f64, limit: f64 },

    #[error("jump channel {channel} produced a zero-norm state")]
    ZeroNormJump { channel: usize },

    #[error("no-jump trace underflow ({trace:.3e}) at t = {t:.6e}")]
    TraceUnderflow { trace: f64, t: f64 },

    #[error("metastable state becomes the steady state: relaxation time is infinite")]
    InfiniteTimescale,

    #[error("projection is lossy: antisymmetric population {population:.3e}")]
    LossyProjection { population: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
