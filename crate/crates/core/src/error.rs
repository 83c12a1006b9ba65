//! Error type shared across the library.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid Levy measure specification: {0}")]
    InvalidSpec(String),

    #[error("quadrature did not converge within budget (residual estimate {residual:e})")]
    QuadratureNonConvergence { residual: f64 },

    #[error("radial profile exceeds the stable envelope at r={r} (ratio {ratio})")]
    EnvelopeViolation { r: f64, ratio: f64 },

    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    #[error("ODE integrator step size underflow at t={t} (|state|={norm:e})")]
    Stiffness { t: f64, norm: f64 },

    #[error("numerical blow-up in path {path} (seed {seed}) at step {step}")]
    Divergence { path: usize, seed: u64, step: usize },

    #[error("Fourier grid too small: characteristic function decays to {boundary:e} at the boundary, need < {required:e}")]
    GridTooSmall { boundary: f64, required: f64 },

    #[error("ambiguous Jordan chain length, candidates {candidates:?}")]
    JordanAmbiguity { candidates: Vec<usize> },

    #[error("flow has not reached the linear regime (fit residual {residual:e})")]
    NonConvergence { residual: f64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("sample size {n} too small for {bins} bins")]
    TooFewSamples { n: usize, bins: usize },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("profile window too deep: 1 - G below numeric floor on the requested window")]
    WindowTooDeep,

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
