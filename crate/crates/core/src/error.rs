use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not hermitian: max |m(j,k) - conj(m(k,j))| = {max_asymmetry:e} (relative to max |entry|)")]
    NotHermitian { max_asymmetry: f64 },

    #[error("trace is {trace:e}, expected 1")]
    NotNormalized { trace: f64 },

    #[error("matrix is not positive semi-definite (min eigenvalue below -{tolerance:e})")]
    NotPositive { tolerance: f64 },

    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("operation requires a bipartite density matrix")]
    NotBipartite,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("q = 1 is not allowed here; use the von Neumann variant instead")]
    TsallisAtUnity,

    #[error("eta(t) is singular at t = {t}: denominator magnitude {magnitude:e}")]
    EtaSingular { t: f64, magnitude: f64 },

    #[error("state is not normalizable: |eta| = {eta_abs}")]
    NotNormalizable { eta_abs: f64 },

    #[error("discretization failed at grid point ({i}, {j}, {k}, {l}): {reason}")]
    Discretization {
        i: usize,
        j: usize,
        k: usize,
        l: usize,
        reason: String,
    },

    #[error("cut removes all weight: projected trace {trace:e}")]
    CutDegenerate { trace: f64 },

    #[error("quadrature did not converge: refinement changed {quantity} by {change:e}")]
    QuadratureNotConverged { quantity: &'static str, change: f64 },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
