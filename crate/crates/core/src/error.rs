use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("input contains no vertices")]
    EmptyGraph,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("graph has no edges; the density matrix is undefined")]
    EdgelessGraph,

    #[error("graph has {n} vertices, above the dense-eigensolver cap of {cap}")]
    DenseCapExceeded { n: usize, cap: usize },

    #[error("tridiagonal eigensolver did not converge (alpha = {alpha:?}, beta = {beta:?})")]
    EigenNonConvergence { alpha: Vec<f64>, beta: Vec<f64> },

    #[error("extremal eigenvalues did not converge after {steps} Lanczos steps")]
    ExtremalNonConvergence { steps: usize, best: Vec<f64> },

    #[error("function returned a non-finite value {value} at node {node}")]
    NonFinite { node: f64, value: f64 },

    #[error("descriptor mismatch: {0}")]
    Mismatch(String),

    #[error("reference descriptor has zero norm")]
    ZeroReference,

    #[error("classification input is degenerate: {0}")]
    DegenerateLabels(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
