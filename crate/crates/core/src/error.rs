use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("syntax error at position {position}: {message}")]
    Syntax { position: usize, message: String },

    #[error("variable z{index} out of range (polynomial has {n_vars} variables)")]
    VariableOutOfRange { index: usize, n_vars: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid link: {0}")]
    InvalidLink(String),

    #[error("no convergence after {iterations} iterations (residual {residual:.3e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("constraint Jacobian is rank deficient (smallest singular value {sigma:.3e})")]
    RankDeficient { sigma: f64 },

    #[error("tangent spanning vectors are linearly dependent (residual norm {norm:.3e})")]
    DimensionCollapse { norm: f64 },

    #[error("operation requires n = {required}, got n = {got}")]
    WrongDimension { required: usize, got: usize },

    #[error("no seed converged: {0}")]
    EmptyResult(String),

    #[error("possible bifurcation: corrector Jacobian singular value {sigma:.3e}")]
    BifurcationSuspected { sigma: f64 },

    #[error("continuation step collapsed below {min_step:.3e}")]
    StepCollapse { min_step: f64 },

    #[error("differential vanishes (largest singular value {sigma:.3e})")]
    RankZero { sigma: f64 },

    #[error("differential has full rank (singular value ratio {ratio:.3e})")]
    RankTwo { ratio: f64 },

    #[error("not applicable: {0}")]
    NotApplicable(String),

    #[error("degenerate critical point: eigenvalue {eigenvalue:.3e} inside dead band {band:.3e}")]
    Degenerate { eigenvalue: f64, band: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
