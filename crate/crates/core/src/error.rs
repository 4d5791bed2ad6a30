use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("temperature must be strictly positive, got {0}")]
    NonPositiveTemperature(f64),

    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),

    #[error("self-consistency did not converge at T={t}, H={h} (best residual {residual:e})")]
    NonConvergence { t: f64, h: f64, residual: f64 },

    #[error("no converged branch among {0} candidate states")]
    NoConvergedBranch(usize),

    #[error("indicator does not change sign on bracket [{lo}, {hi}]")]
    BracketFailure { lo: f64, hi: f64 },

    #[error("invalid density matrix: {0}")]
    InvalidDensityMatrix(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("no self-consistent zero-temperature state for J_aa={j_aa}, J_ab={j_ab}, H={h}")]
    NoConsistentPhase { j_aa: f64, j_ab: f64, h: f64 },

    #[error("complex residue {0:e} in a quantity that must be real")]
    ImaginaryResidue(f64),

    #[error("figure {figure} needs column `{column}`")]
    MissingColumn { figure: String, column: String },

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub(crate) fn check_temperature(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::NonPositiveTemperature(t))
    }
}
