use thiserror::Error;

pub type Result<T> = std::result::Result<T, ElvaError>;

#[derive(Debug, Error)]
pub enum ElvaError {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },

    #[error("argument outside the analyticity strip: {0}")]
    Domain(String),

    #[error("invalid jump discretization geometry: {0}")]
    Geometry(String),

    #[error("quadrature failed to converge: {0}")]
    Quadrature(String),

    #[error("problem size {size} exceeds the configured maximum {max}")]
    SizeLimit { size: usize, max: usize },

    #[error("unsupported discount curve: {0}")]
    UnsupportedCurve(String),

    #[error("survival probability to interval {interval} is not positive")]
    DegenerateSurvival { interval: usize },

    #[error("row {row}: {reason}")]
    TableRow { row: usize, reason: String },

    #[error("numerical breakdown: {0}")]
    Numerical(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl ElvaError {
    pub fn invalid(name: impl Into<String>, reason: impl Into<String>) -> Self {
        Self::InvalidParameter {
            name: name.into(),
            reason: reason.into(),
        }
    }
}
