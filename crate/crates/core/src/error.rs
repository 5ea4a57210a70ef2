use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A configuration value failed validation. `field` is the dotted path of
    /// the offending entry, e.g. `params.lambda1`.
    #[error("invalid value for `{field}`: {reason}")]
    InvalidField { field: String, reason: String },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("incompressibility lost: |det F - 1| = {drift:e} at t = {t}")]
    DeterminantDrift { t: f64, drift: f64 },

    #[error("index {index} is not an interior grid point of a trajectory with {len} samples")]
    GridIndex { index: usize, len: usize },

    #[error("no negative-dissipation witness: {0}")]
    NoWitness(String),

    #[error("malformed input: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn field(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidField {
            field: field.into(),
            reason: reason.into(),
        }
    }
}
