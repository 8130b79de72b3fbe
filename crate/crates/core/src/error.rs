use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed or inconsistent user input (shapes, names, parameters).
    #[error("invalid input: {0}")]
    Input(String),

    #[error("column not found: {0}")]
    MissingColumn(String),

    #[error("csv parse error at row {row}, column '{column}': {reason}")]
    CsvValue {
        row: usize,
        column: String,
        reason: String,
    },

    #[error("singular design: near-collinear columns [{}]", columns.join(", "))]
    SingularDesign { columns: Vec<String> },

    #[error("insufficient sample: need more than {needed} observations, have {available}")]
    InsufficientSample { needed: usize, available: usize },

    #[error("non-stationary process: {0}")]
    NonStationary(String),

    #[error("identification failure: {0}")]
    Identification(String),

    #[error("degenerate shock: {0}")]
    DegenerateShock(String),

    #[error("normalization failure: {0}")]
    Normalization(String),

    #[error("bootstrap failed: {0}")]
    Bootstrap(String),

    #[error("experiment aborted: {0}")]
    Experiment(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors caused by the caller's inputs rather than by the numerics.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Input(_)
                | Error::MissingColumn(_)
                | Error::CsvValue { .. }
                | Error::NonStationary(_)
                | Error::Io(_)
                | Error::Csv(_)
                | Error::Json(_)
        )
    }
}
