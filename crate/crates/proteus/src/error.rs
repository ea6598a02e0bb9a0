use std::path::PathBuf;

/// Errors produced anywhere in the pipeline.
#[derive(Debug, thiserror::Error)]
pub enum ProteusError {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error in {path}: {message}")]
    Csv { path: PathBuf, message: String },

    #[error("row {row}, column \"{column}\": cannot parse \"{value}\" as a number")]
    NonNumericCell {
        row: usize,
        column: String,
        value: String,
    },

    #[error("invalid data: {0}")]
    InvalidData(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("degenerate score distribution")]
    DegenerateScores,

    #[error("fewer anomaly groups ({groups}) than folds ({folds}); reduce K")]
    TooFewGroups { groups: usize, folds: usize },

    #[error("model file error: {0}")]
    ModelFormat(String),
}

pub type Result<T> = std::result::Result<T, ProteusError>;

impl ProteusError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        ProteusError::Io {
            path: path.into(),
            source,
        }
    }
}
