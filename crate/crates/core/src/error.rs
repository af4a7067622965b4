use alloc::string::String;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dataset has no rows")]
    NoRows,
    #[error("dataset has no columns")]
    NoColumns,
    #[error("missing value at row {row}, column {column}")]
    MissingCell { row: usize, column: usize },
    #[error("row {row} has {found} cells, expected {expected}")]
    RaggedRow { row: usize, expected: usize, found: usize },
    #[error("column {column} ({name}) has a single category; at least two are required")]
    SingleCategory { column: usize, name: String },
    #[error("value {value} at row {row}, column {column} is outside the column arity {arity}")]
    CategoryOutOfRange { row: usize, column: usize, value: u16, arity: u16 },
    #[error("column {column} has more than {limit} categories")]
    TooManyCategories { column: usize, limit: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("{what} is limited to {limit}, got {got}")]
    Guard { what: &'static str, limit: usize, got: usize },
    #[error("parent set is not contained in the predecessor set")]
    NotInPredecessors,
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("feature syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("invalid feature: {0}")]
    InvalidFeature(String),
    #[error("numeric domain error: {0}")]
    Domain(String),
}
