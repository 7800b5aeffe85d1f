use thiserror::Error;

use crate::data::ItemId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("parse error at row {row}, column {column}: {message}")]
    Parse { row: usize, column: usize, message: String },

    #[error("invalid schema: {0}")]
    InvalidSchema(String),

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("unknown item id: {0}")]
    UnknownItem(ItemId),

    #[error("duplicate item id in marked ranking: {0}")]
    DuplicateMarked(ItemId),

    #[error("insufficient training data: need at least {required} marked items, got {got}")]
    InsufficientTrainingData { required: usize, got: usize },

    #[error("degenerate training set: every difference vector is zero")]
    DegenerateTrainingSet,

    #[error("training produced an all-zero weight vector")]
    DegenerateSolution,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("cannot form {requested} ratings from {distinct} distinct scores")]
    CannotFormRatings { requested: usize, distinct: usize },

    #[error("rating {0} has no items")]
    EmptyRating(u32),

    #[error("lasso region {0} contains no items")]
    EmptyRegion(usize),

    #[error("polyline needs at least two distinct anchors")]
    DegeneratePolyline,

    #[error("axis requires rating anchors")]
    AxisRequiresRatingAnchors,

    #[error("invalid bracket ({low}, {high})")]
    InvalidBracket { low: u32, high: u32 },

    #[error("nothing to save: {0}")]
    NothingToSave(&'static str),

    #[error("unknown scheme: {0}")]
    UnknownScheme(String),

    #[error("schemes were built on different datasets")]
    DatasetMismatch,

    #[error("operation cancelled")]
    Cancelled,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
