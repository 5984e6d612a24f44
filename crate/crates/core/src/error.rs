use std::io;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown vertex type `{0}`")]
    UnknownVertexType(String),
    #[error("duplicate vertex type `{0}`")]
    DuplicateVertexType(String),
    #[error("vertex type `{0}` must have at least one vertex")]
    EmptyVertexType(String),
    #[error("duplicate edge type ({src}, {name}, {dst})")]
    DuplicateEdgeType {
        src: String,
        name: String,
        dst: String,
    },
    #[error("edge type `{edge_type}`: vertex index {index} out of range for `{vertex_type}` ({count} vertices)")]
    VertexIndexOutOfRange {
        edge_type: String,
        vertex_type: String,
        index: u32,
        count: usize,
    },
    #[error("symmetric edge type `{0}` must start and end at the same vertex type")]
    AsymmetricEndpoints(String),
    #[error("edge type `{0}` has no materialized reverse")]
    MissingReverse(String),
    #[error("shape mismatch in {context}: expected {expected:?}, got {actual:?}")]
    ShapeMismatch {
        context: String,
        expected: (usize, usize),
        actual: (usize, usize),
    },
    #[error("vertex type `{0}` already has a feature table")]
    FeaturesAlreadyAttached(String),
    #[error("vertex type `{0}` has no feature table")]
    MissingFeatures(String),
    #[error("non-finite value in {0}")]
    NonFinite(String),
    #[error("invalid relation: {0}")]
    InvalidRelation(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("label {label} at row {row} is outside [0, {num_classes})")]
    InvalidLabel {
        row: usize,
        label: u32,
        num_classes: usize,
    },
    #[error("{scheme} collects {count} relations for `{vertex_type}`, above the cap of {cap}")]
    RelationCapExceeded {
        scheme: String,
        vertex_type: String,
        count: usize,
        cap: usize,
    },
    #[error("format error: {0}")]
    Format(String),
    #[error("manifest hash mismatch: expected {expected}, found {found}")]
    ManifestMismatch { expected: String, found: String },
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn shape(context: impl Into<String>, expected: (usize, usize), actual: (usize, usize)) -> Self {
        Error::ShapeMismatch {
            context: context.into(),
            expected,
            actual,
        }
    }

    /// Process exit code used by the command-line front end.
    ///
    /// 2 for malformed inputs, 3 for configuration problems, 4 when a
    /// resource cap is hit.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::RelationCapExceeded { .. } => 4,
            Error::Config(_)
            | Error::InvalidLabel { .. }
            | Error::ManifestMismatch { .. }
            | Error::InvalidRelation(_) => 3,
            _ => 2,
        }
    }
}
