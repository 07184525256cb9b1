use std::path::PathBuf;

use crate::ids::EntityId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid entity id {0:?}")]
    InvalidId(String),
    #[error("expected a {expected} id, got {got}")]
    WrongIdKind { expected: &'static str, got: EntityId },
    #[error("unknown datatype {datatype:?} on {subject} {property}")]
    UnknownDatatype {
        subject: EntityId,
        property: EntityId,
        datatype: String,
    },
    #[error("invalid value for datatype {datatype}: {detail}")]
    InvalidValue { datatype: String, detail: String },
    #[error("heterogeneous qualifier {qualifier} on {subject} {property}")]
    HeterogeneousQualifier {
        subject: EntityId,
        property: EntityId,
        qualifier: EntityId,
    },
    #[error("claims do not share subject and property")]
    MixedQuad,
    #[error("empty Q_m: quad {subject} {property} has no qualifiers")]
    EmptyQualifiers { subject: EntityId, property: EntityId },
    #[error("empty O_n: quad has no objects")]
    EmptyObjects,
    #[error("empty G set for {0}")]
    EmptyGSet(String),
    #[error("table row {row}: {detail}")]
    Table { row: usize, detail: String },
    #[error("annotation schema error in sentence {sentence}: {detail}")]
    Schema { sentence: String, detail: String },
    #[error("overlapping substitutions at tokens {0}..={1}")]
    OverlappingLabels(usize, usize),
    #[error("vector file line {line}: {detail}")]
    VectorFormat { line: usize, detail: String },
    #[error("{0}")]
    Empty(&'static str),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("parse error at {path}: {detail}")]
    Payload { path: String, detail: String },
    #[error("fetch of {key} failed (retriable): {detail}")]
    Fetch { key: String, detail: String },
    #[error("{key} not found")]
    Missing { key: String },
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for failures that may succeed on a later attempt.
    pub fn is_retriable(&self) -> bool {
        matches!(self, Error::Fetch { .. })
    }
}
