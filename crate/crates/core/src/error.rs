use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("malformed XML: {0}")]
    XmlSyntax(String),

    #[error("shape violation at {path}: {message}")]
    ShapeViolation { path: String, message: String },

    #[error("value {value:?} is outside the domain of {level}")]
    DomainViolation { level: String, value: String },

    #[error("invalid schema: {0}")]
    Schema(String),

    #[error("query syntax error on line {line}: {message}")]
    QuerySyntax { line: usize, message: String },

    #[error("unknown dimension {0:?}")]
    UnknownDimension(String),

    #[error("unknown level {level:?} in dimension {dimension:?}")]
    UnknownLevel { dimension: String, level: String },

    #[error("unknown measure {0:?}")]
    UnknownMeasure(String),

    #[error("path {0:?} does not resolve against the schema")]
    UnknownPath(String),

    #[error("literal {literal:?} does not type-check against {path}")]
    TypeMismatch { path: String, literal: String },

    #[error("cannot re-aggregate {0}")]
    NonReaggregable(String),

    #[error("invalid roll-up: {0}")]
    InvalidRollup(String),

    #[error("tree is not normalized: {0}")]
    NotNormalized(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("result mismatch: {0}")]
    ResultMismatch(String),
}
