use thiserror::Error;

use crate::geom::PolygonViolation;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GeometryError {
    #[error("edge move collapses the polygon: {0}")]
    Collapse(PolygonViolation),
    #[error("edge index {index} out of range for {len} edges")]
    EdgeIndex { index: usize, len: usize },
    #[error("invalid polygon: {0}")]
    Invalid(PolygonViolation),
    #[error("merged geometry contains a hole")]
    Hole,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("layout has {0} layers; only single-layer layouts are supported")]
    MultiLayer(usize),
    #[error("unsupported units {0:?}, expected \"nm\"")]
    Units(String),
    #[error("window {w}x{h} nm is smaller than 6 blur sigmas ({min} nm)")]
    WindowTooSmall { w: i64, h: i64, min: f64 },
    #[error("only {found} distinct variants of {hotspot} after {tried} attempts, {requested} requested")]
    DuplicateExhaustion { hotspot: String, requested: usize, found: usize, tried: usize },
    #[error("empty corpus")]
    EmptyCorpus,
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("class {0} has no samples")]
    EmptyClass(usize),
    #[error("infeasible corpus spec: {0}")]
    InfeasibleSpec(String),
    #[error("invalid config: {0}")]
    Config(String),
    #[error("io error on {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io { path: path.as_ref().display().to_string(), source }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
