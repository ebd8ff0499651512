use std::path::PathBuf;

use thiserror::Error;

use crate::hexgeom::{CellCoord, EdgeRef};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("cell ({}, {}) lies outside the grid", .0.q, .0.r)]
    OutOfGrid(CellCoord),

    #[error("edge index {0} is outside 1..=6")]
    BadEdgeIndex(u8),

    #[error("traversal at t={time} in cell ({}, {}) precedes latest record at t={latest}", .cell.q, .cell.r)]
    TimeRegression {
        cell: CellCoord,
        time: f64,
        latest: f64,
    },

    #[error("no path from {from} to {to}")]
    Unreachable { from: EdgeRef, to: EdgeRef },

    #[error("simulation hit the time cap of {cap_s} s with {unfinished} aircraft unfinished")]
    Timeout { cap_s: f64, unfinished: usize },

    #[error("case `{case}`, replication {replication}: {source}")]
    Study {
        case: String,
        replication: u32,
        #[source]
        source: Box<Error>,
    },

    #[error("degenerate sample: {0}")]
    DegenerateSample(String),

    #[error("config parse error at line {line}, column {column}: {message}")]
    ConfigParse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("config validation failed:\n{}", .0.join("\n"))]
    ConfigInvalid(Vec<String>),

    #[error("malformed record on line {line}: {message}")]
    Record { line: usize, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
