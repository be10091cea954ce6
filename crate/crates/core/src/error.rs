use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the clustering pipeline, the simulator and the I/O layer.
#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// A cluster received zero total membership weight, so its center is undefined.
    #[error("degenerate cluster {cluster}: membership weights sum to zero")]
    DegenerateCluster { cluster: usize },

    /// Hard assignment left a cluster without members.
    #[error("cluster {cluster} is empty after assignment")]
    EmptyCluster { cluster: usize },

    #[error("average energy undefined: cluster has no alive nodes")]
    UndefinedAverage,

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
