use thiserror::Error;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("topology error: {0}")]
    Topology(String),

    #[error("topology file {path}, line {line}: {message}")]
    TopologyFormat {
        path: String,
        line: usize,
        message: String,
    },

    #[error("zipf rank {rank} out of range 1..={count}")]
    ZipfRank { rank: usize, count: usize },

    #[error("duplicate cache insert for chunk {0}")]
    DuplicateInsert(String),

    #[error("event record for second {second} precedes last recorded second {last}")]
    OutOfOrderTick { second: u64, last: u64 },

    #[error("decision program error: {0}")]
    Program(#[from] lars::LarsError),

    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}
