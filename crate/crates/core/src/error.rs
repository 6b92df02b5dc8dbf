use thiserror::Error;

pub type Result<T> = std::result::Result<T, GfdmError>;

#[derive(Debug, Error)]
pub enum GfdmError {
    #[error("degenerate level-set gradient at ({x:.6}, {y:.6}, {z:.6}): |grad| = {norm:e}")]
    DegenerateGradient { x: f64, y: f64, z: f64, norm: f64 },

    #[error("invalid surface patch: {0}")]
    InvalidPatch(String),

    #[error("invalid sampling request: {0}")]
    InvalidSampling(String),

    #[error("discs {first} and {second} both claim node {node}")]
    OverlappingInclusions {
        first: usize,
        second: usize,
        node: usize,
    },

    #[error("periodic node {node} has no partner within tolerance {tol:e}")]
    UnmatchedPeriodicNode { node: usize, tol: f64 },

    #[error("node {center}: only {available} admissible neighbours, {requested} requested")]
    InsufficientNeighbors {
        center: usize,
        requested: usize,
        available: usize,
    },

    #[error("stencil at node {center} is singular (rank {rank})")]
    SingularStencil { center: usize, rank: usize },

    #[error("boundary node {0} has no conormal")]
    MissingConormal(usize),

    #[error("no stencil for node {0}")]
    MissingStencil(usize),

    #[error("node {0} carries a tag that no row rule covers")]
    UntaggedNode(usize),

    #[error("sparse factorization broke down at column {0}")]
    SingularMatrix(usize),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("exact solution has zero norm over the test nodes")]
    ZeroExactNorm,

    #[error("no nodes tagged {0}")]
    EmptyBoundary(&'static str),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
