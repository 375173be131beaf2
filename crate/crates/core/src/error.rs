use thiserror::Error;

use crate::trace_poly::ParseError;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("variable index x{0} out of range (polynomial has {1} variables)")]
    VarOutOfRange(u32, u32),
    #[error("polynomial is not real {0}-linear in its slots")]
    NotLinear(u32),
    #[error("slot y{0} appears starred; contraction requires self-adjoint slots")]
    StarredSlot(u32),
    #[error("unbound variable x{0}")]
    Unbound(u32),
    #[error("unbound slot y{0}_{1}")]
    UnboundSlot(u32, u32),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("matrix is not Hermitian (deviation {0:e})")]
    NotHermitian(f64),
    #[error("invalid argument: {0}")]
    Invalid(String),
    #[error("time {0} is not on the grid")]
    OffGrid(f64),
    #[error("paths live on different grids")]
    GridMismatch,
    #[error("empty ensemble")]
    EmptyEnsemble,
    #[error("unknown check `{0}`")]
    UnknownCheck(String),
    #[error("malformed NCP1 data: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
