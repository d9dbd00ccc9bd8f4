use thiserror::Error;

use crate::scalars::ScalarTag;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("expected scalars over {expected}, found {found}")]
    WrongScalar { expected: ScalarTag, found: ScalarTag },
    #[error("singular matrix: {0}")]
    Singular(String),
    #[error("unsupported form: {0}")]
    UnsupportedForm(String),
    #[error("index {index} out of range 1..={max}")]
    IndexOutOfRange { index: usize, max: usize },
    #[error("not an automorphism of the form (residual {residual:.3e})")]
    NotAutomorphism { residual: f64 },
    #[error("subspace is not isotropic (residual {residual:.3e})")]
    NotIsotropic { residual: f64 },
    #[error("numerically ambiguous rank: margin {margin:.3e} below {threshold:.3e}")]
    AmbiguousRank { margin: f64, threshold: f64 },
    #[error("stratum mismatch: dim W∩(V⊕0) = {left}, dim W∩(0⊕V) = {right}")]
    StratumMismatch { left: usize, right: usize },
    #[error("point is not in the open stratum (stratum {0})")]
    NotOpenStratum(usize),
    #[error("singular values fail to pair (defect {defect:.3e})")]
    PairingViolation { defect: f64 },
    #[error("lyapunov cross-check failed (difference {difference:.3e})")]
    CrossCheck { difference: f64 },
    #[error("word ball too large: {count} words exceeds cap {cap}")]
    BallTooLarge { count: u128, cap: usize },
    #[error("empty word set")]
    EmptyBall,
    #[error("no eigenvalue gap: reached log-gap {gap:.3e} after power {power}")]
    NoGap { gap: f64, power: u64 },
    #[error("point is off the model hypersurface (defect {defect:.3e})")]
    OffHypersurface { defect: f64 },
    #[error("line lies on the boundary")]
    BoundaryPoint,
    #[error("signature ambiguity: eigenvalue {eigenvalue:.3e} too close to zero")]
    SignatureAmbiguity { eigenvalue: f64 },
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
