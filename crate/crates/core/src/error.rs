use std::fmt;

use thiserror::Error;

/// One of the admissibility conditions a cat-map matrix must satisfy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Condition {
    Determinant,
    ProductAbEven,
    ProductCdEven,
    TraceEven,
    TraceAboveTwo,
    CoprimeOffDiagonal,
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Condition::Determinant => "ad-bc=1",
            Condition::ProductAbEven => "ab even",
            Condition::ProductCdEven => "cd even",
            Condition::TraceEven => "trace even",
            Condition::TraceAboveTwo => "trace>2",
            Condition::CoprimeOffDiagonal => "gcd(b,c)=1",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix violates condition {0}")]
    ConditionViolation(Condition),

    #[error("no t <= {ceiling} with A^t = I mod {modulus}")]
    NoOrderFound { modulus: String, ceiling: u64 },

    #[error("dimension {n} exceeds the configured maximum {max}")]
    TooLarge { n: usize, max: usize },

    #[error("propagator unitarity defect {defect:e} exceeds tolerance")]
    UnitarityFailure { defect: f64 },

    #[error("M^t does not act as a scalar on the sample (leakage {leakage:e})")]
    NotScalar { leakage: f64 },

    #[error("projector state vanishes (norm {norm:e})")]
    VanishingState { norm: f64 },

    #[error("half-period structure violated (leakage {leakage:e})")]
    StructureViolation { leakage: f64 },

    #[error("quantum period {found} does not match the required branch (expected {expected})")]
    BranchMismatch { expected: u64, found: u64 },

    #[error("rate fit is degenerate: {0}")]
    Degenerate(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
