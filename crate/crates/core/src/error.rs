use rug::Integer;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("could not fully factor {0}: composite cofactor survived trial division and rho")]
    UnfactoredPart(Integer),

    #[error("valuation of zero is undefined")]
    ZeroInput,

    #[error("model is singular (discriminant is zero)")]
    SingularModel,

    #[error("operation is undefined at the point at infinity")]
    InfinityInput,

    #[error("division polynomial index {0} is outside 1..=5")]
    DivisionIndex(i64),

    #[error("reduction at {0} is not multiplicative")]
    NotMultiplicative(Integer),

    #[error("reduction at {0} is good")]
    GoodReduction(Integer),

    #[error("{0} is not an odd prime of good reduction")]
    BadPrime(Integer),

    #[error("points must be distinct")]
    EqualPoints,

    #[error("point set contains duplicates")]
    DuplicatePoints,

    #[error("point set is empty")]
    EmptySet,

    #[error("archimedean height series did not converge")]
    NonConvergent,

    #[error("torus point lies on the lattice")]
    LatticePoint,

    #[error("supplied point {0} is torsion")]
    TorsionPointSupplied(String),

    #[error("degree d = {0} is only supported by the pure bound calculators")]
    UnsupportedDegree(u32),

    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error("{label}: point {point} is not on the curve")]
    OffCurvePoint { label: String, point: String },

    #[error("internal invariant violated: {0}")]
    InvariantViolation(String),

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;
