use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("ambient dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("index set {members:?} is not a subset of {{0,...,{ambient_n}}}")]
    InvalidIndexSet { members: Vec<usize>, ambient_n: usize },

    #[error("grade mismatch: expected {expected}, found {found}")]
    GradeMismatch { expected: usize, found: usize },

    #[error("index set must contain 0")]
    MissingZeroIndex,

    #[error("basis vectors are linearly dependent")]
    LinearlyDependent,

    #[error("empty basis")]
    EmptyBasis,

    #[error("rank {rank} is not a proper subgroup rank for Z^{ambient}")]
    FullRankSubgroup { rank: usize, ambient: usize },

    #[error("lattice basis is singular")]
    SingularBasis,

    #[error("dimension {0} exceeds the exact shortest-vector cap of 6")]
    DimensionCap(usize),

    #[error("shortest vector not certified: enumeration radius {required} exceeds bound {bound}")]
    CertificationFailed { required: u64, bound: u64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error(
        "truncation precision {precision} too coarse for Q = {q}, v_max = {v_max}; \
         need error below {required}"
    )]
    TruncationInsufficient {
        precision: String,
        q: String,
        v_max: String,
        required: String,
    },

    #[error("enumeration too large: {0}")]
    EnumerationTooLarge(String),

    #[error("undecided comparison at {0} bits of precision")]
    Undecided(u64),

    #[error("sublevel set undecided on a set of measure {0} at maximal refinement")]
    Unresolved(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
