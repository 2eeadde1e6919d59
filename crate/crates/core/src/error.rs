use thiserror::Error;

/// Errors reported by validation, construction and search routines.
///
/// Distance values inside messages are pre-formatted strings so the error
/// type stays independent of the scalar type parameter.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid rational literal {0:?} (expected `p` or `p/q`)")]
    InvalidRational(String),
    #[error("a space must contain at least one point")]
    NoPoints,
    #[error("duplicate point identifier {0:?}")]
    DuplicatePoint(String),
    #[error("distance pair ({0:?}, {1:?}) given more than once")]
    DuplicatePair(String, String),
    #[error("distance pair ({0:?}, {1:?}) missing")]
    MissingPair(String, String),
    #[error("self-distance entry for point {0:?}")]
    SelfPair(String),
    #[error("distance d({0:?}, {1:?}) = {2} is not positive")]
    NonPositiveDistance(String, String, String),
    #[error("strong triangle inequality fails: d({0:?}, {1:?}) = {3} > max(d({0:?}, {2:?}), d({2:?}, {1:?})) = {4}")]
    TriangleViolation(String, String, String, String, String),
    #[error("unknown point {0:?}")]
    UnknownPoint(String),
    #[error("unknown element {0:?}")]
    UnknownElement(String),
    #[error("open ball of radius 0 is empty")]
    EmptyBall,
    #[error("subset must be nonempty")]
    EmptySubset,
    #[error("ball is trivial (diameter 0); it has no sons")]
    TrivialBall,
    #[error("map is not injective at {0:?}")]
    NotInjective(String),
    #[error("map is not a partial isometry: d({0:?}, {1:?}) = {2} but d({3:?}, {4:?}) = {5}")]
    NotAnIsometry(String, String, String, String, String, String),
    #[error("map does not preserve the spectrum of {0:?}")]
    SpectrumMismatch(String),
    #[error("invalid degree function: {0}")]
    BadDegreeFunction(String),
    #[error("points belong to different degree functions")]
    MismatchedDegreeFunction,
    #[error("permutation at radius {0} is not a permutation of 0..{1}")]
    PermutationOutOfRange(String, usize),
    #[error("product space would have {size} points, above the bound {bound}")]
    ProductTooLarge { size: usize, bound: usize },
    #[error("condition (A) violated: nerve balls {0} and {1} are similar but not isometric")]
    ConditionAViolated(String, String),
    #[error("structure has {size} elements, above the brute-force bound {bound}")]
    TooLarge { size: usize, bound: usize },
    #[error("2-structure is not hereditary decomposable; it has no decomposition tree")]
    NotDecomposable,
    #[error("cantor depth {0} out of range 1..=12")]
    DepthOutOfRange(usize),
    #[error("value pool must be nonempty and strictly increasing")]
    BadPool,
    #[error("partition tree depth {depth} exceeds pool length {pool}")]
    PoolTooShallow { depth: usize, pool: usize },
    #[error("malformed space file: {0}")]
    Format(String),
}
