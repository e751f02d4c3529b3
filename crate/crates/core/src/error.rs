use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (max deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("matrix is not an orthogonal projector: {0}")]
    NotProjector(String),

    #[error("invalid density matrix: {0}")]
    InvalidDensity(String),

    #[error("state vector is not normalised (norm {norm})")]
    NotNormalised { norm: f64 },

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error(
        "eigenvalue cluster unresolvable: gap {gap:.3e} between {lower} and {upper} \
         is neither below the grouping tolerance nor clearly above it"
    )]
    AmbiguousCluster { lower: f64, upper: f64, gap: f64 },

    #[error("zero vector at position {index}")]
    ZeroVector { index: usize },

    #[error("vector {index} is linearly dependent on the preceding ones")]
    DependentVectors { index: usize },

    #[error("operators {first} and {second} do not commute")]
    NonCommuting { first: usize, second: usize },

    #[error("empty operator list")]
    EmptyInput,

    #[error("atoms do not form an orthogonal resolution of the identity: {0}")]
    InvalidAtoms(String),

    #[error("operator does not belong to context `{context}`")]
    NotInAlgebra { context: String },

    #[error("context has {count} atoms, above the enumeration bound {bound}")]
    TooManyAtoms { count: usize, bound: usize },

    #[error("lattice element or character belongs to context `{found}`, expected `{expected}`")]
    ContextMismatch { expected: String, found: String },

    #[error("context `{lower}` is not included in `{upper}`")]
    NotIncluded { lower: String, upper: String },

    #[error("mixed dimensions in context list ({first} and {second})")]
    MixedDimensions { first: usize, second: usize },

    #[error("unknown context id `{0}`")]
    UnknownContext(String),

    #[error("invalid sieve on `{apex}`: {reason}")]
    InvalidSieve { apex: String, reason: String },

    #[error("sieve was built against a different poset version")]
    StaleSieve,

    #[error("assignment violates the matching law on `{lower}` <= `{upper}`")]
    MatchingLawViolated { lower: String, upper: String },

    #[error("assignment has {found} stages, the base has {expected}")]
    AssignmentLength { expected: usize, found: usize },

    #[error("mask {mask:#x} out of range for a context with {atoms} atoms")]
    MaskOutOfRange { mask: u32, atoms: usize },

    #[error("probability threshold r = {0} outside (0, 1]")]
    ThresholdOutOfRange(f64),

    #[error("value assigned at `{stage}` is not a sieve: {reason}")]
    NotASieve { stage: String, reason: String },

    #[error("{value} is not an eigenvalue of the anchor operator")]
    NotInSpectrum { value: f64 },

    #[error("coarse-graining paths disagree: direct {direct:#x}, infimum {infimum:#x}")]
    DualPathDisagreement { direct: u32, infimum: u32 },

    #[error("fixture rejected: {0}")]
    Fixture(String),

    #[error("{0}")]
    Input(String),
}
