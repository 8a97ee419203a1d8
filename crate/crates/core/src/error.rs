use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Error, Debug)]
pub enum Error {
    #[error("p = {0} is not an odd prime")]
    BadPrime(u64),
    #[error("expected a unit, got {0}")]
    NonUnit(String),
    #[error("zero argument not allowed")]
    ZeroArgument,
    #[error("value {0} is not integral at p")]
    NotIntegral(String),
    #[error("matrix dimensions do not match: {0}")]
    SizeMismatch(String),
    #[error("rank mismatch: {0} vs {1}")]
    RankMismatch(usize, usize),
    #[error("singular form")]
    SingularForm,
    #[error("form is not nearly unimodular")]
    NotNearlyUnimodular,
    #[error("inputs were not decided isometric")]
    NotDecidedIsometric,
    #[error("matrix is not an idempotent of the order")]
    NotIdempotent,
    #[error("matrix is not contained in the order")]
    NotInOrder,
    #[error("element is not in Sym^x(E, tau)")]
    NotSymmetricUnit,
    #[error("lattice is not a two-sided module over the order")]
    IncompatibleLattice,
    #[error("unsupported descriptor: {0}")]
    UnsupportedDescriptor(String),
    #[error("seed matrix is not a residue isometry")]
    BadSeed,
    #[error("retries exhausted: {0}")]
    RetriesExhausted(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("invalid document: {0}")]
    InvalidDocument(String),
}
