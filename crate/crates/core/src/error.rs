use thiserror::Error;

/// Every failure mode of the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("polynomial is not monic with integer coefficients of degree >= 2")]
    BadPolynomial,
    #[error("polynomial has only {found} real roots out of {degree}")]
    NotTotallyReal { degree: usize, found: usize },
    #[error("polynomial has a repeated root")]
    RepeatedRoot,
    #[error("polynomial is reducible: integer root {0}")]
    Reducible(String),
    #[error("irreducibility of degree {0} cannot be checked without `assume_irreducible`")]
    IrreducibilityUnchecked(usize),
    #[error("element has {found} coordinates, field has degree {degree}")]
    DimensionMismatch { degree: usize, found: usize },
    #[error("working precision exhausted while evaluating an embedding")]
    PrecisionExhausted,
    #[error("the zero element has no norm")]
    ZeroElement,
    #[error("element has norm {0}, not a unit")]
    NotAUnit(String),
    #[error("element has non-integral power-basis coordinates")]
    NonIntegralElement,
    #[error("log vectors span rank {rank} < {needed}")]
    DegenerateSpan { rank: usize, needed: usize },
    #[error("generator set is not commensurable with a lattice")]
    NonLatticeGenerators,
    #[error("basis matrix is singular")]
    SingularBasis,
    #[error("module basis is singular")]
    SingularModule,
    #[error("vector does not sum to zero (sum = {0})")]
    NotTraceZero(f64),
    #[error("enumeration budget exceeded; certified bounds {lower:?} <= lambda <= {upper:?}")]
    EnumerationBudgetExceeded { lower: Vec<f64>, upper: Vec<f64> },
    #[error("requested minima in dimension {0}; supported up to 5")]
    DimensionTooLarge(usize),
    #[error("leading minor {index} is {value:e}, factorization does not exist")]
    SingularMinor { index: usize, value: f64 },
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("exponents must be nonnegative and sorted ascending")]
    BadHeckeType,
    #[error("neighbor budget exceeded: {needed} > {budget}")]
    NeighborBudgetExceeded { needed: u128, budget: u128 },
    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error("empty measure")]
    EmptyMeasure,
    #[error("rejection sampler stalled (acceptance rate {0:e})")]
    RejectionStall(f64),
    #[error("closing data does not reproduce the endpoint (error {0:e})")]
    ClosingMismatch(f64),
    #[error("box vector is not positive in the simple-root order")]
    NotPositiveBox,
    #[error("no closing element found: {0}")]
    NotFound(String),
    #[error("p = {p} is not congruent to 1 mod {modulus}")]
    BadCongruence { p: u64, modulus: u64 },
    #[error("p = {p} is below the configured minimum {min}")]
    PrimeTooSmall { p: u64, min: u64 },
    #[error("Hensel lifting failed for p = {0}")]
    HenselFailure(u64),
    #[error("root certification failed: {0}")]
    RootCertificationFailure(String),
    #[error("nodes too close: gap {gap} < {needed}")]
    NodesTooClose { gap: i64, needed: f64 },
    #[error("prime ladder exhausted above {0}")]
    PrimeLadderExhausted(f64),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("serialization: {0}")]
    Serde(String),
    #[error("io: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Serde(e.to_string())
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
