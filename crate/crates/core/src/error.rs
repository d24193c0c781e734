use thiserror::Error;

/// Errors surfaced by the library.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("modulus {q} exceeds the configured table bound {bound}")]
    TooLarge { q: u64, bound: u64 },
    #[error("the angle of the trivial character is undefined")]
    TrivialCharacter,
    #[error("Gauss sum has modulus {modulus}, not 1; numeric fault")]
    NonUnitGaussSum { modulus: f64 },
    #[error("operands live over different field contexts ({0} vs {1})")]
    ContextMismatch(u64, u64),
    #[error("both character multisets are empty")]
    EmptyData,
    #[error("{n} does not divide q - 1 = {ord}")]
    DivisibilityViolation { n: i64, ord: u64 },
    #[error("prime {q} is inadmissible for this classification: {reason}")]
    InadmissiblePrime { q: u64, reason: String },
    #[error("domain error: {0}")]
    DomainError(String),
    #[error("mollifier polynomial must satisfy P(0)=0 and P(1)=1")]
    BadPolynomial,
    #[error("tuple (a,b,k)=({a},{b},{k}) is excluded from the decomposition cross-check")]
    ExcludedTuple { a: i64, b: i64, k: i64 },
    #[error("minorant exceeds the interval indicator at angle {theta}")]
    BadMinorant { theta: f64 },
    #[error("bad shape: {0}")]
    BadShape(String),
    #[error("dual computations disagree by {0}; implementation fault")]
    MismatchedIdentity(f64),
    #[error("kernel is not gallant and the additive-character hypotheses fail")]
    NotGallantKernel,
}
