use thiserror::Error;

/// Errors raised by the number-field kernels, the two sides of the identity
/// and the verification harness.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{what} = {value} is not squarefree")]
    NotSquarefree { what: &'static str, value: i64 },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("discriminants {disc_k0} and {disc_f} share a common factor")]
    CoprimalityViolated { disc_k0: i64, disc_f: i64 },
    #[error("K/F is unramified at every finite prime")]
    NoFiniteRamification,
    #[error("relative discriminant has even norm (dyadic ramification is unsupported)")]
    DyadicRamification,
    #[error("ideal {0} is not principal within the generator search bound")]
    NonPrincipal(String),
    #[error("no unit multiplier reaches the required sign pattern")]
    SignPatternUnreachable,
    #[error("{n} is not a quadratic residue modulo {p}")]
    NotAResidue { n: String, p: u64 },
    #[error("element is zero")]
    ZeroElement,
    #[error("element is not a unit at the prime over {p}")]
    NotAUnit { p: u64 },
    #[error("residue characteristic 2 is not supported by the tame symbol")]
    EvenResidueChar,
    #[error("prime over {p} splits in K")]
    SplitPrime { p: u64 },
    #[error("side condition failed: {0}")]
    ConditionFailed(String),
    #[error("argument must be positive, got {0}")]
    NonpositiveArgument(f64),
    #[error("Diff(alpha, c) has {0} places; exactly one is required")]
    MultiDiff(usize),
    #[error("ideal is not integral")]
    NonIntegral,
    #[error("{p} does not name a prime of F with branch {branch}")]
    UnknownPrime { p: u64, branch: u8 },
    #[error("precision {k} is too small (need at least {need})")]
    InsufficientPrecision { k: u32, need: u32 },
    #[error("integer {0} could not be factored")]
    Factorization(String),
}

pub type Result<T> = std::result::Result<T, Error>;
