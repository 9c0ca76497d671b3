use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("{0} is not a prime power")]
    NotPrimePower(u64),
    #[error("field of order {0} exceeds the 2^20 table bound")]
    FieldTooLarge(u64),
    #[error("extension degree must be at least 1")]
    ZeroDegree,
    #[error("modulus is not a monic irreducible polynomial of degree {0}")]
    BadModulus(u32),
    #[error("integer {0} does not encode an element of the field")]
    NotAnElement(i64),
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("division by zero")]
    DivisionByZero,

    #[error("system has no nonzero rows")]
    EmptySystem,
    #[error("system rows have different lengths")]
    RaggedRows,
    #[error("column index {index} out of range for {k} columns")]
    BadIndex { index: usize, k: usize },
    #[error("too many row combinations to enumerate: {0}")]
    TooManyCombinations(u64),
    #[error("too many columns for subset enumeration: {0}")]
    TooManyColumns(usize),
    #[error("system is degenerate (induces x_i = x_j)")]
    DegenerateSystem,
    #[error("system too large for classification: {m} rows, {k} columns")]
    SystemTooLarge { m: usize, k: usize },

    #[error("linear form has no nonzero coefficient")]
    ZeroForm,
    #[error("expected {expected} nonzero coefficients, got {actual}")]
    BadArity { expected: usize, actual: usize },
    #[error("search budget exceeded after {0} steps")]
    SearchBudgetExceeded(u64),

    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),
    #[error("identity failed: {0}")]
    IdentityViolated(String),
    #[error("retries exhausted after {0} attempts")]
    RetriesExhausted(u32),
    #[error("space too large: {0} points")]
    TooLarge(u64),
    #[error("internal invariant violated: {0}")]
    Invariant(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
