use thiserror::Error;

/// Every failure an operation can report.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("multiplication is not associative on basis triple ({0}, {1}, {2})")]
    NotAssociative(usize, usize, usize),
    #[error("multiplication is not commutative on basis pair ({0}, {1})")]
    NotCommutative(usize, usize),
    #[error("unit fails on basis element {0}")]
    BadUnit(usize),
    #[error("additive order mismatch at ({0}, {1}, {2}): {3}")]
    OrderMismatch(usize, usize, usize, String),
    #[error("size limit exceeded: {what} has order {order} > {limit}")]
    SizeLimitExceeded { what: String, order: u128, limit: u64 },
    #[error("submodule is not stable: {0}")]
    NotStable(String),
    #[error("ring mismatch: {0}")]
    RingMismatch(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("plugin '{name}' failed: {reason}")]
    PluginFailure { name: String, reason: String },
    #[error("ring is not local")]
    NotLocal,
    #[error("unsupported carrier: {0}")]
    UnsupportedCarrier(String),
    #[error("kernel of pseudorepresentation is not a two-sided ideal: {0}")]
    KernelNotIdeal(String),
    #[error("induced determinant is not well defined: {0}")]
    InducedDNotWellDefined(String),
    #[error("condition kernel is not two-sided: {0}")]
    KernelNotTwoSided(String),
    #[error("module is not faithful: {0}")]
    NotFaithful(String),
    #[error("module/algebra condition verdicts disagree: {0}")]
    TheoremViolation(String),
    #[error("ASSO/COM violation at {0}")]
    AssoComViolation(String),
    #[error("residual characters do not match: {0}")]
    ResidualMismatch(String),
    #[error("Peirce blocks disagree: {0}")]
    PeirceMismatch(String),
    #[error("pseudorepresentation is not reducible")]
    NotReducible,
    #[error("classes with condition do not form a submodule: {0}")]
    NotASubmodule(String),
    #[error("constituent not in condition: {0}")]
    ConstituentNotInC(String),
    #[error("bridge map is not bijective: {0}")]
    BridgeNotBijective(String),
    #[error("parse error at line {line}, column {column}: {msg}")]
    ParseError { line: usize, column: usize, msg: String },
    #[error("undeclared reference '{0}'")]
    ReferenceError(String),
    #[error("i/o: {0}")]
    Io(String),
    #[error("{context}: {source}")]
    Context { context: String, source: Box<Error> },
}

impl Error {
    /// Process exit code for this error class.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Context { source, .. } => source.exit_code(),
            Error::ParseError { .. } | Error::ReferenceError(_) => 2,
            Error::SizeLimitExceeded { .. } => 4,
            _ => 3,
        }
    }
}

impl Error {
    pub fn context(self, context: impl Into<String>) -> Error {
        Error::Context { context: context.into(), source: Box::new(self) }
    }

    /// The innermost error under any context wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::Context { source, .. } => source.root(),
            e => e,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
