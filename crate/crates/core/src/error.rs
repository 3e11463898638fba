use thiserror::Error;

/// Failure modes shared by every module.
///
/// The variants are grouped so that a front end can map them onto a small set
/// of exit statuses: malformed input, unmet mathematical preconditions and
/// numerical breakdowns.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    /// Inconsistent sizes or parameters supplied by the caller.
    #[error("parameter error: {0}")]
    Parameter(String),

    /// An input violated the documented contract of an operation.
    #[error("contract violation: {0}")]
    Contract(String),

    /// A form or matrix that must be nondegenerate is (numerically) singular.
    #[error("degenerate: {0}")]
    Degenerate(String),

    /// A document did not match the expected JSON schema.
    #[error("parse error at {pointer}: {message}")]
    Parse { pointer: String, message: String },

    /// A matrix failed a group-membership check.
    #[error("validation error: {0}")]
    Validation(String),

    /// Size beyond the supported desk-scale range.
    #[error("unsupported size: {0}")]
    UnsupportedSize(String),

    /// Rank decision too close to the threshold to be trusted.
    #[error("indeterminate rank decision: singular value {value:.3e} within 10x of threshold {threshold:.3e}")]
    Indeterminate { value: f64, threshold: f64 },

    /// The representation is not semi-simple.
    #[error("not semi-simple: {0}")]
    SemiSimplicity(String),

    /// The representation does not satisfy a precondition (irreducible, phi-fixed, ...).
    #[error("not applicable: {0}")]
    NotApplicable(String),

    /// Eigenvalue pairing failed in a structured eigendecomposition.
    #[error("pairing error: {0}")]
    Pairing(String),

    /// Every attempted splitting matrix was too ill-conditioned.
    #[error("conditioning error: {0}")]
    Conditioning(String),

    /// A constructed certificate or factor did not meet its residual bound.
    #[error("numerical failure in branch `{branch}`: {message}")]
    Numerical { branch: String, message: String },
}

impl Error {
    pub(crate) fn numerical(branch: &str, message: impl Into<String>) -> Self {
        Error::Numerical {
            branch: branch.to_string(),
            message: message.into(),
        }
    }

    /// Short machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Parameter(_) => "parameter",
            Error::Contract(_) => "contract",
            Error::Degenerate(_) => "degenerate",
            Error::Parse { .. } => "parse",
            Error::Validation(_) => "validation",
            Error::UnsupportedSize(_) => "unsupported-size",
            Error::Indeterminate { .. } => "indeterminate",
            Error::SemiSimplicity(_) => "semi-simplicity",
            Error::NotApplicable(_) => "not-applicable",
            Error::Pairing(_) => "pairing",
            Error::Conditioning(_) => "conditioning",
            Error::Numerical { .. } => "numerical",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
