//! Crate-wide error type. Diagnostics name the violated restriction
//! (R1/R2/R3) where one applies.

use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("syntax error at line {line}, column {col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },

    #[error("probability error: {0}")]
    Probability(String),

    #[error("R1 violation: {0}")]
    R1Violation(String),

    #[error("normalization failed (R1): {0}")]
    Normalize(String),

    #[error("variable `{0}` read before assignment")]
    UseBeforeDef(String),

    #[error("R2 violation: {0}")]
    NotFinite(String),

    #[error("R3 violation: goal depends on defective variables {{{}}}", .0.join(", "))]
    DefectiveDependency(Vec<String>),

    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),

    #[error("unsupported eigenvalue: irreducible characteristic factor {0}")]
    UnsupportedEigenvalue(String),

    #[error("closed form has a transient deeper than one step (zero eigenvalue of multiplicity > 1)")]
    TransientTooDeep,

    #[error("moments of {0} are not expressible in the exact coefficient field")]
    UnsupportedMoment(String),

    #[error("unbound parameter `{0}`")]
    UnboundParameter(String),

    #[error("linear system has no solution")]
    NoSolution,

    #[error("no finite limit: {0}")]
    Diverges(String),

    #[error("limit depends on unresolved parameter ranges: {0}")]
    ParamCondition(String),

    #[error("loop satisfies R1-R3; nothing to synthesize")]
    NotUnsolvable,

    #[error("{0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Stable machine-readable kind for CLI diagnostics.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Syntax { .. } => "SyntaxError",
            Error::Probability(_) => "ProbabilityError",
            Error::R1Violation(_) => "R1Violation",
            Error::Normalize(_) => "NormalizeError",
            Error::UseBeforeDef(_) => "UseBeforeDef",
            Error::NotFinite(_) => "NotFinite",
            Error::DefectiveDependency(_) => "DefectiveDependency",
            Error::ResourceLimit(_) => "ResourceLimit",
            Error::UnsupportedEigenvalue(_) => "UnsupportedEigenvalue",
            Error::TransientTooDeep => "TransientTooDeep",
            Error::UnsupportedMoment(_) => "UnsupportedMoment",
            Error::UnboundParameter(_) => "UnboundParameter",
            Error::NoSolution => "NoSolution",
            Error::Diverges(_) => "DivergesError",
            Error::ParamCondition(_) => "ParamCondition",
            Error::NotUnsolvable => "NotUnsolvable",
            Error::Invalid(_) => "InvalidInput",
        }
    }
}
