use thiserror::Error;

/// Crate-wide error type. Variants mirror the failure surface of the public
/// operations; functions that can legitimately return "no solution" as a
/// value (e.g. linear solves) use `Option` instead.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("duplicate element label `{0}`")]
    DuplicateLabel(String),
    #[error("unknown element label `{0}`")]
    UnknownLabel(String),
    #[error("relation is not antisymmetric: `{0}` and `{1}` lie on a cycle")]
    NotAntisymmetric(String, String),
    #[error("enumeration bound exceeded: {0}")]
    BoundExceeded(String),
    #[error("not a down-set: {0}")]
    NotDownClosed(String),
    #[error("not join-irreducible: {0}")]
    NotJoinIrreducible(String),
    #[error("not a convex set: {0}")]
    NotConvex(String),
    #[error("not a differential: {0}")]
    NotADifferential(String),
    #[error("not a chain map: {0}")]
    NotAChainMap(String),
    #[error("down-sets are not nested: {0}")]
    NotNested(String),
    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),
    #[error("search budget exceeded")]
    BudgetExceeded,
    #[error("precondition failed: {0}")]
    PreconditionFailed(String),
    #[error("homology ladder does not commute: {0}")]
    LadderNotCommuting(String),
    #[error("maps disagree on the overlap: {0}")]
    AgreementFailure(String),
    #[error("inconsistent Cartan-Eilenberg isomorphism data: {0}")]
    CEIsoInconsistent(String),
    #[error("not invertible: {0}")]
    NotInvertible(String),
    #[error("field coefficients required: {0}")]
    NotAField(String),
    #[error("gradings do not match: {0}")]
    GradingMismatch(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("invariant `{invariant}` violated: {detail}")]
    Validation { invariant: String, detail: String },
    #[error("{0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }

    pub fn validation(invariant: impl Into<String>, detail: impl Into<String>) -> Self {
        Error::Validation { invariant: invariant.into(), detail: detail.into() }
    }
}
