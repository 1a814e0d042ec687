use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: String,
        found: String,
    },
    #[error("{what} is not symmetric (relative asymmetry {asymmetry:.3e})")]
    NotSymmetric { what: &'static str, asymmetry: f64 },
    #[error("{what} is not positive semi-definite (smallest eigenvalue {min_eigenvalue:.3e})")]
    NotPositiveSemiDefinite { what: &'static str, min_eigenvalue: f64 },
    #[error("{what} is not positive definite")]
    NotPositiveDefinite { what: &'static str },
    #[error("{what} is rank deficient (smallest/largest singular value {ratio:.3e})")]
    RankDeficient { what: &'static str, ratio: f64 },
    #[error("shrinkage constant g must be positive and finite, got {0}")]
    InvalidShrinkage(f64),
    #[error("noise variance must be positive and finite, got {0}")]
    InvalidVariance(f64),
    #[error("expected a {expected} model, got a {found} model")]
    ModelKind {
        expected: &'static str,
        found: &'static str,
    },
    #[error("compared models have different noise variances; use the general moment path")]
    UnequalVariances,
    #[error("compared models use different shrinkage constants ({0} vs {1})")]
    UnequalShrinkage(f64, f64),
    #[error("compared models use different multivariate kappa exponent conventions")]
    UnequalKappaExponent,
    #[error("data-generating process does not fit this path: {0}")]
    IncompatibleDgp(&'static str),
    #[error("invalid prior: {0}")]
    InvalidPrior(String),
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("unknown label `{0}`")]
    UnknownLabel(String),
    #[error("duplicate label `{0}`")]
    DuplicateLabel(String),
    #[error("partition does not cover label `{0}`")]
    IncompletePartition(String),
    #[error("model set needs at least two models, got {0}")]
    TooFewModels(usize),
    #[error("invalid resampling plan: {0}")]
    InvalidPlan(String),
    #[error("invalid threshold {0}; thresholds must lie in (0.5, 1)")]
    InvalidThreshold(f64),
    #[error("empty input: {0}")]
    EmptyInput(&'static str),
    #[error("{failed} of {total} resamples produced rank-deficient designs (limit 1%)")]
    TooManyFailures { failed: usize, total: usize },
    #[error("need at least {min} simulations, got {got}")]
    TooFewSimulations { min: usize, got: usize },
}

impl Error {
    pub(crate) fn dims(context: &'static str, expected: impl ToString, found: impl ToString) -> Self {
        Error::DimensionMismatch {
            context,
            expected: expected.to_string(),
            found: found.to_string(),
        }
    }
}
