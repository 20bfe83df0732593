use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("decay exponent must satisfy s > 1, got {0}")]
    InvalidExponent(f64),

    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("entry ({n}, {m}) lies beyond the truncation size {size} and no envelope covers it")]
    IndexBeyondTruncation { n: usize, m: usize, size: usize },

    #[error("index {index} is out of range 1..={size}")]
    IndexOutOfRange { index: usize, size: usize },

    #[error("invalid Gram system: {0}")]
    InvalidSystem(String),

    #[error("certification over all of N requires a decay envelope")]
    MissingEnvelope,

    #[error("certification over all of N requires a global diagonal floor")]
    MissingDiagFloor,

    #[error("index {index} is not covered by any class")]
    CoverageGap { index: usize },

    #[error("index {index} appears in more than one class")]
    Overlap { index: usize },

    #[error("invalid paving: {0}")]
    InvalidPaving(String),

    #[error("window of length {len} does not fit in period {period}")]
    WindowTooLong { len: usize, period: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("no paving exists: diagonal entry {diag} at index {index} is below epsilon {epsilon}")]
    Infeasible { index: usize, diag: f64, epsilon: f64 },

    #[error("exhaustive search is capped at size {cap}, system has size {size}")]
    SizeCap { size: usize, cap: usize },

    #[error("tolerance {0} is below what double precision can certify here")]
    ToleranceTooTight(f64),
}

pub(crate) fn check_exponent(s: f64) -> Result<()> {
    if s.is_finite() && s > 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidExponent(s))
    }
}
