use thiserror::Error;

/// Errors raised by filter construction and filtering.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("half-width must be at least 1")]
    ZeroHalfWidth,
    #[error("half-width {h} exceeds the supported maximum {max}")]
    HalfWidthTooLarge { h: usize, max: usize },
    #[error("degree {d} exceeds the supported maximum {max}")]
    DegreeTooLarge { d: usize, max: usize },
    #[error("number of future observations q = {q} outside 0..={h}")]
    FutureSpanOutOfRange { q: usize, h: usize },
    #[error("underdetermined fit: {points} points cannot identify a degree {d} polynomial")]
    Underdetermined { points: usize, d: usize },
    #[error("kernel weights must be symmetric, nonnegative and not all zero")]
    InvalidKernel,
    #[error("singular moment matrix")]
    Singular,
    #[error("constraint matrix is rank deficient")]
    RankDeficient,
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("closed-form weights exist only for d <= 3 (got d = {0})")]
    ClosedFormDegree(usize),
    #[error("determinant route is restricted to d <= 6 (got d = {0})")]
    CramerDegree(usize),
    #[error("delta ratio must be nonnegative (got {0})")]
    InvalidDeltaRatio(f64),
    #[error("an infinite delta ratio requires the limit construction")]
    InfiniteDeltaRatio,
    #[error("the limit construction requires an infinite delta ratio (got {0})")]
    FiniteDeltaRatio(f64),
    #[error("Musgrave span M = {m} outside {min}..={max}")]
    MusgraveSpan { m: usize, min: usize, max: usize },
    #[error("R must be positive and finite (got {0})")]
    InvalidRatioR(f64),
    #[error("expected a symmetric filter")]
    NotSymmetric,
    #[error("frequency {0} outside [0, pi]")]
    FrequencyOutOfRange(f64),
    #[error("asymmetric filter span exceeds the symmetric filter span")]
    SpanMismatch,
    #[error("series too short: n = {n}, need at least {needed}")]
    SeriesTooShort { n: usize, needed: usize },
    #[error("window {start}..={end} exceeds series bounds 1..={n}")]
    WindowOutOfBounds { start: isize, end: isize, n: usize },
    #[error("non-finite observation at position {0}")]
    NonFinite(usize),
    #[error("label count {labels} does not match value count {values}")]
    LabelMismatch { labels: usize, values: usize },
    #[error("empty bandwidth range")]
    EmptyRange,
    #[error("empty delta grid")]
    EmptyGrid,
    #[error("center weight equals one; deletion residual undefined")]
    DegenerateLeverage,
}

impl Error {
    /// True for failures of the numerical machinery rather than of the inputs.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::Singular | Error::RankDeficient | Error::DegenerateLeverage
        )
    }

    /// True when the observations themselves are unusable.
    pub fn is_data(&self) -> bool {
        matches!(
            self,
            Error::SeriesTooShort { .. }
                | Error::WindowOutOfBounds { .. }
                | Error::NonFinite(_)
                | Error::LabelMismatch { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
