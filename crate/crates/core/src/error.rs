use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SsrError {
    #[error("state has vanishing norm")]
    ZeroState,
    #[error("no admissible block for n_total = {n_total}")]
    EmptySector { n_total: usize },
    #[error("sector space must have positive total dimension")]
    EmptySpace,
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("state is not normalized (norm^2 = {0})")]
    NotNormalized(f64),
    #[error("invalid density operator: {0}")]
    InvalidDensity(String),
    #[error("POVM is not complete (residual {0:e})")]
    Incomplete(f64),
    #[error("vector totals differ: {0} vs {1}")]
    TotalMismatch(f64, f64),
    #[error("target is not reachable from source by SSR-constrained LOCC")]
    NotConvertible,
    #[error("outcome has zero probability")]
    ZeroProbability,
    #[error("parameter out of domain: {0}")]
    Domain(String),
    #[error("typical set is empty")]
    EmptyTypicalSet,
    #[error("sector rank {rank} exceeds ensemble size {k}")]
    RankExceedsK { rank: usize, k: usize },
    #[error("projection onto sector {0} vanishes")]
    ZeroProjection(usize),
    #[error("malformed input: {0}")]
    Format(String),
}

impl SsrError {
    /// Stable machine-readable code used by the command-line front end.
    pub fn code(&self) -> &'static str {
        match self {
            SsrError::ZeroState => "ZeroState",
            SsrError::EmptySector { .. } => "EmptySector",
            SsrError::EmptySpace => "EmptySpace",
            SsrError::Shape(_) => "Shape",
            SsrError::NotNormalized(_) => "NotNormalized",
            SsrError::InvalidDensity(_) => "InvalidDensity",
            SsrError::Incomplete(_) => "Incomplete",
            SsrError::TotalMismatch(..) => "TotalMismatch",
            SsrError::NotConvertible => "NotConvertible",
            SsrError::ZeroProbability => "ZeroProbability",
            SsrError::Domain(_) => "DomainError",
            SsrError::EmptyTypicalSet => "EmptyTypicalSet",
            SsrError::RankExceedsK { .. } => "RankExceedsK",
            SsrError::ZeroProjection(_) => "ZeroProjection",
            SsrError::Format(_) => "Format",
        }
    }
}

pub type Result<T> = std::result::Result<T, SsrError>;
