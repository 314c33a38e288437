use thiserror::Error;

/// Errors shared across the enumeration and transform layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("unsupported field: m = {0} (supported: 2, 3, 5, 13, or degree 1)")]
    UnsupportedField(i64),
    #[error("norm-Euclidean division stuck (internal error, field should be Euclidean)")]
    DivisionStuck,
    #[error("per-embedding enumeration bound {0:.3e} exceeds cap {1:.3e}")]
    OverflowGuard(f64, f64),
    #[error("naive oracle cost guard tripped: {0} candidates")]
    CostGuard(u64),
    #[error("degenerate direction in t-interval solve")]
    DegenerateDirection,
    #[error("invalid strip: E and Q must both be nonempty and 0 <= A < B")]
    InvalidStrip,
    #[error("invalid bump: edge width violates Y <= (V-U)/2 (or Y <= V/2 when U = 0)")]
    InvalidBump,
    #[error("quadrature failed to reach tolerance {0:.1e} (estimate {1:.1e})")]
    QuadratureFail(f64, f64),
    #[error("hypergeometric series failed to converge in {0} terms")]
    SeriesDiverged(usize),
    #[error("spectral parameter tau = {0} outside (0, 1/2]")]
    InvalidTau(f64),
    #[error("reduction iteration cap reached")]
    IterationCap,
    #[error("empty experiment grid")]
    EmptyGrid,
    #[error("degenerate regression fit: all excesses zero")]
    DegenerateFit,
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
