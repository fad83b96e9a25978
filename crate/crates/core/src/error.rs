use thiserror::Error;

/// Coarse classification used by front ends to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Parse,
    Validation,
    Numeric,
    Precondition,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("validation error: {0}")]
    Validation(String),

    #[error("invalid restricted root pattern: {0}")]
    InvalidPattern(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("division by zero: {0}")]
    DivisionByZero(String),

    #[error("series diverges: Re(s) = {re_s} is not beyond the abscissa {abscissa}")]
    Divergence { re_s: f64, abscissa: f64 },

    #[error("missing holonomy trace `{tag}` on class {class}")]
    MissingTrace { tag: String, class: String },

    #[error("primitive {0} carries traces only; eigenvalues are needed to form powers")]
    MissingEigenvalues(String),

    #[error("pole of order {order} at s = {point}")]
    Pole { point: String, order: i64 },

    #[error("shift entry (c={c}, i={i}) has s = {s} but nonzero order {order}")]
    ZeroShift { c: u32, i: u32, s: f64, order: i64 },

    #[error("phase step {step:.4} rad exceeds pi/2 at s = {at}; refine the grid")]
    Precision { step: f64, at: String },

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    #[error("numerical instability: {0}")]
    Instability(String),

    #[error("ill-conditioned fit: alpha = {alpha}, residual rms = {residual}")]
    IllConditionedFit { alpha: f64, residual: f64 },

    #[error("Novikov-Shubin estimate {0} is not positive")]
    NonpositiveAlpha(f64),

    #[error("density exceeds its declared growth bound: {0}")]
    TailBound(String),

    #[error("precondition failed: {0}")]
    Precondition(String),
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Io { .. } | Error::Parse(_) => ErrorKind::Parse,
            Error::Validation(_) | Error::InvalidPattern(_) => ErrorKind::Validation,
            Error::Divergence { .. }
            | Error::Precondition(_)
            | Error::Domain(_)
            | Error::MissingTrace { .. }
            | Error::MissingEigenvalues(_) => ErrorKind::Precondition,
            Error::DivisionByZero(_)
            | Error::Pole { .. }
            | Error::ZeroShift { .. }
            | Error::Precision { .. }
            | Error::Quadrature(_)
            | Error::Instability(_)
            | Error::IllConditionedFit { .. }
            | Error::NonpositiveAlpha(_)
            | Error::TailBound(_) => ErrorKind::Numeric,
        }
    }

    /// Short machine-readable tag.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Io { .. } => "io",
            Error::Parse(_) => "parse",
            Error::Validation(_) => "validation",
            Error::InvalidPattern(_) => "invalid_pattern",
            Error::Domain(_) => "domain",
            Error::DivisionByZero(_) => "division_by_zero",
            Error::Divergence { .. } => "divergence",
            Error::MissingTrace { .. } => "missing_trace",
            Error::MissingEigenvalues(_) => "missing_eigenvalues",
            Error::Pole { .. } => "pole",
            Error::ZeroShift { .. } => "zero_shift",
            Error::Precision { .. } => "precision",
            Error::Quadrature(_) => "quadrature",
            Error::Instability(_) => "instability",
            Error::IllConditionedFit { .. } => "ill_conditioned_fit",
            Error::NonpositiveAlpha(_) => "nonpositive_alpha",
            Error::TailBound(_) => "tail_bound",
            Error::Precondition(_) => "precondition",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
