use thiserror::Error;

/// Errors raised by the field, norm, and operator layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("grid {nx}x{nt} cannot represent truncation radius {radius} (need nx >= {need_nx}, nt >= {need_nt})")]
    GridTooSmall {
        nx: usize,
        nt: usize,
        radius: usize,
        need_nx: usize,
        need_nt: usize,
    },
    #[error("grid sizes must be powers of two, got {nx}x{nt}")]
    GridNotPowerOfTwo { nx: usize, nt: usize },
    #[error("coefficients are not conjugate-symmetric (defect {defect:e})")]
    RealnessViolation { defect: f64 },
    #[error("mode ({j},{k}) lies outside truncation radius {radius}")]
    OutsideTruncation { j: i64, k: i64, radius: usize },
    #[error("nonzero amplitude {amplitude:e} on characteristic mode ({j},{k})")]
    CharacteristicData { j: i64, k: i64, amplitude: f64 },
    #[error("{quantity}: {reason}")]
    Domain {
        quantity: &'static str,
        reason: String,
    },
    #[error("malformed coefficient table: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn domain(quantity: &'static str, reason: impl Into<String>) -> Self {
        Error::Domain {
            quantity,
            reason: reason.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
