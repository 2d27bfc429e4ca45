use thiserror::Error;

/// Errors raised by the numerical kernel.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("division by a quaternion of norm {norm:e}")]
    ZeroDivision { norm: f64 },

    #[error("expected a unit quantity, got norm {norm}")]
    NotUnit { norm: f64 },

    #[error("frame legs are not orthonormal (inner product {inner:e})")]
    NotOrthonormal { inner: f64 },

    #[error("frame (i, j, ij) is not co-oriented with (e1, e2, e3) (determinant {det})")]
    NotCoOriented { det: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("series expansion centers differ")]
    CenterMismatch,

    #[error("multi-index {alpha:?} exceeds the per-variable degree bound {max_deg}")]
    DegreeOutOfBounds { alpha: Vec<u32>, max_deg: u32 },

    #[error("operation is only defined for {supported} variable(s), got {found}")]
    ArityUnsupported { supported: usize, found: usize },

    #[error("constant term has norm {norm:e}, too small to invert")]
    NonInvertibleConstantTerm { norm: f64 },

    #[error("point lies outside the domain: {0}")]
    OutOfDomain(String),

    #[error("Cauchy kernel pole hit (distance {distance:e})")]
    PoleHit { distance: f64 },

    #[error("bundle points live over different frames")]
    FrameMismatch,

    #[error("operation requires unit-ball domains centered at 0")]
    DomainUnsupported,

    #[error("coefficient {alpha:?} leaves the complex slice of the frame (residual {residual:e})")]
    NotInSlice { alpha: Vec<u32>, residual: f64 },

    #[error("slot {slot} out of range for {n} variable(s)")]
    SlotOutOfRange { slot: usize, n: usize },

    #[error("invalid input: {0}")]
    Schema(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
