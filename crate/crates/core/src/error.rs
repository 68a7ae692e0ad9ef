use thiserror::Error;

use crate::product::DefectTriple;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Register length outside the supported range.
    #[error("register length {l} out of range [{min}, {max}]")]
    RegisterLength { l: usize, min: usize, max: usize },

    #[error("expected {expected} amplitudes for l = {l}, found {found}")]
    AmplitudeCount { l: usize, expected: usize, found: usize },

    #[error("amplitude at index {index} is not finite")]
    NonFinite { index: usize },

    #[error("simplex bits {bits:#b} do not fit a register of length {l}")]
    SimplexOutOfRange { bits: usize, l: usize },

    #[error("skeleton dimension {n} out of range [-1, {max}]")]
    DimensionOutOfRange { n: i32, max: i32 },

    #[error("frame has {found} unitaries, register has {expected} bits")]
    FrameShape { expected: usize, found: usize },

    #[error("matrix is not unitary (deviation {deviation:.3e})")]
    NotUnitary { deviation: f64 },

    #[error("bit index {bit} out of range for register of length {l}")]
    BitOutOfRange { bit: usize, l: usize },

    #[error("degenerate input: state has zero norm")]
    ZeroState,

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("state is not a product (worst exchangeability defect {} at {})", .0.magnitude, .0)]
    NotProduct(DefectTriple),

    #[error("leading vector undefined: |h^0| = {magnitude:.3e} is below the zero tolerance")]
    LeadingUndefined { magnitude: f64 },

    #[error("{what} requires l {constraint}, got l = {l}")]
    Shape { what: &'static str, constraint: &'static str, l: usize },

    #[error("state file: {0}")]
    Format(String),
}
