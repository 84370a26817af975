use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

/// Domain errors raised by the core algorithms.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("streamline has no points")]
    EmptyStreamline,
    #[error("tractography has no streamlines")]
    EmptyTractography,
    #[error("non-finite coordinate in streamline point {index}")]
    NonFinite { index: usize },
    #[error("voxel size components must be finite and > 0")]
    NonPositiveVoxelSize,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("{what} index {index} out of range (len {len})")]
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        len: usize,
    },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("exhaustive search needs {required} evaluations, budget is {budget}")]
    BudgetExceeded { required: u128, budget: u128 },
}
