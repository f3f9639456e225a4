use thiserror::Error;

use crate::tiling::DimName;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("unknown dimension `{0}`")]
    UnknownDim(DimName),
    #[error("duplicate dimension `{0}`")]
    DuplicateDim(DimName),
    #[error("dimension mismatch: expected ({expected}), got ({actual})")]
    DimMismatch { expected: String, actual: String },
    #[error("too many dimensions: {0} (at most {max})", max = crate::tiling::MAX_DIMS)]
    TooManyDims(usize),
    #[error("extent of `{dim}` must be positive")]
    EmptyExtent { dim: DimName },
    #[error(
        "{what}: {size} is not divisible by {by} along `{dim}`; \
         inputs with non-divisible dimensions must be zero-padded"
    )]
    NotDivisible {
        what: &'static str,
        dim: DimName,
        size: usize,
        by: usize,
    },
    #[error(
        "cannot spread {subtiles} subtiles evenly over {count} entities; \
         pad the problem so the subtile count is a multiple of the entity count"
    )]
    UnevenParallelisation { subtiles: usize, count: usize },
    #[error("entity index {index} out of range for {count} entities")]
    EntityIndex { index: usize, count: usize },
    #[error("tile [{lo}, {hi}) along `{dim}` exceeds the logical extent {extent}")]
    OutOfBounds {
        dim: DimName,
        lo: isize,
        hi: isize,
        extent: usize,
    },
    #[error("layout error: {0}")]
    Layout(String),
    #[error("element type mismatch: layout holds {layout}, access uses {access}")]
    ElementType {
        layout: crate::element::ElemType,
        access: crate::element::ElemType,
    },
    #[error("refusing to store nonzero value at off-diagonal position ({row}, {col}) through a diagonal layout")]
    OffDiagonalStore { row: usize, col: usize },
    #[error("value count {actual} does not match tile element count {expected}")]
    ValueCount { expected: usize, actual: usize },
    #[error("buffer `{name}` holds {actual} scalars, its layout requires {expected}")]
    BufferSize {
        name: &'static str,
        expected: usize,
        actual: usize,
    },
    #[error("fragment shape mismatch: {0}")]
    FragmentShape(String),
    #[error("invalid configuration field `{field}`: {reason}")]
    Config { field: &'static str, reason: String },
    #[error("unsupported element type combination {requested}; supported: {supported}")]
    UnsupportedTypes { requested: String, supported: String },
    #[error("bias vector has length {actual}, expected {expected}")]
    BiasLength { expected: usize, actual: usize },
}

impl Error {
    pub(crate) fn config(field: &'static str, reason: impl Into<String>) -> Self {
        Error::Config {
            field,
            reason: reason.into(),
        }
    }
}
