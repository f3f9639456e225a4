use std::fmt;
use std::sync::Arc;

use crate::tiling::{DimName, Tile};

/// Decides, for every block-level K iteration, whether it runs.
///
/// The argument is the absolute `(M, N, K)` tile of the block at that
/// iteration.
#[derive(Clone, Default)]
pub enum Predicate {
    #[default]
    Always,
    Never,
    /// Skip iterations whose A tile (`M × K`) misses the main diagonal.
    DiagonalA,
    /// Skip iterations whose B tile (`K × N`) misses the main diagonal.
    DiagonalB,
    Custom(Arc<dyn Fn(&Tile) -> bool + Send + Sync>),
}

fn range(tile: &Tile, dim: DimName) -> Option<(isize, isize)> {
    let i = tile.dims().position(dim)?;
    let lo = tile.start(i);
    Some((lo, lo + tile.extent(i) as isize))
}

fn intersects(tile: &Tile, x: DimName, y: DimName) -> bool {
    match (range(tile, x), range(tile, y)) {
        (Some((a0, a1)), Some((b0, b1))) => a0 < b1 && b0 < a1,
        _ => true,
    }
}

impl Predicate {
    pub fn custom(f: impl Fn(&Tile) -> bool + Send + Sync + 'static) -> Self {
        Predicate::Custom(Arc::new(f))
    }

    #[inline]
    pub fn evaluate(&self, block: &Tile) -> bool {
        match self {
            Predicate::Always => true,
            Predicate::Never => false,
            Predicate::DiagonalA => intersects(block, DimName::M, DimName::K),
            Predicate::DiagonalB => intersects(block, DimName::K, DimName::N),
            Predicate::Custom(f) => f(block),
        }
    }
}

impl fmt::Debug for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Predicate::Always => f.write_str("Always"),
            Predicate::Never => f.write_str("Never"),
            Predicate::DiagonalA => f.write_str("DiagonalA"),
            Predicate::DiagonalB => f.write_str("DiagonalB"),
            Predicate::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}
