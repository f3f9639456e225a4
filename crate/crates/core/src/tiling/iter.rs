use super::{unravel, Coord, Tile, MAX_DIMS};
use crate::error::{Error, Result};

/// Iterates over the subtiles one entity handles.
///
/// The parent is cut into a grid of equally sized subtiles. Grid cells are
/// ranked column-major, and iteration `k` of entity `i` visits rank
/// `i + k·count`.
#[derive(Debug, Clone)]
pub struct TileIterator {
    parent: Tile,
    subtile: Coord,
    grid: [usize; MAX_DIMS],
    index: usize,
    count: usize,
    iteration: usize,
    iterations: usize,
    /// Grid cell of this entity's first subtile.
    first: [usize; MAX_DIMS],
}

impl TileIterator {
    pub fn parent(&self) -> &Tile {
        &self.parent
    }

    pub fn subtile_size(&self) -> &Coord {
        &self.subtile
    }

    pub fn index(&self) -> usize {
        self.index
    }

    pub fn count(&self) -> usize {
        self.count
    }

    /// Number of iterations already yielded.
    pub fn iteration(&self) -> usize {
        self.iteration
    }

    /// Total number of subtiles in the grid.
    pub fn grid_len(&self) -> usize {
        self.grid[..self.parent.rank()].iter().product()
    }

    #[allow(clippy::needless_range_loop)]
    fn tile_at(&self, iteration: usize) -> Tile {
        let rank = self.parent.rank();
        let mut cell = [0usize; MAX_DIMS];
        unravel(
            self.index + iteration * self.count,
            &self.grid[..rank],
            &mut cell[..rank],
        );
        let mut t = Tile {
            base: self.parent.base,
            offset: self.parent.offset,
            size: self.subtile,
        };
        for d in 0..rank {
            let s = self.subtile.vals[d];
            t.base.vals[d] += self.first[d] as isize * s;
            t.offset.vals[d] += (cell[d] as isize - self.first[d] as isize) * s;
        }
        t
    }
}

impl Iterator for TileIterator {
    type Item = Tile;

    fn next(&mut self) -> Option<Tile> {
        if self.iteration == self.iterations {
            return None;
        }
        let t = self.tile_at(self.iteration);
        self.iteration += 1;
        Some(t)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = self.iterations - self.iteration;
        (left, Some(left))
    }
}

impl ExactSizeIterator for TileIterator {}

/// Divides `parent` into subtiles of size `subtile` and returns the ones
/// entity `index` of `count` handles.
///
/// The subtile extents may name the parent's dimensions in any order. The
/// subtile count must be a multiple of `count` so every entity performs the
/// same number of iterations.
#[allow(clippy::needless_range_loop)]
pub fn parallelise(parent: &Tile, subtile: &Coord, index: usize, count: usize) -> Result<TileIterator> {
    let subtile = subtile.aligned_to(parent.dims())?;
    subtile.check_positive()?;
    let rank = parent.rank();
    let mut grid = [1usize; MAX_DIMS];
    for d in 0..rank {
        let p = parent.extent(d);
        let s = subtile.vals[d] as usize;
        if p % s != 0 {
            return Err(Error::NotDivisible {
                what: "subtile size",
                dim: parent.dims().as_slice()[d],
                size: p,
                by: s,
            });
        }
        grid[d] = p / s;
    }
    let subtiles: usize = grid[..rank].iter().product();
    if count == 0 || count > subtiles || subtiles % count != 0 {
        return Err(Error::UnevenParallelisation { subtiles, count });
    }
    if index >= count {
        return Err(Error::EntityIndex { index, count });
    }
    let mut first = [0usize; MAX_DIMS];
    unravel(index, &grid[..rank], &mut first[..rank]);
    Ok(TileIterator {
        parent: *parent,
        subtile,
        grid,
        index,
        count,
        iteration: 0,
        iterations: subtiles / count,
        first,
    })
}
