use crate::element::{Element, Real};
use crate::error::{Error, Result};
use crate::tiling::{unravel, Tile, MAX_DIMS};

/// Read access to physical scalars.
pub(crate) trait Source<R> {
    fn len(&self) -> usize;
    fn get(&self, i: usize) -> R;
    /// Contiguous view of `[start, start + len)`, when the source can lend one.
    fn run(&self, start: usize, len: usize) -> Option<&[R]>;
}

/// Write access to physical scalars.
pub(crate) trait Sink<R> {
    fn len(&self) -> usize;
    fn set(&mut self, i: usize, v: R);
    fn run_mut(&mut self, start: usize, len: usize) -> Option<&mut [R]>;
}

impl<R: Copy> Source<R> for [R] {
    fn len(&self) -> usize {
        <[R]>::len(self)
    }
    #[inline(always)]
    fn get(&self, i: usize) -> R {
        self[i]
    }
    #[inline(always)]
    fn run(&self, start: usize, len: usize) -> Option<&[R]> {
        Some(&self[start..start + len])
    }
}

impl<R: Copy> Sink<R> for [R] {
    fn len(&self) -> usize {
        <[R]>::len(self)
    }
    #[inline(always)]
    fn set(&mut self, i: usize, v: R) {
        self[i] = v;
    }
    #[inline(always)]
    fn run_mut(&mut self, start: usize, len: usize) -> Option<&mut [R]> {
        Some(&mut self[start..start + len])
    }
}

/// One logical axis, possibly folded from several tensor dimensions.
///
/// A logical index `v` is split mixed-radix (first entry fastest) and each
/// digit is multiplied by its physical stride.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Axis {
    radix: Vec<(usize, usize)>,
}

impl Axis {
    pub(crate) fn simple(stride: usize) -> Self {
        Axis {
            radix: vec![(usize::MAX, stride)],
        }
    }

    pub(crate) fn folded(radix: Vec<(usize, usize)>) -> Self {
        if radix.len() == 1 {
            return Axis::simple(radix[0].1);
        }
        Axis { radix }
    }

    fn single_stride(&self) -> Option<usize> {
        (self.radix.len() == 1).then(|| self.radix[0].1)
    }

    #[inline]
    fn offset(&self, mut v: usize) -> usize {
        if let Some(s) = self.single_stride() {
            return v * s;
        }
        let mut off = 0;
        for &(e, s) in &self.radix {
            off += (v % e) * s;
            v /= e;
        }
        off
    }

    pub(crate) fn scaled(&self, by: usize) -> Axis {
        Axis {
            radix: self.radix.iter().map(|&(e, s)| (e, s * by)).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Map {
    Strided { axes: Vec<Axis>, lane_stride: usize },
    Diagonal,
    Zero,
}

/// A resolved logical → physical mapping for tiles of one rank.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Addressing {
    pub(crate) extents: Vec<usize>,
    pub(crate) lanes: usize,
    pub(crate) physical: usize,
    pub(crate) map: Map,
}

impl Addressing {
    fn check_bounds(&self, tile: &Tile) -> Result<()> {
        if tile.rank() != self.extents.len() {
            return Err(Error::DimMismatch {
                expected: format!("{} dims", self.extents.len()),
                actual: tile.dims().to_string(),
            });
        }
        for (d, &e) in self.extents.iter().enumerate() {
            let lo = tile.start(d);
            let hi = lo + tile.extent(d) as isize;
            if lo < 0 || hi > e as isize {
                return Err(Error::OutOfBounds {
                    dim: tile.dims().as_slice()[d],
                    lo,
                    hi,
                    extent: e,
                });
            }
        }
        Ok(())
    }

    fn check_buffer(&self, len: usize) -> Result<()> {
        if len != self.physical {
            return Err(Error::BufferSize {
                name: "layout",
                expected: self.physical,
                actual: len,
            });
        }
        Ok(())
    }

    /// Reads `tile` into `out`, plane-major: lane `l` of local element `e`
    /// lands at `out[l * tile.len() + e]`. Returns the number of elements
    /// actually read from `src`.
    pub(crate) fn gather<R: Real, S: Source<R> + ?Sized>(&self, src: &S, tile: &Tile, out: &mut [R]) -> Result<u64> {
        self.check_bounds(tile)?;
        let n = tile.len();
        if out.len() != n * self.lanes {
            return Err(Error::ValueCount {
                expected: n * self.lanes,
                actual: out.len(),
            });
        }
        match &self.map {
            Map::Zero => {
                out.fill(<R as Element>::zero());
                Ok(0)
            }
            Map::Diagonal => {
                self.check_buffer(src.len())?;
                let (r0, c0) = (tile.start(0) as usize, tile.start(1) as usize);
                let rows = tile.extent(0);
                let mut reads = 0;
                for j in 0..tile.extent(1) {
                    for i in 0..rows {
                        out[j * rows + i] = if r0 + i == c0 + j {
                            reads += 1;
                            src.get(r0 + i)
                        } else {
                            <R as Element>::zero()
                        };
                    }
                }
                Ok(reads)
            }
            Map::Strided { axes, lane_stride } => {
                self.check_buffer(src.len())?;
                let lanes = self.lanes;
                let ls = *lane_stride;
                for_each_column(axes, tile, |e0, col_off, rows, start0| {
                    let lead = &axes[0];
                    match lead.single_stride() {
                        Some(s) => {
                            let base = col_off + start0 * s;
                            for lane in 0..lanes {
                                let dst = &mut out[lane * n + e0..lane * n + e0 + rows];
                                let p = base + lane * ls;
                                match (s, src.run(p, rows)) {
                                    (1, Some(run)) => dst.copy_from_slice(run),
                                    _ => {
                                        for (i, d) in dst.iter_mut().enumerate() {
                                            *d = src.get(p + i * s);
                                        }
                                    }
                                }
                            }
                        }
                        None => {
                            for i in 0..rows {
                                let p = col_off + lead.offset(start0 + i);
                                for lane in 0..lanes {
                                    out[lane * n + e0 + i] = src.get(p + lane * ls);
                                }
                            }
                        }
                    }
                });
                Ok(n as u64)
            }
        }
    }

    /// Inverse of [`gather`](Self::gather). Returns the number of elements
    /// actually written to `dst`.
    pub(crate) fn scatter<R: Real, S: Sink<R> + ?Sized>(&self, dst: &mut S, tile: &Tile, values: &[R]) -> Result<u64> {
        self.check_bounds(tile)?;
        let n = tile.len();
        if values.len() != n * self.lanes {
            return Err(Error::ValueCount {
                expected: n * self.lanes,
                actual: values.len(),
            });
        }
        match &self.map {
            Map::Zero => Ok(0),
            Map::Diagonal => {
                self.check_buffer(dst.len())?;
                let (r0, c0) = (tile.start(0) as usize, tile.start(1) as usize);
                let rows = tile.extent(0);
                let cols = tile.extent(1);
                // validate everything before touching the buffer
                for j in 0..cols {
                    for i in 0..rows {
                        if r0 + i != c0 + j && values[j * rows + i] != <R as Element>::zero() {
                            return Err(Error::OffDiagonalStore {
                                row: r0 + i,
                                col: c0 + j,
                            });
                        }
                    }
                }
                let mut writes = 0;
                for j in 0..cols {
                    let g = c0 + j;
                    if g >= r0 && g < r0 + rows {
                        dst.set(g, values[j * rows + (g - r0)]);
                        writes += 1;
                    }
                }
                Ok(writes)
            }
            Map::Strided { axes, lane_stride } => {
                self.check_buffer(dst.len())?;
                let lanes = self.lanes;
                let ls = *lane_stride;
                for_each_column(axes, tile, |e0, col_off, rows, start0| {
                    let lead = &axes[0];
                    match lead.single_stride() {
                        Some(s) => {
                            let base = col_off + start0 * s;
                            for lane in 0..lanes {
                                let src = &values[lane * n + e0..lane * n + e0 + rows];
                                let p = base + lane * ls;
                                if s == 1 {
                                    if let Some(run) = dst.run_mut(p, rows) {
                                        run.copy_from_slice(src);
                                        continue;
                                    }
                                }
                                for (i, &v) in src.iter().enumerate() {
                                    dst.set(p + i * s, v);
                                }
                            }
                        }
                        None => {
                            for i in 0..rows {
                                let p = col_off + lead.offset(start0 + i);
                                for lane in 0..lanes {
                                    dst.set(p + lane * ls, values[lane * n + e0 + i]);
                                }
                            }
                        }
                    }
                });
                Ok(n as u64)
            }
        }
    }
}

/// Calls `f(first_local_element, column_offset, rows, start0)` for every
/// column of `tile` (all coordinates except the leading one fixed), in
/// local column-major order.
#[inline]
fn for_each_column(axes: &[Axis], tile: &Tile, mut f: impl FnMut(usize, usize, usize, usize)) {
    let rank = tile.rank();
    let rows = tile.extent(0);
    let start0 = tile.start(0) as usize;
    let mut sizes = [1usize; MAX_DIMS];
    let mut starts = [0usize; MAX_DIMS];
    for d in 1..rank {
        sizes[d - 1] = tile.extent(d);
        starts[d - 1] = tile.start(d) as usize;
    }
    let cols: usize = sizes[..rank.saturating_sub(1)].iter().product();
    let mut local = [0usize; MAX_DIMS];
    for col in 0..cols {
        let mut off = 0;
        if rank > 1 {
            unravel(col, &sizes[..rank - 1], &mut local[..rank - 1]);
            for d in 1..rank {
                off += axes[d].offset(starts[d - 1] + local[d - 1]);
            }
        }
        f(col * rows, off, rows, start0);
    }
}
