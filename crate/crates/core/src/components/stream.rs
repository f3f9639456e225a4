//! Column-by-column copies between global memory and scratch, with lane
//! conversion and a transform on the way.

use crate::components::transform::Transform;
use crate::element::{Element, Real};
use crate::error::Result;
use crate::layout::{Layout, Sink, Source};
use crate::operator::convert_lane;
use crate::tiling::{Coord, Tile};

/// Staging vectors sized for the longest column a kernel copies.
#[derive(Debug, Clone)]
pub(crate) struct StreamBuf<Rs, Rt> {
    storage: Vec<Rs>,
    compute: Vec<Rt>,
}

impl<Rs: Real, Rt: Real> StreamBuf<Rs, Rt> {
    pub(crate) fn new(max_column: usize, lanes: usize) -> Self {
        StreamBuf {
            storage: vec![<Rs as Element>::zero(); max_column * lanes],
            compute: vec![<Rt as Element>::zero(); max_column * lanes],
        }
    }

    pub(crate) fn scalars(&self) -> usize {
        self.storage.len() + self.compute.len()
    }
}

/// Element and access counts of one stream.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub(crate) struct Moved {
    pub loads: u64,
    pub stores: u64,
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Visits the `(rows × 1)` column tiles of `local`, spread over `entities`
/// workers that run one after another.
fn for_each_copy_tile(local: &Tile, entities: usize, mut f: impl FnMut(&Tile) -> Result<()>) -> Result<()> {
    let rank = local.rank();
    let mut size = [1isize; crate::tiling::MAX_DIMS];
    size[0] = local.extent(0) as isize;
    let copy = Coord::from_values(local.dims(), &size[..rank])?;
    let cols = local.len() / local.extent(0);
    let entities = gcd(entities.max(1), cols);
    for e in 0..entities {
        for t in local.parallelise(&copy, e, entities)? {
            f(&t)?;
        }
    }
    Ok(())
}

/// `local` displaced to the absolute position of `anchor`.
#[inline]
fn placed(anchor: &Tile, local: &Tile) -> Tile {
    let mut t = anchor.resized(&[local.extent(0), 1, 1, 1, 1, 1][..anchor.rank()]);
    for d in 0..anchor.rank() {
        t = t.shifted(d, local.start(d));
    }
    t
}

/// Copies `from` (absolute, in `src`) to the origin of `dst`, converting
/// storage lanes to compute lanes and applying `transform`.
#[allow(clippy::too_many_arguments)]
pub(crate) fn load_stream<T, Rs, S, D>(
    src_layout: &Layout,
    src: &S,
    from: &Tile,
    dst_layout: &Layout,
    dst: &mut D,
    transform: &Transform<T>,
    entities: usize,
    buf: &mut StreamBuf<Rs, T::Real>,
) -> Result<Moved>
where
    T: Element,
    Rs: Real,
    S: Source<Rs> + ?Sized,
    D: Sink<T::Real> + ?Sized,
{
    let mut moved = Moved::default();
    let local = from.at_origin();
    for_each_copy_tile(&local, entities, |col| {
        let n = col.len() * T::LANES;
        let raw = &mut buf.storage[..n];
        moved.loads += src_layout.gather(src, &placed(from, col), raw)?;
        let vals = &mut buf.compute[..n];
        for (v, &r) in vals.iter_mut().zip(raw.iter()) {
            *v = convert_lane(r);
        }
        transform.apply_planes(vals, col.len());
        moved.stores += dst_layout.scatter(dst, col, vals)?;
        Ok(())
    })?;
    Ok(moved)
}

/// Copies the origin tile of `src` (shaped like `to`) to `to` in `dst`.
/// `adjust` sees every column after loading and before `transform`.
#[allow(clippy::too_many_arguments)]
pub(crate) fn store_stream<T, Rs, S, D>(
    src_layout: &Layout,
    src: &S,
    dst_layout: &Layout,
    dst: &mut D,
    to: &Tile,
    transform: &Transform<T>,
    entities: usize,
    buf: &mut StreamBuf<Rs, T::Real>,
    mut adjust: impl FnMut(&Tile, &mut [T::Real]),
) -> Result<Moved>
where
    T: Element,
    Rs: Real,
    S: Source<T::Real> + ?Sized,
    D: Sink<Rs> + ?Sized,
{
    let mut moved = Moved::default();
    let local = to.at_origin();
    for_each_copy_tile(&local, entities, |col| {
        let n = col.len() * T::LANES;
        let vals = &mut buf.compute[..n];
        moved.loads += src_layout.gather(src, col, vals)?;
        adjust(col, vals);
        transform.apply_planes(vals, col.len());
        let raw = &mut buf.storage[..n];
        for (r, &v) in raw.iter_mut().zip(vals.iter()) {
            *r = convert_lane(v);
        }
        moved.stores += dst_layout.scatter(dst, &placed(to, col), raw)?;
        Ok(())
    })?;
    Ok(moved)
}
