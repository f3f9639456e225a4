//! Named-dimension tiles and the four operations on them: projection,
//! translation, linearisation and parallelisation.
//!
//! A [`Tile`] describes a rectangular region of some index space. Its
//! position is kept as two parts, a `base` and an `offset`, whose sum is the
//! absolute position. Parallelisation puts the entity-dependent part of a
//! subtile's position in `base` and the iteration-dependent part in `offset`.
//!
//! All coordinates are 0-based element counts. Linearisation is
//! column-major: the first listed dimension has stride 1.

mod iter;

use std::fmt;

pub use iter::{parallelise, TileIterator};

use crate::error::{Error, Result};

/// Maximum number of dimensions a tile may have.
pub const MAX_DIMS: usize = 6;

/// Symbolic name of one tile dimension.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DimName(char);

impl DimName {
    pub const M: DimName = DimName('M');
    pub const N: DimName = DimName('N');
    pub const K: DimName = DimName('K');

    pub const fn new(name: char) -> Self {
        DimName(name)
    }

    pub const fn as_char(self) -> char {
        self.0
    }
}

impl fmt::Debug for DimName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for DimName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<char> for DimName {
    fn from(c: char) -> Self {
        DimName(c)
    }
}

/// An ordered list of unique dimension names.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Dims {
    names: [DimName; MAX_DIMS],
    len: u8,
}

impl Dims {
    pub fn new(names: &[DimName]) -> Result<Self> {
        if names.len() > MAX_DIMS {
            return Err(Error::TooManyDims(names.len()));
        }
        let mut out = [DimName(' '); MAX_DIMS];
        for (i, &n) in names.iter().enumerate() {
            if names[..i].contains(&n) {
                return Err(Error::DuplicateDim(n));
            }
            out[i] = n;
        }
        Ok(Dims {
            names: out,
            len: names.len() as u8,
        })
    }

    pub fn len(&self) -> usize {
        self.len as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn as_slice(&self) -> &[DimName] {
        &self.names[..self.len()]
    }

    pub fn position(&self, name: DimName) -> Option<usize> {
        self.as_slice().iter().position(|&n| n == name)
    }

    /// True when both lists hold the same names, in any order.
    pub fn same_set(&self, other: &Dims) -> bool {
        self.len == other.len && self.as_slice().iter().all(|&n| other.position(n).is_some())
    }
}

impl fmt::Debug for Dims {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.as_slice()).finish()
    }
}

impl fmt::Display for Dims {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, n) in self.as_slice().iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{n}")?;
        }
        Ok(())
    }
}

/// One integer component per named dimension.
///
/// Used for positions, displacements and (with positive components) extents.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Coord {
    dims: Dims,
    vals: [isize; MAX_DIMS],
}

impl Coord {
    pub fn new(pairs: &[(DimName, isize)]) -> Result<Self> {
        let names: Vec<DimName> = pairs.iter().map(|p| p.0).collect();
        let dims = Dims::new(&names)?;
        let mut vals = [0; MAX_DIMS];
        for (v, p) in vals.iter_mut().zip(pairs) {
            *v = p.1;
        }
        Ok(Coord { dims, vals })
    }

    /// Extents from unsigned sizes.
    pub fn extents(pairs: &[(DimName, usize)]) -> Result<Self> {
        let signed: Vec<(DimName, isize)> = pairs.iter().map(|&(n, v)| (n, v as isize)).collect();
        Coord::new(&signed)
    }

    pub fn from_values(dims: Dims, values: &[isize]) -> Result<Self> {
        if values.len() != dims.len() {
            return Err(Error::DimMismatch {
                expected: dims.to_string(),
                actual: format!("{} values", values.len()),
            });
        }
        let mut vals = [0; MAX_DIMS];
        vals[..values.len()].copy_from_slice(values);
        Ok(Coord { dims, vals })
    }

    pub fn zeros(dims: Dims) -> Self {
        Coord {
            dims,
            vals: [0; MAX_DIMS],
        }
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn rank(&self) -> usize {
        self.dims.len()
    }

    pub fn values(&self) -> &[isize] {
        &self.vals[..self.dims.len()]
    }

    pub fn get(&self, name: DimName) -> Option<isize> {
        self.dims.position(name).map(|i| self.vals[i])
    }

    /// Component-wise sum; `other` must name the same dimensions (any order).
    pub fn add(&self, other: &Coord) -> Result<Coord> {
        let aligned = other.aligned_to(self.dims)?;
        let mut out = *self;
        for i in 0..self.rank() {
            out.vals[i] += aligned.vals[i];
        }
        Ok(out)
    }

    /// Reorders `self` to follow `dims`; the name sets must be equal.
    pub fn aligned_to(&self, dims: Dims) -> Result<Coord> {
        if self.dims == dims {
            return Ok(*self);
        }
        if !self.dims.same_set(&dims) {
            return Err(Error::DimMismatch {
                expected: dims.to_string(),
                actual: self.dims.to_string(),
            });
        }
        let mut vals = [0; MAX_DIMS];
        for (i, &n) in dims.as_slice().iter().enumerate() {
            vals[i] = self.get(n).expect("same name set");
        }
        Ok(Coord { dims, vals })
    }

    /// Product of all components (the element count of an extent).
    pub fn volume(&self) -> usize {
        self.values().iter().map(|&v| v.max(0) as usize).product()
    }

    fn check_positive(&self) -> Result<()> {
        for (i, &v) in self.values().iter().enumerate() {
            if v < 1 {
                return Err(Error::EmptyExtent {
                    dim: self.dims.names[i],
                });
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Coord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, (n, v)) in self.dims.as_slice().iter().zip(self.values()).enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{n}={v}")?;
        }
        f.write_str(")")
    }
}

/// A rectangular region with a split `base + offset` position.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Tile {
    base: Coord,
    offset: Coord,
    size: Coord,
}

impl Tile {
    /// A tile of the given extents at the origin.
    pub fn new(size: Coord) -> Result<Self> {
        size.check_positive()?;
        Ok(Tile {
            base: Coord::zeros(size.dims),
            offset: Coord::zeros(size.dims),
            size,
        })
    }

    /// Shorthand for `Tile::new(Coord::extents(..))`.
    pub fn with_extents(pairs: &[(DimName, usize)]) -> Result<Self> {
        Tile::new(Coord::extents(pairs)?)
    }

    pub fn with_position(base: Coord, offset: Coord, size: Coord) -> Result<Self> {
        size.check_positive()?;
        Ok(Tile {
            base: base.aligned_to(size.dims)?,
            offset: offset.aligned_to(size.dims)?,
            size,
        })
    }

    pub fn dims(&self) -> Dims {
        self.size.dims
    }

    pub fn rank(&self) -> usize {
        self.size.rank()
    }

    pub fn base(&self) -> &Coord {
        &self.base
    }

    pub fn offset(&self) -> &Coord {
        &self.offset
    }

    pub fn size(&self) -> &Coord {
        &self.size
    }

    /// Absolute position, `base + offset`.
    pub fn position(&self) -> Coord {
        let mut p = self.base;
        for i in 0..self.rank() {
            p.vals[i] += self.offset.vals[i];
        }
        p
    }

    /// Absolute start along dimension index `i`.
    #[inline]
    pub fn start(&self, i: usize) -> isize {
        self.base.vals[i] + self.offset.vals[i]
    }

    /// Extent along dimension index `i`.
    #[inline]
    pub fn extent(&self, i: usize) -> usize {
        self.size.vals[i] as usize
    }

    /// Number of elements covered.
    pub fn len(&self) -> usize {
        self.size.volume()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Same size, positioned at the origin.
    pub fn at_origin(&self) -> Tile {
        Tile {
            base: Coord::zeros(self.dims()),
            offset: Coord::zeros(self.dims()),
            size: self.size,
        }
    }

    pub fn project(&self, dims: &[DimName]) -> Result<Tile> {
        project(self, dims)
    }

    pub fn translate(&self, dist: &Coord) -> Result<Tile> {
        translate(self, dist)
    }

    pub fn parallelise(&self, subtile: &Coord, index: usize, count: usize) -> Result<TileIterator> {
        parallelise(self, subtile, index, count)
    }

    /// Shifts the base along one dimension index. Used by hot loops that
    /// already know the dimension order.
    #[inline]
    pub(crate) fn shifted(&self, i: usize, by: isize) -> Tile {
        let mut t = *self;
        t.base.vals[i] += by;
        t
    }

    /// A tile with the same dimensions but a different size.
    #[inline]
    pub(crate) fn resized(&self, size: &[usize]) -> Tile {
        let mut t = *self;
        for (v, &s) in t.size.vals.iter_mut().zip(size) {
            *v = s as isize;
        }
        t
    }
}

impl fmt::Debug for Tile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "Tile{{size {:?}, base {:?}, offset {:?}}}",
            self.size, self.base, self.offset
        )
    }
}

/// Keeps only `dims`, in the given order.
pub fn project(tile: &Tile, dims: &[DimName]) -> Result<Tile> {
    let new_dims = Dims::new(dims)?;
    let mut out = Tile {
        base: Coord::zeros(new_dims),
        offset: Coord::zeros(new_dims),
        size: Coord::zeros(new_dims),
    };
    for (j, &name) in dims.iter().enumerate() {
        let i = tile.dims().position(name).ok_or(Error::UnknownDim(name))?;
        out.base.vals[j] = tile.base.vals[i];
        out.offset.vals[j] = tile.offset.vals[i];
        out.size.vals[j] = tile.size.vals[i];
    }
    Ok(out)
}

/// Adds `dist` to the base; offset and size are unchanged.
pub fn translate(tile: &Tile, dist: &Coord) -> Result<Tile> {
    let mut out = *tile;
    out.base = tile.base.add(dist)?;
    Ok(out)
}

/// Column-major linear index of `coord` within `extents`.
///
/// Components are matched by name; the order of `extents` decides the
/// strides. Coordinates are not bounds-checked so displacements
/// linearise by the same formula.
pub fn linearise(coord: &Coord, extents: &Coord) -> Result<isize> {
    let c = coord.aligned_to(extents.dims)?;
    Ok(linearise_values(c.values(), extents.values()))
}

/// `Σ_d coord[d] · Π_{d' < d} extents[d']`.
#[inline]
pub fn linearise_values(coord: &[isize], extents: &[isize]) -> isize {
    let mut idx = 0;
    let mut stride = 1;
    for (&c, &e) in coord.iter().zip(extents) {
        idx += c * stride;
        stride *= e;
    }
    idx
}

/// Inverse of [`linearise_values`] for in-range ranks.
#[inline]
pub(crate) fn unravel(mut rank: usize, extents: &[usize], out: &mut [usize]) {
    for (o, &e) in out.iter_mut().zip(extents) {
        *o = rank % e;
        rank /= e;
    }
}
