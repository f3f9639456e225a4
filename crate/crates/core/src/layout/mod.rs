//! Layouts map logical tile coordinates onto physical storage.
//!
//! A layout answers three questions: how many scalars a logical extent
//! occupies ([`Layout::physical_size`]), and how to load or store the
//! elements of a tile ([`Layout::load_tile`], [`Layout::store_tile`]).
//! Values always travel in the tile's local column-major order, whatever the
//! physical arrangement.
//!
//! Some layouts are not materialized: [`LayoutKind::Zero`] never touches
//! memory, and [`LayoutKind::Diagonal`] only stores the diagonal.

mod addressing;

use std::fmt;
use std::ops::{Deref, DerefMut};

pub(crate) use addressing::{Sink, Source};

use addressing::{Addressing, Axis, Map};

use crate::element::{ElemType, Element, Real};
use crate::error::{Error, Result};
use crate::tiling::{DimName, Tile, MAX_DIMS};

/// How a matrix or tensor is arranged in memory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LayoutKind {
    ColMajor,
    RowMajor,
    /// Adds `pad` unused elements to the fastest-varying physical dimension
    /// of `inner` (every column of a column-major matrix, every row of a
    /// row-major one).
    Padded {
        inner: Box<LayoutKind>,
        pad: usize,
    },
    /// Square matrix storing only its diagonal; off-diagonal reads yield zero
    /// without a memory access.
    Diagonal,
    /// All elements read as zero; stores are dropped.
    Zero,
    /// Two-lane elements with their lanes adjacent.
    InterleavedComplex {
        inner: Box<LayoutKind>,
    },
    /// Two-lane elements with all first lanes, then all second lanes.
    SplitComplex {
        inner: Box<LayoutKind>,
    },
    /// A tensor stored column-major in a permuted dimension order.
    StridedPermutation(TensorMap),
}

impl LayoutKind {
    pub fn padded(inner: LayoutKind, pad: usize) -> Self {
        LayoutKind::Padded {
            inner: Box::new(inner),
            pad,
        }
    }

    pub fn interleaved(inner: LayoutKind) -> Self {
        LayoutKind::InterleavedComplex { inner: Box::new(inner) }
    }

    pub fn split(inner: LayoutKind) -> Self {
        LayoutKind::SplitComplex { inner: Box::new(inner) }
    }

    /// Number of real lanes per element this layout arranges. `Zero` fits
    /// any element.
    pub fn lanes(&self) -> usize {
        match self {
            LayoutKind::InterleavedComplex { .. } | LayoutKind::SplitComplex { .. } => 2,
            _ => 1,
        }
    }

    /// The tensor map of a (possibly wrapped) strided-permutation layout.
    pub fn tensor_map(&self) -> Option<&TensorMap> {
        match self {
            LayoutKind::StridedPermutation(m) => Some(m),
            LayoutKind::Padded { inner, .. }
            | LayoutKind::InterleavedComplex { inner }
            | LayoutKind::SplitComplex { inner } => inner.tensor_map(),
            _ => None,
        }
    }

    /// True when the layout never touches memory.
    pub fn is_zero(&self) -> bool {
        matches!(self, LayoutKind::Zero)
    }
}

impl fmt::Display for LayoutKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LayoutKind::ColMajor => f.write_str("ColMajor"),
            LayoutKind::RowMajor => f.write_str("RowMajor"),
            LayoutKind::Padded { inner, pad } => write!(f, "Padded{{{inner},{pad}}}"),
            LayoutKind::Diagonal => f.write_str("Diagonal"),
            LayoutKind::Zero => f.write_str("Zero"),
            LayoutKind::InterleavedComplex { inner } => write!(f, "InterleavedComplex{{{inner}}}"),
            LayoutKind::SplitComplex { inner } => write!(f, "SplitComplex{{{inner}}}"),
            LayoutKind::StridedPermutation(m) => write!(f, "StridedPermutation{{{m}}}"),
        }
    }
}

/// Describes a tensor stored column-major in `physical_order`, viewed with
/// its logical dimensions in `logical` order.
///
/// For use inside a GEMM the tensor is folded into a matrix: the first
/// `row_dims` logical dimensions form the row index (first one fastest), the
/// rest the column index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TensorMap {
    logical: Vec<(DimName, usize)>,
    physical_order: Vec<DimName>,
    row_dims: usize,
}

impl TensorMap {
    pub fn new(logical: &[(DimName, usize)], physical_order: &[DimName], row_dims: usize) -> Result<Self> {
        let names: Vec<DimName> = logical.iter().map(|d| d.0).collect();
        crate::tiling::Dims::new(&names)?;
        if physical_order.len() != logical.len() || !physical_order.iter().all(|n| names.contains(n)) {
            return Err(Error::Layout(format!(
                "physical order {physical_order:?} is not a permutation of {names:?}"
            )));
        }
        if let Some(&(dim, _)) = logical.iter().find(|d| d.1 == 0) {
            return Err(Error::EmptyExtent { dim });
        }
        if row_dims == 0 || row_dims >= logical.len() {
            return Err(Error::Layout(format!(
                "row group must hold between 1 and {} dimensions, got {row_dims}",
                logical.len() - 1
            )));
        }
        Ok(TensorMap {
            logical: logical.to_vec(),
            physical_order: physical_order.to_vec(),
            row_dims,
        })
    }

    pub fn logical(&self) -> &[(DimName, usize)] {
        &self.logical
    }

    pub fn physical_order(&self) -> &[DimName] {
        &self.physical_order
    }

    pub fn row_dims(&self) -> usize {
        self.row_dims
    }

    /// Extents of the folded matrix, `(Π rows, Π cols)`.
    pub fn matrix_extents(&self) -> (usize, usize) {
        let rows = self.logical[..self.row_dims].iter().map(|d| d.1).product();
        let cols = self.logical[self.row_dims..].iter().map(|d| d.1).product();
        (rows, cols)
    }

    fn extents(&self) -> Vec<usize> {
        self.logical.iter().map(|d| d.1).collect()
    }

    /// Physical stride of each logical dimension.
    fn strides(&self) -> Vec<usize> {
        self.logical
            .iter()
            .map(|&(name, _)| {
                self.physical_order
                    .iter()
                    .take_while(|&&p| p != name)
                    .map(|p| self.logical.iter().find(|d| d.0 == *p).unwrap().1)
                    .product()
            })
            .collect()
    }
}

impl fmt::Display for TensorMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (n, e) in &self.logical {
            write!(f, "{n}{e}")?;
        }
        f.write_str("->")?;
        for n in &self.physical_order {
            write!(f, "{n}")?;
        }
        Ok(())
    }
}

/// A layout kind bound to an element type and logical extents.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Layout {
    kind: LayoutKind,
    elem: ElemType,
    native: Addressing,
    /// Folded two-dimensional view of a tensor layout.
    matrix: Option<Addressing>,
}

impl Layout {
    /// Binds `kind` to logical `extents`.
    ///
    /// Tensor layouts accept either their tensor extents or the extents of
    /// their folded matrix view.
    pub fn new(kind: LayoutKind, elem: ElemType, extents: &[usize]) -> Result<Self> {
        if extents.is_empty() || extents.len() > MAX_DIMS {
            return Err(Error::Layout(format!("unsupported rank {}", extents.len())));
        }
        if extents.contains(&0) {
            return Err(Error::Layout(format!("zero extent in {extents:?}")));
        }
        if !kind.is_zero() && kind.lanes() != elem.lanes() {
            return Err(Error::Layout(format!(
                "{kind} arranges {}-lane elements but {elem} has {} lane(s)",
                kind.lanes(),
                elem.lanes()
            )));
        }
        let (native, matrix) = match kind.tensor_map() {
            Some(map) => {
                let tensor = map.extents();
                let (rows, cols) = map.matrix_extents();
                if extents != tensor.as_slice() && extents != [rows, cols] {
                    return Err(Error::Layout(format!(
                        "extents {extents:?} match neither tensor {tensor:?} nor matrix [{rows}, {cols}]"
                    )));
                }
                (build(&kind, &tensor, false)?, Some(build(&kind, &tensor, true)?))
            }
            None => (build(&kind, extents, false)?, None),
        };
        let mut native = native;
        if kind.is_zero() {
            native.lanes = elem.lanes();
        }
        Ok(Layout {
            kind,
            elem,
            native,
            matrix,
        })
    }

    /// A `rows × cols` matrix layout for element type `E`.
    pub fn matrix<E: Element>(kind: LayoutKind, rows: usize, cols: usize) -> Result<Self> {
        Layout::new(kind, E::TYPE, &[rows, cols])
    }

    pub fn kind(&self) -> &LayoutKind {
        &self.kind
    }

    pub fn elem(&self) -> ElemType {
        self.elem
    }

    /// Logical extents (tensor extents for tensor layouts).
    pub fn extents(&self) -> &[usize] {
        &self.native.extents
    }

    /// Extents of the two-dimensional view used by the GEMM kernel.
    pub fn matrix_extents(&self) -> Option<(usize, usize)> {
        let a = self.matrix.as_ref().unwrap_or(&self.native);
        (a.extents.len() == 2).then(|| (a.extents[0], a.extents[1]))
    }

    /// Number of physical scalars (lanes) the layout occupies.
    pub fn physical_size(&self) -> usize {
        self.native.physical
    }

    /// True when elements are actually stored.
    pub fn is_materialized(&self) -> bool {
        !self.kind.is_zero()
    }

    fn addressing(&self, tile: &Tile) -> Result<&Addressing> {
        if tile.rank() == self.native.extents.len() {
            if let (Some(map), true) = (self.kind.tensor_map(), tile.rank() > 2) {
                // tensor-mode tiles address dimensions by name
                for (i, &(name, _)) in map.logical().iter().enumerate() {
                    if tile.dims().as_slice()[i] != name {
                        return Err(Error::DimMismatch {
                            expected: format!("{:?}", map.logical().iter().map(|d| d.0).collect::<Vec<_>>()),
                            actual: tile.dims().to_string(),
                        });
                    }
                }
            }
            return Ok(&self.native);
        }
        match &self.matrix {
            Some(m) if tile.rank() == 2 => Ok(m),
            _ => Err(Error::DimMismatch {
                expected: format!("{} dims", self.native.extents.len()),
                actual: tile.dims().to_string(),
            }),
        }
    }

    fn check_elem<E: Element>(&self) -> Result<()> {
        if E::TYPE != self.elem {
            return Err(Error::ElementType {
                layout: self.elem,
                access: E::TYPE,
            });
        }
        Ok(())
    }

    fn check_real<R: Real>(&self) -> Result<()> {
        if std::mem::size_of::<R>() != self.elem.lane_bytes() {
            return Err(Error::ElementType {
                layout: self.elem,
                access: R::TYPE,
            });
        }
        Ok(())
    }

    /// Loads the elements of `tile` in local column-major order.
    pub fn load_tile<E: Element>(&self, buf: &[E::Real], tile: &Tile) -> Result<Vec<E>> {
        let mut out = vec![E::zero(); tile.len()];
        self.load_tile_into(buf, tile, &mut out)?;
        Ok(out)
    }

    /// Like [`load_tile`](Self::load_tile), writing into `out`. Returns the
    /// number of elements read from `buf`.
    pub fn load_tile_into<E: Element>(&self, buf: &[E::Real], tile: &Tile, out: &mut [E]) -> Result<u64> {
        self.check_elem::<E>()?;
        if out.len() != tile.len() {
            return Err(Error::ValueCount {
                expected: tile.len(),
                actual: out.len(),
            });
        }
        let n = tile.len();
        let mut planes = vec![<E::Real as Element>::zero(); n * E::LANES];
        let reads = self.addressing(tile)?.gather(buf, tile, &mut planes)?;
        let mut lanes = [<E::Real as Element>::zero(); 2];
        for (e, o) in out.iter_mut().enumerate() {
            for (l, lane) in lanes.iter_mut().enumerate().take(E::LANES) {
                *lane = planes[l * n + e];
            }
            *o = E::from_lanes(&lanes[..E::LANES]);
        }
        Ok(reads)
    }

    /// Stores `values` (local column-major) at `tile`. Returns the number of
    /// elements written to `buf`.
    pub fn store_tile<E: Element>(&self, buf: &mut [E::Real], tile: &Tile, values: &[E]) -> Result<u64> {
        self.check_elem::<E>()?;
        let n = tile.len();
        if values.len() != n {
            return Err(Error::ValueCount {
                expected: n,
                actual: values.len(),
            });
        }
        let mut planes = vec![<E::Real as Element>::zero(); n * E::LANES];
        for (e, v) in values.iter().enumerate() {
            for l in 0..E::LANES {
                planes[l * n + e] = v.lane(l);
            }
        }
        self.addressing(tile)?.scatter(buf, tile, &planes)
    }

    /// Plane-major gather used by the kernel's hot paths.
    pub(crate) fn gather<R: Real, S: Source<R> + ?Sized>(&self, src: &S, tile: &Tile, out: &mut [R]) -> Result<u64> {
        self.check_real::<R>()?;
        self.addressing(tile)?.gather(src, tile, out)
    }

    pub(crate) fn scatter<R: Real, S: Sink<R> + ?Sized>(&self, dst: &mut S, tile: &Tile, values: &[R]) -> Result<u64> {
        self.check_real::<R>()?;
        self.addressing(tile)?.scatter(dst, tile, values)
    }
}

/// Number of physical scalars `layout` occupies.
pub fn physical_size(layout: &Layout) -> usize {
    layout.physical_size()
}

/// Strides of a plain (unwrapped) column- or row-major arrangement whose
/// fastest dimension is padded by `pad`.
fn dense_strides(extents: &[usize], row_major: bool, pad: usize) -> (Vec<usize>, usize) {
    let r = extents.len();
    let mut strides = vec![0; r];
    let mut acc = 1;
    let order: Vec<usize> = if row_major {
        (0..r).rev().collect()
    } else {
        (0..r).collect()
    };
    for (pos, &d) in order.iter().enumerate() {
        strides[d] = acc;
        acc *= extents[d] + if pos == 0 { pad } else { 0 };
    }
    (strides, acc)
}

/// Resolves `kind` over `extents` to an addressing scheme. For tensor maps
/// `grouped` folds the dimensions into a matrix view.
fn build(kind: &LayoutKind, extents: &[usize], grouped: bool) -> Result<Addressing> {
    let strided = |axes: Vec<Axis>, extents: Vec<usize>, physical: usize| Addressing {
        extents,
        lanes: 1,
        physical,
        map: Map::Strided { axes, lane_stride: 0 },
    };
    Ok(match kind {
        LayoutKind::ColMajor | LayoutKind::RowMajor => {
            let (s, physical) = dense_strides(extents, *kind == LayoutKind::RowMajor, 0);
            strided(s.into_iter().map(Axis::simple).collect(), extents.to_vec(), physical)
        }
        LayoutKind::Padded { inner, pad } => match inner.as_ref() {
            LayoutKind::ColMajor | LayoutKind::RowMajor => {
                let (s, physical) = dense_strides(extents, **inner == LayoutKind::RowMajor, *pad);
                strided(s.into_iter().map(Axis::simple).collect(), extents.to_vec(), physical)
            }
            other => {
                return Err(Error::Layout(format!(
                    "padding applies to ColMajor or RowMajor, not {other}"
                )))
            }
        },
        LayoutKind::Diagonal => {
            if extents.len() != 2 || extents[0] != extents[1] {
                return Err(Error::Layout(format!(
                    "diagonal layout needs square extents, got {extents:?}"
                )));
            }
            Addressing {
                extents: extents.to_vec(),
                lanes: 1,
                physical: extents[0],
                map: Map::Diagonal,
            }
        }
        LayoutKind::Zero => Addressing {
            extents: extents.to_vec(),
            lanes: 1,
            physical: 0,
            map: Map::Zero,
        },
        LayoutKind::StridedPermutation(map) => {
            let strides = map.strides();
            let physical = map.extents().iter().product();
            if grouped {
                let pairs: Vec<(usize, usize)> = map.logical.iter().map(|d| d.1).zip(strides).collect();
                let (rows, cols) = map.matrix_extents();
                strided(
                    vec![
                        Axis::folded(pairs[..map.row_dims].to_vec()),
                        Axis::folded(pairs[map.row_dims..].to_vec()),
                    ],
                    vec![rows, cols],
                    physical,
                )
            } else {
                strided(strides.into_iter().map(Axis::simple).collect(), map.extents(), physical)
            }
        }
        LayoutKind::InterleavedComplex { inner } | LayoutKind::SplitComplex { inner } => {
            let base = build(inner, extents, grouped)?;
            let Map::Strided { axes, .. } = base.map else {
                return Err(Error::Layout(format!("{kind} needs a materialized dense inner layout")));
            };
            if inner.lanes() != 1 {
                return Err(Error::Layout(format!("{kind} cannot wrap another complex layout")));
            }
            let interleaved = matches!(kind, LayoutKind::InterleavedComplex { .. });
            let (axes, lane_stride) = if interleaved {
                (axes.iter().map(|a| a.scaled(2)).collect(), 1)
            } else {
                (axes, base.physical)
            };
            Addressing {
                extents: base.extents,
                lanes: 2,
                physical: 2 * base.physical,
                map: Map::Strided { axes, lane_stride },
            }
        }
    })
}

/// Contiguous scalar storage sized for one layout.
#[derive(Debug, Clone, PartialEq)]
pub struct Buffer<R> {
    data: Vec<R>,
}

impl<R: Real> Buffer<R> {
    pub fn zeroed(layout: &Layout) -> Self {
        Buffer {
            data: vec![<R as Element>::zero(); layout.physical_size()],
        }
    }

    pub fn from_vec(layout: &Layout, data: Vec<R>) -> Result<Self> {
        if data.len() != layout.physical_size() {
            return Err(Error::BufferSize {
                name: "buffer",
                expected: layout.physical_size(),
                actual: data.len(),
            });
        }
        Ok(Buffer { data })
    }

    pub fn into_vec(self) -> Vec<R> {
        self.data
    }
}

impl<R> Deref for Buffer<R> {
    type Target = [R];
    fn deref(&self) -> &[R] {
        &self.data
    }
}

impl<R> DerefMut for Buffer<R> {
    fn deref_mut(&mut self) -> &mut [R] {
        &mut self.data
    }
}
