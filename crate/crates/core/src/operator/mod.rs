//! The innermost compute contract: load fragments, multiply-accumulate,
//! store fragments.
//!
//! A [`Fragment`] is the operator-shaped piece of a matrix one invocation
//! consumes or produces. Fragments hold their lanes as separate planes
//! (all real parts, then all imaginary parts) so complex and dual operators
//! decompose into real block multiplies.

mod block;

use std::fmt;
use std::marker::PhantomData;

use num_complex::Complex;

pub(crate) use block::block_mac;

use crate::element::{ConvertTo, Dual, Element, Real};
use crate::error::{Error, Result};
use crate::layout::Layout;
use crate::tiling::Tile;

/// Extents `(M, N, K)` of one operator invocation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct OperatorShape {
    pub m: usize,
    pub n: usize,
    pub k: usize,
}

impl OperatorShape {
    pub const fn new(m: usize, n: usize, k: usize) -> Self {
        OperatorShape { m, n, k }
    }

    pub fn fragment_extents(&self, role: FragmentRole) -> (usize, usize) {
        match role {
            FragmentRole::A => (self.m, self.k),
            FragmentRole::B => (self.k, self.n),
            FragmentRole::C | FragmentRole::D => (self.m, self.n),
        }
    }
}

impl Default for OperatorShape {
    fn default() -> Self {
        OperatorShape::new(8, 8, 8)
    }
}

impl fmt::Display for OperatorShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}x{}", self.m, self.n, self.k)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FragmentRole {
    A,
    B,
    C,
    D,
}

/// Register-resident matrix piece, column-major within each lane plane.
#[derive(Clone, PartialEq)]
pub struct Fragment<T: Element> {
    role: FragmentRole,
    rows: usize,
    cols: usize,
    planes: Vec<T::Real>,
    _elem: PhantomData<T>,
}

impl<T: Element> Fragment<T> {
    pub fn zeros(role: FragmentRole, shape: OperatorShape) -> Self {
        let (rows, cols) = shape.fragment_extents(role);
        Fragment {
            role,
            rows,
            cols,
            planes: vec![<T::Real as Element>::zero(); rows * cols * T::LANES],
            _elem: PhantomData,
        }
    }

    /// Builds a fragment from column-major `values`.
    pub fn from_elements(role: FragmentRole, shape: OperatorShape, values: &[T]) -> Result<Self> {
        let mut f = Fragment::zeros(role, shape);
        let n = f.len();
        if values.len() != n {
            return Err(Error::FragmentShape(format!(
                "{role:?} fragment of {shape} holds {n} elements, got {}",
                values.len()
            )));
        }
        for (e, v) in values.iter().enumerate() {
            for l in 0..T::LANES {
                f.planes[l * n + e] = v.lane(l);
            }
        }
        Ok(f)
    }

    pub fn role(&self) -> FragmentRole {
        self.role
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get(&self, row: usize, col: usize) -> T {
        element_at::<T>(&self.planes, self.len(), row + col * self.rows)
    }

    /// All elements, column-major.
    pub fn elements(&self) -> Vec<T> {
        (0..self.len())
            .map(|e| element_at::<T>(&self.planes, self.len(), e))
            .collect()
    }

    pub fn planes(&self) -> &[T::Real] {
        &self.planes
    }
}

impl<T: Element> fmt::Debug for Fragment<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Fragment")
            .field("role", &self.role)
            .field("rows", &self.rows)
            .field("cols", &self.cols)
            .field("elements", &self.elements())
            .finish()
    }
}

#[inline]
pub(crate) fn element_at<T: Element>(planes: &[T::Real], n: usize, e: usize) -> T {
    let mut lanes = [<T::Real as Element>::zero(); 2];
    for (l, lane) in lanes.iter_mut().enumerate().take(T::LANES) {
        *lane = planes[l * n + e];
    }
    T::from_lanes(&lanes[..T::LANES])
}

#[inline]
pub(crate) fn set_element<T: Element>(planes: &mut [T::Real], n: usize, e: usize, v: T) {
    for l in 0..T::LANES {
        planes[l * n + e] = v.lane(l);
    }
}

/// A warp-level multiply-accumulate unit.
pub trait Operator<T: Element>: Send + Sync + fmt::Debug {
    fn shape(&self) -> OperatorShape;

    fn name(&self) -> &'static str;

    /// `acc ← a · b + acc` on plane-major fragment storage. Returns the
    /// number of real block multiplies performed.
    fn mma_planes(&self, a: &[T::Real], b: &[T::Real], acc: &mut [T::Real]) -> u32;
}

/// `D = A · B + C`.
pub fn mma<T: Element>(op: &dyn Operator<T>, a: &Fragment<T>, b: &Fragment<T>, c: &Fragment<T>) -> Result<Fragment<T>> {
    let s = op.shape();
    for (frag, role) in [(a, FragmentRole::A), (b, FragmentRole::B), (c, FragmentRole::C)] {
        if (frag.rows, frag.cols) != s.fragment_extents(role) {
            return Err(Error::FragmentShape(format!(
                "{role:?} operand is {}x{}, operator shape is {s}",
                frag.rows, frag.cols
            )));
        }
    }
    let mut d = c.clone();
    d.role = FragmentRole::D;
    op.mma_planes(&a.planes, &b.planes, &mut d.planes);
    Ok(d)
}

#[inline]
pub(crate) fn convert_lane<S: Real, T: Real>(v: S) -> T {
    T::from_f64_lossy(v.as_())
}

fn load_fragment<S, T>(
    op: &dyn Operator<T>,
    role: FragmentRole,
    layout: &Layout,
    buf: &[S::Real],
    tile: &Tile,
) -> Result<Fragment<T>>
where
    S: ConvertTo<T>,
    T: Element,
{
    let shape = op.shape();
    let want = shape.fragment_extents(role);
    if tile.rank() != 2 || (tile.extent(0), tile.extent(1)) != want {
        return Err(Error::FragmentShape(format!(
            "{role:?} tile {:?} does not match operator shape {shape}",
            tile.size()
        )));
    }
    if layout.elem() != S::TYPE {
        return Err(Error::ElementType {
            layout: layout.elem(),
            access: S::TYPE,
        });
    }
    let mut raw = vec![<S::Real as Element>::zero(); tile.len() * S::LANES];
    layout.gather(buf, tile, &mut raw)?;
    let mut f = Fragment::zeros(role, shape);
    for (dst, &src) in f.planes.iter_mut().zip(&raw) {
        *dst = convert_lane(src);
    }
    Ok(f)
}

/// Loads an A fragment from storage type `S`, converting to the compute type.
pub fn load_a<S: ConvertTo<T>, T: Element>(
    op: &dyn Operator<T>,
    layout: &Layout,
    buf: &[S::Real],
    tile: &Tile,
) -> Result<Fragment<T>> {
    load_fragment::<S, T>(op, FragmentRole::A, layout, buf, tile)
}

pub fn load_b<S: ConvertTo<T>, T: Element>(
    op: &dyn Operator<T>,
    layout: &Layout,
    buf: &[S::Real],
    tile: &Tile,
) -> Result<Fragment<T>> {
    load_fragment::<S, T>(op, FragmentRole::B, layout, buf, tile)
}

pub fn load_c<S: ConvertTo<T>, T: Element>(
    op: &dyn Operator<T>,
    layout: &Layout,
    buf: &[S::Real],
    tile: &Tile,
) -> Result<Fragment<T>> {
    load_fragment::<S, T>(op, FragmentRole::C, layout, buf, tile)
}

/// Stores a D fragment, narrowing to storage type `S` (round to nearest).
pub fn store_d<S: Element, T: ConvertTo<S>>(
    op: &dyn Operator<T>,
    layout: &Layout,
    buf: &mut [S::Real],
    tile: &Tile,
    d: &Fragment<T>,
) -> Result<()> {
    let want = op.shape().fragment_extents(FragmentRole::D);
    if (d.rows, d.cols) != want || tile.rank() != 2 || (tile.extent(0), tile.extent(1)) != want {
        return Err(Error::FragmentShape(format!(
            "D fragment {}x{} / tile {:?} do not match operator shape {}",
            d.rows,
            d.cols,
            tile.size(),
            op.shape()
        )));
    }
    if layout.elem() != S::TYPE {
        return Err(Error::ElementType {
            layout: layout.elem(),
            access: S::TYPE,
        });
    }
    let raw: Vec<S::Real> = d.planes.iter().map(|&v| convert_lane(v)).collect();
    layout.scatter(buf, tile, &raw)?;
    Ok(())
}

/// Real multiply-accumulate operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FmaOp {
    shape: OperatorShape,
}

impl FmaOp {
    pub fn new(shape: OperatorShape) -> Self {
        FmaOp { shape }
    }
}

impl<R: Real> Operator<R> for FmaOp {
    fn shape(&self) -> OperatorShape {
        self.shape
    }

    fn name(&self) -> &'static str {
        "fma"
    }

    #[inline]
    fn mma_planes(&self, a: &[R], b: &[R], acc: &mut [R]) -> u32 {
        let OperatorShape { m, n, k } = self.shape;
        block_mac(m, n, k, a, b, acc, false);
        1
    }
}

/// Complex multiply-accumulate from four real block multiplies.
///
/// Accumulation order is fixed: `re += a.re·b.re`, `re -= a.im·b.im`,
/// `im += a.re·b.im`, `im += a.im·b.re`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ComplexOp {
    shape: OperatorShape,
}

impl ComplexOp {
    pub fn new(shape: OperatorShape) -> Self {
        ComplexOp { shape }
    }
}

impl<R: Real> Operator<Complex<R>> for ComplexOp
where
    Complex<R>: Element<Real = R>,
{
    fn shape(&self) -> OperatorShape {
        self.shape
    }

    fn name(&self) -> &'static str {
        "complex"
    }

    fn mma_planes(&self, a: &[R], b: &[R], acc: &mut [R]) -> u32 {
        let OperatorShape { m, n, k } = self.shape;
        let (a_re, a_im) = a.split_at(m * k);
        let (b_re, b_im) = b.split_at(k * n);
        let (re, im) = acc.split_at_mut(m * n);
        block_mac(m, n, k, a_re, b_re, re, false);
        block_mac(m, n, k, a_im, b_im, re, true);
        block_mac(m, n, k, a_re, b_im, im, false);
        block_mac(m, n, k, a_im, b_re, im, false);
        4
    }
}

/// Dual-number multiply-accumulate: the `ε·ε` product vanishes, leaving
/// three real block multiplies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DualOp {
    shape: OperatorShape,
}

impl DualOp {
    pub fn new(shape: OperatorShape) -> Self {
        DualOp { shape }
    }
}

impl<R: Real> Operator<Dual<R>> for DualOp
where
    Dual<R>: Element<Real = R>,
{
    fn shape(&self) -> OperatorShape {
        self.shape
    }

    fn name(&self) -> &'static str {
        "dual"
    }

    fn mma_planes(&self, a: &[R], b: &[R], acc: &mut [R]) -> u32 {
        let OperatorShape { m, n, k } = self.shape;
        let (a_v, a_e) = a.split_at(m * k);
        let (b_v, b_e) = b.split_at(k * n);
        let (v, e) = acc.split_at_mut(m * n);
        block_mac(m, n, k, a_v, b_v, v, false);
        block_mac(m, n, k, a_v, b_e, e, false);
        block_mac(m, n, k, a_e, b_v, e, false);
        3
    }
}
