//! Scalar element types moved through the kernel.
//!
//! Every element is made of one or two real *lanes*. Buffers only ever hold
//! the real scalar type; layouts decide where each lane of a logical element
//! lives (adjacent for interleaved storage, in separate planes for split
//! storage).

use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};
use std::sync::Arc;

use num_complex::Complex;
use num_traits::Float;

use crate::operator::{ComplexOp, DualOp, FmaOp, Operator, OperatorShape};

/// Runtime tag for the element types the library knows about.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ElemType {
    F32,
    F64,
    ComplexF32,
    ComplexF64,
    DualF32,
    DualF64,
}

impl ElemType {
    pub const ALL: [ElemType; 6] = [
        ElemType::F32,
        ElemType::F64,
        ElemType::ComplexF32,
        ElemType::ComplexF64,
        ElemType::DualF32,
        ElemType::DualF64,
    ];

    pub fn lanes(self) -> usize {
        match self {
            ElemType::F32 | ElemType::F64 => 1,
            _ => 2,
        }
    }

    /// Size of one real lane in bytes.
    pub fn lane_bytes(self) -> usize {
        match self {
            ElemType::F32 | ElemType::ComplexF32 | ElemType::DualF32 => 4,
            _ => 8,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ElemType::F32 => "f32",
            ElemType::F64 => "f64",
            ElemType::ComplexF32 => "complex-f32",
            ElemType::ComplexF64 => "complex-f64",
            ElemType::DualF32 => "dual-f32",
            ElemType::DualF64 => "dual-f64",
        }
    }
}

impl fmt::Display for ElemType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for ElemType {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ElemType::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| format!("unknown element type `{s}`"))
    }
}

/// A value that can live in a tile.
pub trait Element:
    Copy
    + Default
    + PartialEq
    + fmt::Debug
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
{
    type Real: Real;
    const LANES: usize;
    const TYPE: ElemType;

    fn zero() -> Self;
    fn one() -> Self;
    fn lane(&self, i: usize) -> Self::Real;
    fn from_lanes(lanes: &[Self::Real]) -> Self;
    fn from_f64(v: f64) -> Self;
    /// Multiplicative inverse, if it exists.
    fn try_recip(self) -> Option<Self>;
    /// `max(x, 0)`; applied lane-wise for complex values and on the value
    /// part for dual numbers (derivative zeroed where the value is clamped).
    fn relu(self) -> Self;

    fn is_zero(&self) -> bool {
        *self == Self::zero()
    }

    /// The operator the BLAS-like interface picks for this element type.
    fn default_operator(shape: OperatorShape) -> Arc<dyn Operator<Self>>;
}

/// A real floating-point lane type (`f32` or `f64`).
pub trait Real: Element<Real = Self> + Float + AddAssign + SubAssign + num_traits::AsPrimitive<f64> {
    fn from_f64_lossy(v: f64) -> Self;
}

macro_rules! real_element {
    ($t:ty, $tag:expr) => {
        impl Element for $t {
            type Real = $t;
            const LANES: usize = 1;
            const TYPE: ElemType = $tag;

            #[inline(always)]
            fn zero() -> Self {
                0.0
            }
            #[inline(always)]
            fn one() -> Self {
                1.0
            }
            #[inline(always)]
            fn lane(&self, _i: usize) -> $t {
                *self
            }
            #[inline(always)]
            fn from_lanes(lanes: &[$t]) -> Self {
                lanes[0]
            }
            fn from_f64(v: f64) -> Self {
                v as $t
            }
            fn try_recip(self) -> Option<Self> {
                (self != 0.0).then(|| 1.0 / self)
            }
            #[inline(always)]
            fn relu(self) -> Self {
                if self > 0.0 {
                    self
                } else {
                    0.0
                }
            }
            fn default_operator(shape: OperatorShape) -> Arc<dyn Operator<Self>> {
                Arc::new(FmaOp::new(shape))
            }
        }

        impl Real for $t {
            fn from_f64_lossy(v: f64) -> Self {
                v as $t
            }
        }
    };
}

real_element!(f32, ElemType::F32);
real_element!(f64, ElemType::F64);

macro_rules! complex_element {
    ($r:ty, $tag:expr) => {
        impl Element for Complex<$r> {
            type Real = $r;
            const LANES: usize = 2;
            const TYPE: ElemType = $tag;

            fn zero() -> Self {
                Complex::new(0.0, 0.0)
            }
            fn one() -> Self {
                Complex::new(1.0, 0.0)
            }
            #[inline(always)]
            fn lane(&self, i: usize) -> $r {
                if i == 0 {
                    self.re
                } else {
                    self.im
                }
            }
            #[inline(always)]
            fn from_lanes(lanes: &[$r]) -> Self {
                Complex::new(lanes[0], lanes[1])
            }
            fn from_f64(v: f64) -> Self {
                Complex::new(v as $r, 0.0)
            }
            fn try_recip(self) -> Option<Self> {
                (self.norm_sqr() != 0.0).then(|| self.inv())
            }
            fn relu(self) -> Self {
                Complex::new(self.re.relu(), self.im.relu())
            }
            fn default_operator(shape: OperatorShape) -> Arc<dyn Operator<Self>> {
                Arc::new(ComplexOp::new(shape))
            }
        }
    };
}

complex_element!(f32, ElemType::ComplexF32);
complex_element!(f64, ElemType::ComplexF64);

/// A dual number `value + epsilon·ε` with `ε² = 0`.
///
/// Multiplying duals propagates first derivatives, so a GEMM over dual
/// matrices `A0 + εA1`, `B0 + εB1` yields `A0·B0 + ε(A0·B1 + A1·B0)`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
#[repr(C)]
pub struct Dual<R> {
    pub value: R,
    pub epsilon: R,
}

impl<R> Dual<R> {
    pub const fn new(value: R, epsilon: R) -> Self {
        Dual { value, epsilon }
    }
}

impl<R: Real> Add for Dual<R> {
    type Output = Self;
    #[inline]
    fn add(self, o: Self) -> Self {
        Dual::new(self.value + o.value, self.epsilon + o.epsilon)
    }
}

impl<R: Real> Sub for Dual<R> {
    type Output = Self;
    #[inline]
    fn sub(self, o: Self) -> Self {
        Dual::new(self.value - o.value, self.epsilon - o.epsilon)
    }
}

impl<R: Real> Mul for Dual<R> {
    type Output = Self;
    #[inline]
    fn mul(self, o: Self) -> Self {
        Dual::new(self.value * o.value, self.value * o.epsilon + self.epsilon * o.value)
    }
}

impl<R: Real> Div for Dual<R> {
    type Output = Self;
    fn div(self, o: Self) -> Self {
        let v = self.value / o.value;
        Dual::new(v, (self.epsilon - v * o.epsilon) / o.value)
    }
}

impl<R: Real> Neg for Dual<R> {
    type Output = Self;
    fn neg(self) -> Self {
        Dual::new(-self.value, -self.epsilon)
    }
}

impl<R: Real + fmt::Display> fmt::Display for Dual<R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}+{}ε", self.value, self.epsilon)
    }
}

macro_rules! dual_element {
    ($r:ty, $tag:expr) => {
        impl Element for Dual<$r> {
            type Real = $r;
            const LANES: usize = 2;
            const TYPE: ElemType = $tag;

            fn zero() -> Self {
                Dual::new(0.0, 0.0)
            }
            fn one() -> Self {
                Dual::new(1.0, 0.0)
            }
            #[inline(always)]
            fn lane(&self, i: usize) -> $r {
                if i == 0 {
                    self.value
                } else {
                    self.epsilon
                }
            }
            #[inline(always)]
            fn from_lanes(lanes: &[$r]) -> Self {
                Dual::new(lanes[0], lanes[1])
            }
            fn from_f64(v: f64) -> Self {
                Dual::new(v as $r, 0.0)
            }
            fn try_recip(self) -> Option<Self> {
                (self.value != 0.0).then(|| Dual::new(1.0, 0.0) / self)
            }
            fn relu(self) -> Self {
                if self.value > 0.0 {
                    self
                } else {
                    Dual::new(0.0, 0.0)
                }
            }
            fn default_operator(shape: OperatorShape) -> Arc<dyn Operator<Self>> {
                Arc::new(DualOp::new(shape))
            }
        }
    };
}

dual_element!(f32, ElemType::DualF32);
dual_element!(f64, ElemType::DualF64);

/// Lane-wise conversion between element types of the same kind.
///
/// Widening (`f32 → f64`) is exact; narrowing rounds to nearest.
pub trait ConvertTo<T: Element>: Element {
    fn convert(self) -> T;
}

macro_rules! convert_real {
    ($($from:ty => $to:ty),*) => {$(
        impl ConvertTo<$to> for $from {
            #[inline(always)]
            fn convert(self) -> $to {
                self as $to
            }
        }
        impl ConvertTo<Complex<$to>> for Complex<$from> {
            #[inline(always)]
            fn convert(self) -> Complex<$to> {
                Complex::new(self.re as $to, self.im as $to)
            }
        }
        impl ConvertTo<Dual<$to>> for Dual<$from> {
            #[inline(always)]
            fn convert(self) -> Dual<$to> {
                Dual::new(self.value as $to, self.epsilon as $to)
            }
        }
    )*};
}

convert_real!(f32 => f32, f32 => f64, f64 => f64, f64 => f32);

/// Reinterprets a slice of elements as its real lanes.
pub fn as_lanes<E: Element>(values: &[E]) -> &[E::Real] {
    assert_eq!(std::mem::size_of::<E>(), E::LANES * std::mem::size_of::<E::Real>());
    // SAFETY: every element type is either a real scalar or a `#[repr(C)]`
    // pair of reals (`num_complex::Complex` and `Dual` are both repr(C)),
    // so a slice of `n` elements is exactly `n * LANES` contiguous reals.
    unsafe { std::slice::from_raw_parts(values.as_ptr().cast(), values.len() * E::LANES) }
}

/// Mutable counterpart of [`as_lanes`].
pub fn as_lanes_mut<E: Element>(values: &mut [E]) -> &mut [E::Real] {
    assert_eq!(std::mem::size_of::<E>(), E::LANES * std::mem::size_of::<E::Real>());
    // SAFETY: see `as_lanes`.
    unsafe { std::slice::from_raw_parts_mut(values.as_mut_ptr().cast(), values.len() * E::LANES) }
}
