use std::ffi::c_void;

use num_complex::Complex;

use super::{default_global_kind, MatmulConfig};
use crate::components::{Predicate, TileShape, Transform, Transforms};
use crate::element::{as_lanes, as_lanes_mut, ConvertTo, Dual, ElemType};
use crate::error::{Error, Result};
use crate::kernel::{EventCounters, Kernel};
use crate::layout::LayoutKind;
use crate::operator::OperatorShape;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Transpose {
    #[default]
    No,
    Yes,
}

impl Transpose {
    fn kind(self) -> LayoutKind {
        match self {
            Transpose::No => LayoutKind::ColMajor,
            Transpose::Yes => LayoutKind::RowMajor,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct GemmExOptions {
    /// Accumulate in the next wider type (`f32` → `f64`).
    pub wide_accumulate: bool,
    /// Worker threads; 0 means 1.
    pub threads: usize,
    pub block: Option<TileShape>,
    pub op: Option<OperatorShape>,
}

/// Element types [`gemm_ex`] accepts, with their widened compute type.
pub trait BlasElement: ConvertTo<Self> + ConvertTo<<Self as BlasElement>::Wide> {
    type Wide: ConvertTo<Self> + ConvertTo<<Self as BlasElement>::Wide>;
}

impl BlasElement for f32 {
    type Wide = f64;
}
impl BlasElement for f64 {
    type Wide = f64;
}
impl BlasElement for Complex<f32> {
    type Wide = Complex<f64>;
}
impl BlasElement for Complex<f64> {
    type Wide = Complex<f64>;
}
impl BlasElement for Dual<f32> {
    type Wide = Dual<f64>;
}
impl BlasElement for Dual<f64> {
    type Wide = Dual<f64>;
}

/// Operands of one [`gemm_ex`] call; all matrices column-major.
#[derive(Debug)]
pub struct GemmExArgs<'a, E> {
    pub trans_a: Transpose,
    pub trans_b: Transpose,
    pub m: usize,
    pub n: usize,
    pub k: usize,
    pub alpha: E,
    /// `m × k`, or `k × m` when transposed.
    pub a: &'a [E],
    /// `k × n`, or `n × k` when transposed.
    pub b: &'a [E],
    pub beta: E,
    /// `m × n`, overwritten with the result.
    pub c: &'a mut [E],
}

/// `C ← alpha · op(A) · op(B) + beta · C`.
///
/// Transposition selects a row-major layout instead of moving data. The
/// scalars become transforms: C is scaled by `beta / alpha` on its way into
/// scratch and the accumulators by `alpha` on their way out. With
/// `alpha = 0` every inner iteration is skipped; with `beta = 0` C is never
/// read.
pub fn gemm_ex<E: BlasElement>(args: GemmExArgs<'_, E>, opts: &GemmExOptions) -> Result<EventCounters> {
    if opts.wide_accumulate {
        run::<E, E::Wide>(args, opts)
    } else {
        run::<E, E>(args, opts)
    }
}

fn run<S, T>(args: GemmExArgs<'_, S>, opts: &GemmExOptions) -> Result<EventCounters>
where
    S: ConvertTo<T>,
    T: ConvertTo<S>,
{
    let GemmExArgs {
        trans_a,
        trans_b,
        m,
        n,
        k,
        alpha,
        a,
        b,
        beta,
        c,
    } = args;
    let alpha: T = alpha.convert();
    let beta: T = beta.convert();
    let lanes = |kind: LayoutKind| {
        if S::LANES == 2 {
            LayoutKind::interleaved(kind)
        } else {
            kind
        }
    };
    let dense = default_global_kind(S::TYPE);
    let mut cfg = MatmulConfig::<S, T>::new(m, n, k)
        .global_a(lanes(trans_a.kind()))
        .global_b(lanes(trans_b.kind()))
        .global_c(if beta.is_zero() {
            LayoutKind::Zero
        } else {
            dense.clone()
        })
        .global_d(dense)
        .threads(opts.threads.max(1));
    if let Some(block) = opts.block {
        cfg = cfg.block(block);
    }
    if let Some(op) = opts.op {
        cfg = cfg.op_shape(op);
    }

    let scale = |s: T| {
        if s == T::one() {
            Transform::Identity
        } else {
            Transform::Scale(s)
        }
    };
    let mut t = Transforms::default();
    if alpha.is_zero() {
        cfg = cfg.predicate(Predicate::Never);
        t.global_to_shared_c = scale(beta);
    } else {
        if !beta.is_zero() {
            let inv = alpha
                .try_recip()
                .ok_or_else(|| Error::config("alpha", format!("{alpha:?} has no inverse")))?;
            t.global_to_shared_c = scale(beta * inv);
        }
        t.regs_to_shared_d = scale(alpha);
    }
    let cfg = cfg.transforms(t);
    let mut kernel = Kernel::new(cfg.resolve()?)?;
    kernel.execute_in_place(as_lanes(a), as_lanes(b), as_lanes_mut(c))
}

/// Every accepted `(A, B, C, compute)` type combination.
pub fn supported_type_combinations() -> Vec<[ElemType; 4]> {
    use ElemType::*;
    let mut v = Vec::new();
    for t in ElemType::ALL {
        v.push([t, t, t, t]);
        let wide = match t {
            F32 => Some(F64),
            ComplexF32 => Some(ComplexF64),
            DualF32 => Some(DualF64),
            _ => None,
        };
        if let Some(w) = wide {
            v.push([t, t, t, w]);
        }
    }
    v
}

fn check_types(types: [ElemType; 4]) -> Result<bool> {
    if supported_type_combinations().contains(&types) {
        return Ok(types[3] != types[0]);
    }
    let list = supported_type_combinations()
        .iter()
        .map(|[a, _, _, t]| format!("{a}/{a}/{a}->{t}"))
        .collect::<Vec<_>>()
        .join(", ");
    Err(Error::UnsupportedTypes {
        requested: format!("{}/{}/{}->{}", types[0], types[1], types[2], types[3]),
        supported: list,
    })
}

/// Runtime-typed entry point. Buffers are raw lanes.
///
/// # Safety
/// `alpha` and `beta` must each point to one element of the storage type,
/// `a`, `b` and `c` to `m·k`, `k·n` and `m·n` elements respectively, and `c`
/// must not overlap `a` or `b`.
#[allow(clippy::too_many_arguments)]
pub unsafe fn gemm_ex_dyn(
    types: [ElemType; 4],
    trans_a: Transpose,
    trans_b: Transpose,
    m: usize,
    n: usize,
    k: usize,
    alpha: *const c_void,
    a: *const c_void,
    b: *const c_void,
    beta: *const c_void,
    c: *mut c_void,
    opts: &GemmExOptions,
) -> Result<EventCounters> {
    let wide_accumulate = check_types(types)?;
    let opts = GemmExOptions {
        wide_accumulate,
        ..*opts
    };
    macro_rules! call {
        ($e:ty) => {{
            let args = GemmExArgs::<$e> {
                trans_a,
                trans_b,
                m,
                n,
                k,
                alpha: *(alpha as *const $e),
                a: std::slice::from_raw_parts(a as *const $e, m * k),
                b: std::slice::from_raw_parts(b as *const $e, k * n),
                beta: *(beta as *const $e),
                c: std::slice::from_raw_parts_mut(c as *mut $e, m * n),
            };
            gemm_ex(args, &opts)
        }};
    }
    match types[0] {
        ElemType::F32 => call!(f32),
        ElemType::F64 => call!(f64),
        ElemType::ComplexF32 => call!(Complex<f32>),
        ElemType::ComplexF64 => call!(Complex<f64>),
        ElemType::DualF32 => call!(Dual<f32>),
        ElemType::DualF64 => call!(Dual<f64>),
    }
}

pub const FFI_OK: i32 = 0;
pub const FFI_ERR_NULL: i32 = 1;
pub const FFI_ERR_TYPES: i32 = 2;
pub const FFI_ERR_CONFIG: i32 = 3;

/// C export of [`gemm_ex`].
///
/// Type tags index `f32, f64, complex-f32, complex-f64, dual-f32,
/// dual-f64` from 0. Transpose flags are 0 or 1. Returns [`FFI_OK`] or one
/// of the `FFI_ERR_*` codes.
///
/// # Safety
/// As for [`gemm_ex_dyn`].
#[no_mangle]
pub unsafe extern "C" fn tilekit_gemm_ex(
    type_a: u32,
    type_b: u32,
    type_c: u32,
    compute_type: u32,
    trans_a: u32,
    trans_b: u32,
    m: usize,
    n: usize,
    k: usize,
    alpha: *const c_void,
    a: *const c_void,
    b: *const c_void,
    beta: *const c_void,
    c: *mut c_void,
    threads: usize,
) -> i32 {
    if [alpha, a, b, beta].iter().any(|p| p.is_null()) || c.is_null() {
        return FFI_ERR_NULL;
    }
    let tag = |t: u32| ElemType::ALL.get(t as usize).copied();
    let (Some(ta), Some(tb), Some(tc), Some(tt)) = (tag(type_a), tag(type_b), tag(type_c), tag(compute_type)) else {
        return FFI_ERR_TYPES;
    };
    let flag = |f: u32| if f == 0 { Transpose::No } else { Transpose::Yes };
    let opts = GemmExOptions {
        threads,
        ..Default::default()
    };
    match gemm_ex_dyn(
        [ta, tb, tc, tt],
        flag(trans_a),
        flag(trans_b),
        m,
        n,
        k,
        alpha,
        a,
        b,
        beta,
        c,
        &opts,
    ) {
        Ok(_) => FFI_OK,
        Err(Error::UnsupportedTypes { .. }) => FFI_ERR_TYPES,
        Err(_) => FFI_ERR_CONFIG,
    }
}
