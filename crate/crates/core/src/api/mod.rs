//! User-facing entry points: the fully configurable [`matmul`] and the
//! BLAS-like [`gemm_ex`].

mod blas;
pub mod variants;

use std::marker::PhantomData;
use std::sync::Arc;

pub use blas::{
    gemm_ex, gemm_ex_dyn, supported_type_combinations, tilekit_gemm_ex, BlasElement, GemmExArgs, GemmExOptions,
    Transpose, FFI_ERR_CONFIG, FFI_ERR_NULL, FFI_ERR_TYPES, FFI_OK,
};

use crate::components::{
    resolve_params, BudgetScope, Epilogue, PartialParams, Predicate, ScratchModel, TileShape, Transforms,
};
use crate::element::{ConvertTo, ElemType};
use crate::error::{Error, Result};
use crate::kernel::{EventCounters, Kernel, KernelConfig, Layouts};
use crate::layout::{Layout, LayoutKind};
use crate::operator::{Operator, OperatorShape};

/// Column-major global layout for `elem` (lanes interleaved when there are
/// two).
pub fn default_global_kind(elem: ElemType) -> LayoutKind {
    if elem.lanes() == 2 {
        LayoutKind::interleaved(LayoutKind::ColMajor)
    } else {
        LayoutKind::ColMajor
    }
}

/// Column-major scratch layout for `elem` (lanes split when there are two).
pub fn default_shared_kind(elem: ElemType) -> LayoutKind {
    if elem.lanes() == 2 {
        LayoutKind::split(LayoutKind::ColMajor)
    } else {
        LayoutKind::ColMajor
    }
}

/// Builder for a kernel configuration. Every unset field gets a default
/// when the configuration is resolved.
#[derive(Debug, Clone)]
pub struct MatmulConfig<S, T> {
    pub params: PartialParams,
    pub global_a: Option<LayoutKind>,
    /// Defaults to the layout of A.
    pub global_b: Option<LayoutKind>,
    pub global_c: Option<LayoutKind>,
    /// Defaults to the layout of C (dense when C is `Zero`).
    pub global_d: Option<LayoutKind>,
    pub shared_a: Option<LayoutKind>,
    /// Defaults to the scratch layout of A.
    pub shared_b: Option<LayoutKind>,
    pub shared_c: Option<LayoutKind>,
    pub transforms: Transforms<T>,
    pub operator: Option<Arc<dyn Operator<T>>>,
    pub epilogue: Epilogue<T>,
    pub predicate: Option<Predicate>,
    storage: PhantomData<fn() -> S>,
}

impl<S, T> MatmulConfig<S, T>
where
    S: ConvertTo<T>,
    T: ConvertTo<S>,
{
    /// A plain `D = A·B + C` of the given shape.
    pub fn new(m: usize, n: usize, k: usize) -> Self {
        MatmulConfig {
            params: PartialParams::new(TileShape::new(m, n, k)),
            global_a: None,
            global_b: None,
            global_c: None,
            global_d: None,
            shared_a: None,
            shared_b: None,
            shared_c: None,
            transforms: Transforms::default(),
            operator: None,
            epilogue: Epilogue::DefaultCopy,
            predicate: Some(Predicate::Always),
            storage: PhantomData,
        }
    }

    pub fn block(mut self, block: TileShape) -> Self {
        self.params = self.params.with_block(block);
        self
    }

    pub fn block_k(mut self, k: usize) -> Self {
        self.params.block_k = Some(k);
        self
    }

    pub fn warp(mut self, warp: TileShape) -> Self {
        self.params.warp = Some(warp);
        self
    }

    pub fn op_shape(mut self, op: OperatorShape) -> Self {
        self.params.op = Some(op);
        self
    }

    pub fn workers_per_block(mut self, n: usize) -> Self {
        self.params.workers_per_block = Some(n);
        self
    }

    pub fn threads(mut self, n: usize) -> Self {
        self.params.worker_threads = Some(n);
        self
    }

    pub fn scratch_budget(mut self, bytes: usize, scope: BudgetScope) -> Self {
        self.params.scratch_budget = Some(bytes);
        self.params.budget_scope = Some(scope);
        self
    }

    pub fn global_a(mut self, kind: LayoutKind) -> Self {
        self.global_a = Some(kind);
        self
    }

    pub fn global_b(mut self, kind: LayoutKind) -> Self {
        self.global_b = Some(kind);
        self
    }

    pub fn global_c(mut self, kind: LayoutKind) -> Self {
        self.global_c = Some(kind);
        self
    }

    pub fn global_d(mut self, kind: LayoutKind) -> Self {
        self.global_d = Some(kind);
        self
    }

    pub fn shared_a(mut self, kind: LayoutKind) -> Self {
        self.shared_a = Some(kind);
        self
    }

    pub fn shared_b(mut self, kind: LayoutKind) -> Self {
        self.shared_b = Some(kind);
        self
    }

    pub fn shared_c(mut self, kind: LayoutKind) -> Self {
        self.shared_c = Some(kind);
        self
    }

    pub fn transforms(mut self, t: Transforms<T>) -> Self {
        self.transforms = t;
        self
    }

    pub fn operator(mut self, op: Arc<dyn Operator<T>>) -> Self {
        self.operator = Some(op);
        self
    }

    pub fn epilogue(mut self, e: Epilogue<T>) -> Self {
        self.epilogue = e;
        self
    }

    pub fn predicate(mut self, p: Predicate) -> Self {
        self.predicate = Some(p);
        self
    }

    /// Removes the predicate check from the block-K loop altogether.
    pub fn without_predicate(mut self) -> Self {
        self.predicate = None;
        self
    }

    /// The global layout kinds after defaulting, in A, B, C, D order.
    pub fn global_kinds(&self) -> [LayoutKind; 4] {
        let a = self.global_a.clone().unwrap_or_else(|| default_global_kind(S::TYPE));
        let b = self.global_b.clone().unwrap_or_else(|| a.clone());
        let c = self.global_c.clone().unwrap_or_else(|| default_global_kind(S::TYPE));
        let d = self.global_d.clone().unwrap_or_else(|| {
            if c.is_zero() {
                default_global_kind(S::TYPE)
            } else {
                c.clone()
            }
        });
        [a, b, c, d]
    }

    /// The scratch model after defaulting.
    pub fn scratch_model(&self) -> ScratchModel {
        let a = self.shared_a.clone().unwrap_or_else(|| default_shared_kind(T::TYPE));
        let b = self.shared_b.clone().unwrap_or_else(|| a.clone());
        let c = self.shared_c.clone().unwrap_or_else(|| default_shared_kind(T::TYPE));
        ScratchModel { a, b, c, elem: T::TYPE }
    }

    /// Applies defaults and checks the result.
    pub fn resolve(&self) -> Result<KernelConfig<S, T>> {
        let model = self.scratch_model();
        let params = resolve_params(&self.params, &model)?;
        let (g, blk) = (params.gemm_shape, params.block);
        let bind = |field: &'static str, kind: LayoutKind, elem: ElemType, rows: usize, cols: usize| {
            Layout::new(kind, elem, &[rows, cols]).map_err(|e| Error::config(field, e.to_string()))
        };
        let [ga, gb, gc, gd] = self.global_kinds();
        let layouts = Layouts {
            global_a: bind("global_a", ga, S::TYPE, g.m, g.k)?,
            global_b: bind("global_b", gb, S::TYPE, g.k, g.n)?,
            global_c: bind("global_c", gc, S::TYPE, g.m, g.n)?,
            global_d: bind("global_d", gd, S::TYPE, g.m, g.n)?,
            shared_a: bind("shared_a", model.a, T::TYPE, blk.m, blk.k)?,
            shared_b: bind("shared_b", model.b, T::TYPE, blk.k, blk.n)?,
            shared_c: bind("shared_c", model.c, T::TYPE, blk.m, blk.n)?,
        };
        let operator = self.operator.clone().unwrap_or_else(|| T::default_operator(params.op));
        let mut cfg = KernelConfig::new(params, layouts, operator);
        cfg.transforms = self.transforms.clone();
        cfg.epilogue = self.epilogue.clone();
        cfg.predicate = self.predicate.clone();
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Resolves `config` and runs it once. Buffers hold real lanes laid out as
/// the resolved global layouts describe.
pub fn matmul<S, T>(
    config: &MatmulConfig<S, T>,
    a: &[S::Real],
    b: &[S::Real],
    c: &[S::Real],
    d: &mut [S::Real],
) -> Result<EventCounters>
where
    S: ConvertTo<T>,
    T: ConvertTo<S>,
{
    Kernel::new(config.resolve()?)?.execute(a, b, c, d)
}
