//! Tile algebra and a blocked GEMM kernel assembled from interchangeable
//! components.
//!
//! The kernel follows a fixed schedule (stage C, loop over K, write D) and
//! takes everything else as configuration: memory layouts, element-wise
//! transforms on every load and store, the multiply-accumulate operator, the
//! epilogue, and a predicate that can skip inner-loop iterations.
//!
//! ```
//! use tilekit::{matmul, MatmulConfig};
//!
//! let (m, n, k) = (16, 16, 16);
//! let a = vec![1.0f32; m * k];
//! let b = vec![2.0f32; k * n];
//! let c = vec![0.5f32; m * n];
//! let mut d = vec![0.0f32; m * n];
//! matmul(&MatmulConfig::<f32, f32>::new(m, n, k), &a, &b, &c, &mut d).unwrap();
//! assert!(d.iter().all(|&x| x == 32.5));
//! ```

pub mod api;
pub mod components;
pub mod element;
pub mod error;
pub mod kernel;
pub mod layout;
pub mod operator;
pub mod reference;
pub mod tiling;

pub use api::{gemm_ex, matmul, GemmExArgs, GemmExOptions, MatmulConfig, Transpose};
pub use components::{
    apply_transform, resolve_params, run_epilogue, BiasAxis, BudgetScope, Epilogue, Params, PartialParams, Predicate,
    ScratchModel, TileShape, Transform, Transforms,
};
pub use element::{as_lanes, as_lanes_mut, ConvertTo, Dual, ElemType, Element, Real};
pub use error::{Error, Result};
pub use kernel::{gemm_execute, EventCounters, Kernel, KernelConfig, Layouts};
pub use layout::{physical_size, Buffer, Layout, LayoutKind, TensorMap};
pub use operator::{load_a, load_b, load_c, mma, store_d, ComplexOp, DualOp, FmaOp, Fragment, Operator, OperatorShape};
pub use tiling::{linearise, parallelise, project, translate, Coord, DimName, Tile, TileIterator};
