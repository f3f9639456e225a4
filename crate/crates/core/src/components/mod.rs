//! Pluggable kernel pieces: parameters, transforms, epilogues and the
//! inner-loop predicate.

pub mod epilogue;
pub mod params;
pub mod predicate;
pub(crate) mod stream;
pub mod transform;

pub use epilogue::{run_epilogue, BiasAxis, Epilogue, EpilogueStats};
pub use params::{
    candidate_blocks, resolve_params, BudgetScope, Params, PartialParams, ScratchModel, TileShape,
    DEFAULT_SCRATCH_BUDGET,
};
pub use predicate::Predicate;
pub use transform::{apply_transform, Transform, Transforms};
