use std::fmt;

use crate::element::ElemType;
use crate::error::{Error, Result};
use crate::layout::{Layout, LayoutKind};
use crate::operator::OperatorShape;
use crate::tiling::DimName;

/// Extents along `M`, `N` and `K`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TileShape {
    pub m: usize,
    pub n: usize,
    pub k: usize,
}

impl TileShape {
    pub const fn new(m: usize, n: usize, k: usize) -> Self {
        TileShape { m, n, k }
    }
}

impl fmt::Display for TileShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}x{}", self.m, self.n, self.k)
    }
}

impl From<OperatorShape> for TileShape {
    fn from(s: OperatorShape) -> Self {
        TileShape::new(s.m, s.n, s.k)
    }
}

/// Which scratch tiles count against the budget.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BudgetScope {
    /// A and B tiles only.
    Inputs,
    /// A and B tiles plus the staged C/D tile.
    #[default]
    InputsAndAccumulator,
}

/// Shared-memory layouts and compute element type, used to size scratch.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScratchModel {
    pub a: LayoutKind,
    pub b: LayoutKind,
    pub c: LayoutKind,
    pub elem: ElemType,
}

impl ScratchModel {
    /// Column-major scratch (split lanes for two-lane types).
    pub fn dense(elem: ElemType) -> Self {
        let kind = if elem.lanes() == 2 {
            LayoutKind::split(LayoutKind::ColMajor)
        } else {
            LayoutKind::ColMajor
        };
        ScratchModel {
            a: kind.clone(),
            b: kind.clone(),
            c: kind,
            elem,
        }
    }

    fn bytes(&self, kind: &LayoutKind, rows: usize, cols: usize) -> Result<usize> {
        let l = Layout::new(kind.clone(), self.elem, &[rows, cols])?;
        Ok(l.physical_size() * self.elem.lane_bytes())
    }

    /// Scratch bytes one worker needs for `block`.
    pub fn footprint(&self, block: TileShape, scope: BudgetScope) -> Result<usize> {
        let mut total = self.bytes(&self.a, block.m, block.k)? + self.bytes(&self.b, block.k, block.n)?;
        if scope == BudgetScope::InputsAndAccumulator {
            total += self.bytes(&self.c, block.m, block.n)?;
        }
        Ok(total)
    }
}

/// Fully resolved kernel parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Params {
    pub gemm_shape: TileShape,
    pub block: TileShape,
    /// `m × n` is the tile one intra-block entity owns; `k` is the stride of
    /// its inner loop.
    pub warp: TileShape,
    pub op: OperatorShape,
    pub workers_per_block: usize,
    pub worker_threads: usize,
    pub scratch_budget: usize,
    pub budget_scope: BudgetScope,
}

/// User-specified subset of [`Params`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PartialParams {
    pub gemm_shape: TileShape,
    /// Block `(M, N)` extents.
    pub block_mn: Option<(usize, usize)>,
    pub block_k: Option<usize>,
    pub warp: Option<TileShape>,
    pub op: Option<OperatorShape>,
    pub workers_per_block: Option<usize>,
    pub worker_threads: Option<usize>,
    pub scratch_budget: Option<usize>,
    pub budget_scope: Option<BudgetScope>,
}

pub const DEFAULT_SCRATCH_BUDGET: usize = 64 * 1024;

impl PartialParams {
    pub fn new(gemm_shape: TileShape) -> Self {
        PartialParams {
            gemm_shape,
            block_mn: None,
            block_k: None,
            warp: None,
            op: None,
            workers_per_block: None,
            worker_threads: None,
            scratch_budget: None,
            budget_scope: None,
        }
    }

    pub fn with_block(mut self, block: TileShape) -> Self {
        self.block_mn = Some((block.m, block.n));
        self.block_k = Some(block.k);
        self
    }
}

impl From<Params> for PartialParams {
    fn from(p: Params) -> Self {
        PartialParams {
            gemm_shape: p.gemm_shape,
            block_mn: Some((p.block.m, p.block.n)),
            block_k: Some(p.block.k),
            warp: Some(p.warp),
            op: Some(p.op),
            workers_per_block: Some(p.workers_per_block),
            worker_threads: Some(p.worker_threads),
            scratch_budget: Some(p.scratch_budget),
            budget_scope: Some(p.budget_scope),
        }
    }
}

/// The candidate `(M, N)` block faces: `s × s` and `2s × s` for powers of
/// two `s`, kept when they are multiples of the operator and divide the
/// problem.
pub fn candidate_blocks(gemm: TileShape, op: OperatorShape) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut s = 1usize;
    while s <= gemm.m.max(gemm.n) {
        for (bm, bn) in [(s, s), (2 * s, s)] {
            if bm % op.m == 0 && bn % op.n == 0 && gemm.m % bm == 0 && gemm.n % bn == 0 {
                out.push((bm, bn));
            }
        }
        s *= 2;
    }
    out
}

fn check_divides(what: &'static str, dim: DimName, inner: usize, outer: usize) -> Result<()> {
    if inner == 0 || outer % inner != 0 {
        return Err(Error::NotDivisible {
            what,
            dim,
            size: outer,
            by: inner,
        });
    }
    Ok(())
}

fn default_split(extent: usize, unit: usize, parts: &[usize]) -> usize {
    parts
        .iter()
        .map(|&p| extent / p)
        .find(|&w| w >= unit && w % unit == 0 && extent % w == 0)
        .unwrap_or(extent)
}

/// Fills in unspecified fields and checks every tiling constraint.
///
/// An unspecified block face is the largest-area candidate from
/// [`candidate_blocks`] whose scratch footprint fits the budget.
pub fn resolve_params(partial: &PartialParams, scratch: &ScratchModel) -> Result<Params> {
    let gemm = partial.gemm_shape;
    if gemm.m == 0 || gemm.n == 0 || gemm.k == 0 {
        return Err(Error::config(
            "gemm_shape",
            format!("extents must be positive, got {gemm}"),
        ));
    }
    let op = partial.op.unwrap_or_default();
    if op.m == 0 || op.n == 0 || op.k == 0 {
        return Err(Error::config("op", format!("extents must be positive, got {op}")));
    }
    let budget = partial.scratch_budget.unwrap_or(DEFAULT_SCRATCH_BUDGET);
    let scope = partial.budget_scope.unwrap_or_default();
    let bk = partial.block_k.unwrap_or(op.k);

    let (bm, bn) = match partial.block_mn {
        Some(b) => b,
        None => {
            let mut best: Option<(usize, usize)> = None;
            for (bm, bn) in candidate_blocks(gemm, op) {
                let fits = scratch.footprint(TileShape::new(bm, bn, bk), scope)? <= budget;
                if fits && best.map_or(true, |(m, n)| bm * bn > m * n) {
                    best = Some((bm, bn));
                }
            }
            best.ok_or_else(|| {
                Error::config(
                    "block",
                    format!(
                        "no candidate block tile for {gemm} with operator {op} fits a scratch budget of {budget} bytes"
                    ),
                )
            })?
        }
    };
    let block = TileShape::new(bm, bn, bk);

    let warp = partial.warp.unwrap_or_else(|| {
        TileShape::new(
            default_split(bm, op.m, &[2, 1]),
            default_split(bn, op.n, &[4, 2, 1]),
            op.k,
        )
    });

    let (m, n, k) = (DimName::M, DimName::N, DimName::K);
    check_divides("operator shape into warp tile", m, op.m, warp.m)?;
    check_divides("operator shape into warp tile", n, op.n, warp.n)?;
    check_divides("operator shape into warp tile", k, op.k, warp.k)?;
    check_divides("warp tile into block tile", m, warp.m, block.m)?;
    check_divides("warp tile into block tile", n, warp.n, block.n)?;
    check_divides("warp tile into block tile", k, warp.k, block.k)?;
    check_divides("block tile into problem", m, block.m, gemm.m)?;
    check_divides("block tile into problem", n, block.n, gemm.n)?;
    check_divides("block tile into problem", k, block.k, gemm.k)?;

    let warp_tiles = (bm / warp.m) * (bn / warp.n);
    let workers_per_block = partial.workers_per_block.unwrap_or(warp_tiles);
    if workers_per_block == 0 || warp_tiles % workers_per_block != 0 {
        return Err(Error::config(
            "workers_per_block",
            format!("{workers_per_block} does not divide the {warp_tiles} warp tiles of a block"),
        ));
    }
    let worker_threads = partial.worker_threads.unwrap_or(1);
    if worker_threads == 0 {
        return Err(Error::config("worker_threads", "must be at least 1"));
    }
    let need = scratch.footprint(block, scope)?;
    if need > budget {
        return Err(Error::config(
            "scratch_budget",
            format!("block {block} needs {need} bytes of scratch, budget is {budget}"),
        ));
    }
    Ok(Params {
        gemm_shape: gemm,
        block,
        warp,
        op,
        workers_per_block,
        worker_threads,
        scratch_budget: budget,
        budget_scope: scope,
    })
}
