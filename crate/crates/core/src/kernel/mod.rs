//! The blocked GEMM engine.
//!
//! Every output block runs the same five stages:
//!
//! 1. C tile global → scratch
//! 2. C scratch → accumulator fragments
//! 3. for each `block.k` slice: A and B global → scratch, then for each
//!    `warp.k` slice, A and B scratch → fragments and one operator call per
//!    fragment pair
//! 4. accumulators → scratch
//! 5. epilogue, scratch → global D
//!
//! Output blocks are spread over worker threads; the intra-block entities
//! (`workers_per_block`) run one after another inside a worker.

mod counters;
mod shared;

use std::marker::PhantomData;
use std::sync::Arc;

pub use counters::EventCounters;

use shared::RawShared;

use crate::components::epilogue::run_epilogue_into;
use crate::components::stream::{load_stream, StreamBuf};
use crate::components::{resolve_params, Epilogue, Params, PartialParams, Predicate, ScratchModel, Transforms};
use crate::element::{ConvertTo, Element, Real};
use crate::error::{Error, Result};
use crate::layout::{Layout, Source};
use crate::operator::Operator;
use crate::tiling::{Coord, DimName, Tile};

/// Global and scratch layouts of one kernel. D scratch shares `shared_c`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Layouts {
    pub global_a: Layout,
    pub global_b: Layout,
    pub global_c: Layout,
    pub global_d: Layout,
    pub shared_a: Layout,
    pub shared_b: Layout,
    pub shared_c: Layout,
}

/// Everything a kernel run needs besides the data. `S` is the storage
/// element type, `T` the compute type.
#[derive(Debug, Clone)]
pub struct KernelConfig<S, T> {
    pub params: Params,
    pub layouts: Layouts,
    pub transforms: Transforms<T>,
    pub operator: Arc<dyn Operator<T>>,
    pub epilogue: Epilogue<T>,
    /// `None` removes the predicate check from the block-K loop.
    pub predicate: Option<Predicate>,
    storage: PhantomData<fn() -> S>,
}

impl<S, T> KernelConfig<S, T>
where
    S: ConvertTo<T>,
    T: ConvertTo<S>,
{
    /// Identity transforms, default copy epilogue, constant-true predicate.
    pub fn new(params: Params, layouts: Layouts, operator: Arc<dyn Operator<T>>) -> Self {
        KernelConfig {
            params,
            layouts,
            transforms: Transforms::default(),
            operator,
            epilogue: Epilogue::DefaultCopy,
            predicate: Some(Predicate::Always),
            storage: PhantomData,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let p = &self.params;
        let l = &self.layouts;
        let model = ScratchModel {
            a: l.shared_a.kind().clone(),
            b: l.shared_b.kind().clone(),
            c: l.shared_c.kind().clone(),
            elem: T::TYPE,
        };
        let resolved = resolve_params(&PartialParams::from(*p), &model)?;
        debug_assert_eq!(&resolved, p);
        if self.operator.shape() != p.op {
            return Err(Error::config(
                "operator",
                format!("operator shape {} differs from params {}", self.operator.shape(), p.op),
            ));
        }
        let (g, b) = (p.gemm_shape, p.block);
        let checks: [(&'static str, &Layout, ElemCheck, (usize, usize)); 7] = [
            ("global_a", &l.global_a, ElemCheck::Storage, (g.m, g.k)),
            ("global_b", &l.global_b, ElemCheck::Storage, (g.k, g.n)),
            ("global_c", &l.global_c, ElemCheck::Storage, (g.m, g.n)),
            ("global_d", &l.global_d, ElemCheck::Storage, (g.m, g.n)),
            ("shared_a", &l.shared_a, ElemCheck::Compute, (b.m, b.k)),
            ("shared_b", &l.shared_b, ElemCheck::Compute, (b.k, b.n)),
            ("shared_c", &l.shared_c, ElemCheck::Compute, (b.m, b.n)),
        ];
        for (field, layout, check, want) in checks {
            let elem = match check {
                ElemCheck::Storage => S::TYPE,
                ElemCheck::Compute => T::TYPE,
            };
            if layout.elem() != elem {
                return Err(Error::config(
                    field,
                    format!("layout holds {} but the kernel uses {elem}", layout.elem()),
                ));
            }
            if layout.matrix_extents() != Some(want) {
                return Err(Error::config(
                    field,
                    format!(
                        "layout {} has extents {:?}, expected {}x{}",
                        layout.kind(),
                        layout.extents(),
                        want.0,
                        want.1
                    ),
                ));
            }
        }
        self.epilogue.validate(g.m, g.n)
    }

    /// Number of output blocks.
    pub fn block_count(&self) -> usize {
        let p = &self.params;
        (p.gemm_shape.m / p.block.m) * (p.gemm_shape.n / p.block.n)
    }

    /// Workers actually used: the largest divisor of the block count that
    /// does not exceed `worker_threads`.
    pub fn effective_threads(&self) -> usize {
        let blocks = self.block_count();
        (1..=self.params.worker_threads.min(blocks))
            .rev()
            .find(|t| blocks % t == 0)
            .unwrap_or(1)
    }
}

#[derive(Clone, Copy)]
enum ElemCheck {
    Storage,
    Compute,
}

/// Private scratch of one worker.
struct Worker<Rs, Rt> {
    shared_a: Vec<Rt>,
    shared_b: Vec<Rt>,
    shared_c: Vec<Rt>,
    acc: Vec<Rt>,
    a_frags: Vec<Rt>,
    b_frags: Vec<Rt>,
    stream: StreamBuf<Rs, Rt>,
    counters: EventCounters,
}

impl<Rs: Real, Rt: Real> Worker<Rs, Rt> {
    fn new(p: &Params, l: &Layouts, lanes: usize) -> Self {
        let (b, w, o) = (p.block, p.warp, p.op);
        Worker {
            shared_a: vec![<Rt as Element>::zero(); l.shared_a.physical_size()],
            shared_b: vec![<Rt as Element>::zero(); l.shared_b.physical_size()],
            shared_c: vec![<Rt as Element>::zero(); l.shared_c.physical_size()],
            acc: vec![<Rt as Element>::zero(); b.m * b.n * lanes],
            a_frags: vec![<Rt as Element>::zero(); w.m * o.k * lanes],
            b_frags: vec![<Rt as Element>::zero(); o.k * w.n * lanes],
            stream: StreamBuf::new(b.m.max(b.k), lanes),
            counters: EventCounters::default(),
        }
    }

    fn scalars(&self) -> usize {
        self.shared_a.len()
            + self.shared_b.len()
            + self.shared_c.len()
            + self.acc.len()
            + self.a_frags.len()
            + self.b_frags.len()
            + self.stream.scalars()
    }
}

/// A validated configuration with preallocated per-worker scratch.
pub struct Kernel<S: Element, T: Element> {
    config: KernelConfig<S, T>,
    workers: Vec<Worker<S::Real, T::Real>>,
    last: EventCounters,
}

impl<S, T> Kernel<S, T>
where
    S: ConvertTo<T>,
    T: ConvertTo<S>,
{
    pub fn new(config: KernelConfig<S, T>) -> Result<Self> {
        config.validate()?;
        let workers = (0..config.effective_threads())
            .map(|_| Worker::new(&config.params, &config.layouts, T::LANES))
            .collect();
        Ok(Kernel {
            config,
            workers,
            last: EventCounters::default(),
        })
    }

    pub fn config(&self) -> &KernelConfig<S, T> {
        &self.config
    }

    /// Total scratch scalars held across workers.
    pub fn scratch_scalars(&self) -> usize {
        self.workers.iter().map(Worker::scalars).sum()
    }

    /// Counters of the most recent run.
    pub fn snapshot_counters(&self) -> EventCounters {
        self.last
    }

    fn check_len(&self, name: &'static str, layout: &Layout, len: usize) -> Result<()> {
        if layout.physical_size() != len {
            return Err(Error::BufferSize {
                name,
                expected: layout.physical_size(),
                actual: len,
            });
        }
        Ok(())
    }

    /// `D = epilogue(A·B + C)` with all configured transforms. Buffers hold
    /// real lanes as laid out by the global layouts.
    pub fn execute(&mut self, a: &[S::Real], b: &[S::Real], c: &[S::Real], d: &mut [S::Real]) -> Result<EventCounters> {
        let l = &self.config.layouts;
        self.check_len("a", &l.global_a, a.len())?;
        self.check_len("b", &l.global_b, b.len())?;
        self.check_len("c", &l.global_c, c.len())?;
        self.check_len("d", &l.global_d, d.len())?;
        self.run(a, b, c, RawShared::new(d))
    }

    /// Like [`execute`](Self::execute) with C read from and D written to
    /// the same buffer. C and D must share a layout unless C is `Zero`.
    pub fn execute_in_place(&mut self, a: &[S::Real], b: &[S::Real], cd: &mut [S::Real]) -> Result<EventCounters> {
        let l = &self.config.layouts;
        if l.global_c.is_materialized() && l.global_c.kind() != l.global_d.kind() {
            return Err(Error::config(
                "global_c",
                "in-place execution needs identical C and D layouts",
            ));
        }
        self.check_len("a", &l.global_a, a.len())?;
        self.check_len("b", &l.global_b, b.len())?;
        self.check_len(
            "c",
            &l.global_c,
            if l.global_c.is_materialized() { cd.len() } else { 0 },
        )?;
        self.check_len("d", &l.global_d, cd.len())?;
        let shared = RawShared::new(cd);
        if l.global_c.is_materialized() {
            self.run(a, b, &shared, shared)
        } else {
            self.run(a, b, &[][..], shared)
        }
    }

    fn run<C>(&mut self, a: &[S::Real], b: &[S::Real], c: &C, d: RawShared<'_, S::Real>) -> Result<EventCounters>
    where
        C: Source<S::Real> + Sync + ?Sized,
    {
        let cfg = &self.config;
        let nw = self.workers.len();
        let results: Vec<Result<()>> = if nw == 1 {
            vec![run_worker(cfg, &mut self.workers[0], 0, 1, a, b, c, d)]
        } else {
            std::thread::scope(|s| {
                let handles: Vec<_> = self
                    .workers
                    .iter_mut()
                    .enumerate()
                    .map(|(w, worker)| s.spawn(move || run_worker(cfg, worker, w, nw, a, b, c, d)))
                    .collect();
                handles
                    .into_iter()
                    .map(|h| h.join().expect("kernel worker panicked"))
                    .collect()
            })
        };
        let mut total = EventCounters::default();
        for w in &self.workers {
            total += w.counters;
        }
        self.last = total;
        results.into_iter().collect::<Result<Vec<()>>>()?;
        Ok(total)
    }
}

/// Builds a kernel for `config` and runs it once.
pub fn gemm_execute<S, T>(
    config: &KernelConfig<S, T>,
    a: &[S::Real],
    b: &[S::Real],
    c: &[S::Real],
    d: &mut [S::Real],
) -> Result<EventCounters>
where
    S: ConvertTo<T>,
    T: ConvertTo<S>,
{
    Kernel::new(config.clone())?.execute(a, b, c, d)
}

fn tile2(d0: DimName, e0: usize, d1: DimName, e1: usize) -> Tile {
    Tile::with_extents(&[(d0, e0), (d1, e1)]).expect("positive extents")
}

#[inline]
fn at(t: &Tile, x: isize, y: isize) -> Tile {
    t.shifted(0, x).shifted(1, y)
}

#[allow(clippy::too_many_arguments)]
fn run_worker<S, T, C>(
    cfg: &KernelConfig<S, T>,
    w: &mut Worker<S::Real, T::Real>,
    index: usize,
    count: usize,
    a: &[S::Real],
    b: &[S::Real],
    c: &C,
    mut d: RawShared<'_, S::Real>,
) -> Result<()>
where
    S: ConvertTo<T>,
    T: ConvertTo<S>,
    C: Source<S::Real> + ?Sized,
{
    use DimName as D;
    let p = &cfg.params;
    let l = &cfg.layouts;
    let tr = &cfg.transforms;
    let op = &*cfg.operator;
    let (g, bs, ws, os) = (p.gemm_shape, p.block, p.warp, p.op);
    let lanes = T::LANES;
    let wpb = p.workers_per_block;
    w.counters = EventCounters::default();

    let problem = tile2(D::M, g.m, D::N, g.n);
    let block_mn = Coord::extents(&[(D::M, bs.m), (D::N, bs.n)])?;
    let warp_mn = Coord::extents(&[(D::M, ws.m), (D::N, ws.n)])?;
    let local_block = tile2(D::M, bs.m, D::N, bs.n);
    let a_block = tile2(D::M, bs.m, D::K, bs.k);
    let b_block = tile2(D::K, bs.k, D::N, bs.n);
    let block3 = Tile::with_extents(&[(D::M, bs.m), (D::N, bs.n), (D::K, bs.k)])?;
    let a_frag = tile2(D::M, os.m, D::K, os.k);
    let b_frag = tile2(D::K, os.k, D::N, os.n);
    let c_frag = tile2(D::M, os.m, D::N, os.n);
    let a_len = os.m * os.k * lanes;
    let b_len = os.k * os.n * lanes;
    let c_len = os.m * os.n * lanes;
    let frags_m = ws.m / os.m;
    let frags_n = ws.n / os.n;
    let slots_m = bs.m / os.m;
    let slot = |row: isize, col: isize| (row as usize / os.m + (col as usize / os.n) * slots_m) * c_len;

    for blk in problem.parallelise(&block_mn, index, count)? {
        let (m0, n0) = (blk.start(0), blk.start(1));
        let cnt = &mut w.counters;

        // 1. C global -> scratch
        let moved = load_stream(
            &l.global_c,
            c,
            &blk,
            &l.shared_c,
            &mut w.shared_c[..],
            &tr.global_to_shared_c,
            wpb,
            &mut w.stream,
        )?;
        cnt.global_loads_c += moved.loads;
        cnt.scratch_stores += moved.stores;

        // 2. C scratch -> accumulators
        for e in 0..wpb {
            for wt in local_block.parallelise(&warp_mn, e, wpb)? {
                for fj in 0..frags_n {
                    for fi in 0..frags_m {
                        let (r, q) = (wt.start(0) + (fi * os.m) as isize, wt.start(1) + (fj * os.n) as isize);
                        let s = slot(r, q);
                        let acc = &mut w.acc[s..s + c_len];
                        cnt.scratch_loads += l.shared_c.gather(&w.shared_c[..], &at(&c_frag, r, q), acc)?;
                        tr.shared_to_regs_c.apply_planes(acc, os.m * os.n);
                    }
                }
            }
        }

        // 3. block-K loop
        for kb in 0..g.k / bs.k {
            let k0 = (kb * bs.k) as isize;
            if let Some(pred) = &cfg.predicate {
                let t = block3.shifted(0, m0).shifted(1, n0).shifted(2, k0);
                if !pred.evaluate(&t) {
                    cnt.inner_iterations_skipped += 1;
                    continue;
                }
            }
            cnt.inner_iterations_executed += 1;

            let moved = load_stream(
                &l.global_a,
                a,
                &at(&a_block, m0, k0),
                &l.shared_a,
                &mut w.shared_a[..],
                &tr.global_to_shared_a,
                wpb,
                &mut w.stream,
            )?;
            cnt.global_loads_a += moved.loads;
            cnt.scratch_stores += moved.stores;
            let moved = load_stream(
                &l.global_b,
                b,
                &at(&b_block, k0, n0),
                &l.shared_b,
                &mut w.shared_b[..],
                &tr.global_to_shared_b,
                wpb,
                &mut w.stream,
            )?;
            cnt.global_loads_b += moved.loads;
            cnt.scratch_stores += moved.stores;

            for ks in (0..bs.k).step_by(ws.k) {
                for e in 0..wpb {
                    for wt in local_block.parallelise(&warp_mn, e, wpb)? {
                        let (wm0, wn0) = (wt.start(0), wt.start(1));
                        for kk in (ks..ks + ws.k).step_by(os.k) {
                            let kk = kk as isize;
                            for fi in 0..frags_m {
                                let dst = &mut w.a_frags[fi * a_len..(fi + 1) * a_len];
                                let t = at(&a_frag, wm0 + (fi * os.m) as isize, kk);
                                cnt.scratch_loads += l.shared_a.gather(&w.shared_a[..], &t, dst)?;
                                tr.shared_to_regs_a.apply_planes(dst, os.m * os.k);
                            }
                            for fj in 0..frags_n {
                                let dst = &mut w.b_frags[fj * b_len..(fj + 1) * b_len];
                                let t = at(&b_frag, kk, wn0 + (fj * os.n) as isize);
                                cnt.scratch_loads += l.shared_b.gather(&w.shared_b[..], &t, dst)?;
                                tr.shared_to_regs_b.apply_planes(dst, os.k * os.n);
                            }
                            for fj in 0..frags_n {
                                let bf = &w.b_frags[fj * b_len..(fj + 1) * b_len];
                                for fi in 0..frags_m {
                                    let af = &w.a_frags[fi * a_len..(fi + 1) * a_len];
                                    let s = slot(wm0 + (fi * os.m) as isize, wn0 + (fj * os.n) as isize);
                                    let blocks = op.mma_planes(af, bf, &mut w.acc[s..s + c_len]);
                                    cnt.operator_invocations += 1;
                                    cnt.real_block_multiplies += u64::from(blocks);
                                }
                            }
                        }
                    }
                }
            }
        }

        // 4. accumulators -> scratch
        for e in 0..wpb {
            for wt in local_block.parallelise(&warp_mn, e, wpb)? {
                for fj in 0..frags_n {
                    for fi in 0..frags_m {
                        let (r, q) = (wt.start(0) + (fi * os.m) as isize, wt.start(1) + (fj * os.n) as isize);
                        let s = slot(r, q);
                        let acc = &mut w.acc[s..s + c_len];
                        tr.regs_to_shared_d.apply_planes(acc, os.m * os.n);
                        cnt.scratch_stores += l.shared_c.scatter(&mut w.shared_c[..], &at(&c_frag, r, q), acc)?;
                    }
                }
            }
        }

        // 5. epilogue
        let stats = run_epilogue_into::<S, T, _, _>(
            &cfg.epilogue,
            &l.shared_c,
            &w.shared_c[..],
            &l.global_d,
            &mut d,
            &blk,
            &tr.shared_to_global_d,
            wpb,
            &mut w.stream,
        )?;
        cnt.scratch_loads += stats.scratch_loads;
        cnt.global_stores += stats.global_stores;
    }
    Ok(())
}
