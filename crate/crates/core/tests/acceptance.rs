//! Runs every acceptance criterion and prints one PASS/FAIL line for each.

mod common;

use std::alloc::{GlobalAlloc, Layout as AllocLayout, System};
use std::process::ExitCode;
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::time::{Duration, Instant};

use proptest::test_runner::{Config, TestRunner};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tilekit::api::variants::{check, prepare, Precision, TcShape, Variant, VariantSpec};
use tilekit::reference::{max_rel_err, naive_gemm_f32, oracle_gemm};
use tilekit::{
    gemm_ex, resolve_params, BudgetScope, Dual, ElemType, Epilogue, Error, GemmExArgs, GemmExOptions, Kernel,
    MatmulConfig, PartialParams, ScratchModel, TileShape, Transform, Transforms, Transpose,
};

struct Audit;

static AUDITING: AtomicBool = AtomicBool::new(false);
static LARGEST: AtomicUsize = AtomicUsize::new(0);

unsafe impl GlobalAlloc for Audit {
    unsafe fn alloc(&self, layout: AllocLayout) -> *mut u8 {
        if AUDITING.load(Ordering::Relaxed) {
            LARGEST.fetch_max(layout.size(), Ordering::Relaxed);
        }
        System.alloc(layout)
    }

    unsafe fn dealloc(&self, ptr: *mut u8, layout: AllocLayout) {
        System.dealloc(ptr, layout)
    }

    unsafe fn realloc(&self, ptr: *mut u8, layout: AllocLayout, new_size: usize) -> *mut u8 {
        if AUDITING.load(Ordering::Relaxed) {
            LARGEST.fetch_max(new_size, Ordering::Relaxed);
        }
        System.realloc(ptr, layout, new_size)
    }
}

#[global_allocator]
static GLOBAL: Audit = Audit;

/// Largest single allocation made while `f` runs.
fn largest_allocation<R>(f: impl FnOnce() -> R) -> (R, usize) {
    LARGEST.store(0, Ordering::SeqCst);
    AUDITING.store(true, Ordering::SeqCst);
    let r = f();
    AUDITING.store(false, Ordering::SeqCst);
    (r, LARGEST.load(Ordering::SeqCst))
}

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn err(e: Error) -> String {
    e.to_string()
}

fn fail<T: std::fmt::Debug>(name: &str, e: proptest::test_runner::TestError<T>) -> String {
    format!("{name}: {e}")
}

fn tiling_properties() -> Outcome {
    let start = Instant::now();
    let config = Config {
        cases: 1000,
        failure_persistence: None,
        ..Config::default()
    };
    TestRunner::new(config.clone())
        .run(&common::partition_case(), |(p, s, c)| {
            common::check_partition(&p, &s, c)
        })
        .map_err(|e| fail("partition", e))?;
    TestRunner::new(config.clone())
        .run(&common::extents_case(), |(e, o)| common::check_linearise(&e, &o))
        .map_err(|e| fail("linearise", e))?;
    TestRunner::new(config.clone())
        .run(&common::translate_case(), |(t, u, v)| {
            common::check_translate(&t, &u, &v)
        })
        .map_err(|e| fail("translate", e))?;
    TestRunner::new(config)
        .run(&common::project_case(), |(t, k)| common::check_project(&t, &k))
        .map_err(|e| fail("project", e))?;
    let took = start.elapsed();
    ensure(took < Duration::from_secs(10), || format!("took {took:.2?}"))?;
    Ok(format!("4 properties x 1000 cases in {took:.2?}"))
}

fn dense_equivalence() -> Outcome {
    let start = Instant::now();
    let mut worst = [0.0f64; 2];
    let mut runs = 0;
    for n in [128, 256, 512] {
        for (p, precision) in [Precision::Single, Precision::Double].into_iter().enumerate() {
            for (ta, tb) in [(false, false), (false, true), (true, false), (true, true)] {
                let mut spec = VariantSpec::new(Variant::Dense, n, n, n);
                spec.precision = precision;
                spec.trans_a = ta;
                spec.trans_b = tb;
                let r = check(&spec).map_err(err)?;
                ensure(r.passed(), || {
                    format!("{n}^3 {precision:?} ta={ta} tb={tb}: rel err {:e}", r.max_rel_err)
                })?;
                worst[p] = worst[p].max(r.max_rel_err);
                runs += 1;
                if precision == Precision::Double {
                    spec.integers = true;
                    let r = check(&spec).map_err(err)?;
                    ensure(r.max_rel_err == 0.0, || {
                        format!("{n}^3 integer ta={ta} tb={tb}: rel err {:e}", r.max_rel_err)
                    })?;
                    runs += 1;
                }
            }
        }
    }
    let took = start.elapsed();
    ensure(took < Duration::from_secs(60), || format!("took {took:.2?}"))?;
    Ok(format!(
        "{runs} runs, worst rel err f32 {:.2e}, f64 {:.2e}, integer f64 exact, {took:.2?}",
        worst[0], worst[1]
    ))
}

/// Executed and skipped block-K iterations, A elements read, and the most
/// K blocks any `M` block range can meet.
fn diagonal_enumeration(n: usize, cols: usize, b: TileShape) -> (u64, u64, u64, u64) {
    let (mut exec, mut skip, mut loads, mut widest) = (0, 0, 0, 0);
    for m0 in (0..n).step_by(b.m) {
        let mut met = 0;
        for k0 in (0..n).step_by(b.k) {
            let (lo, hi) = (m0.max(k0), (m0 + b.m).min(k0 + b.k));
            if lo < hi {
                met += 1;
                exec += (cols / b.n) as u64;
                loads += ((hi - lo) * (cols / b.n)) as u64;
            } else {
                skip += (cols / b.n) as u64;
            }
        }
        widest = widest.max(met);
    }
    (exec, skip, loads, widest)
}

fn diagonal() -> Outcome {
    let mut notes = Vec::new();
    for (n, cols, block) in [
        (256, 256, None),
        (256, 128, Some(TileShape::new(64, 32, 16))),
        (192, 64, Some(TileShape::new(32, 32, 64))),
        (128, 128, Some(TileShape::new(16, 16, 8))),
    ] {
        let mut spec = VariantSpec::new(Variant::Diagonal, n, cols, n);
        spec.block = block;
        let r = check(&spec).map_err(err)?;
        ensure(r.passed(), || format!("n={n}: rel err {:e}", r.max_rel_err))?;
        let b = r.params.block;
        let (exec, skip, loads, widest) = diagonal_enumeration(n, cols, b);
        let c = &r.counters;
        ensure(
            c.inner_iterations_executed == exec && c.inner_iterations_skipped == skip,
            || {
                format!(
                    "n={n} block {b}: executed/skipped {}/{} but enumeration gives {exec}/{skip}",
                    c.inner_iterations_executed, c.inner_iterations_skipped
                )
            },
        )?;
        ensure(c.global_loads_a == loads, || {
            format!(
                "n={n} block {b}: A loads {} but enumeration gives {loads}",
                c.global_loads_a
            )
        })?;
        let k_blocks = (n / b.k) as u64;
        let bound = widest.min((b.m.div_ceil(b.k) + 1) as u64) as f64 / k_blocks as f64;
        let fraction = exec as f64 / (exec + skip) as f64;
        ensure(fraction <= bound, || {
            format!("n={n}: executed fraction {fraction} above bound {bound}")
        })?;
        notes.push(format!("{n}x{cols} block {b}: {:.1}% executed", 100.0 * fraction));
    }
    Ok(notes.join("; "))
}

fn fusion() -> Outcome {
    let n = 256;
    let spec = VariantSpec::new(Variant::Fused, n, n, n);
    let mut p = prepare(&spec).map_err(err)?;
    let (counters, largest) = largest_allocation(|| p.execute());
    let counters = counters.map_err(err)?;
    let rel = p.max_rel_err();
    ensure(rel <= spec.tolerance(), || format!("variant rel err {rel:e}"))?;
    ensure(counters.global_stores == (n * n) as u64, || {
        format!("D stores {} != {}", counters.global_stores, n * n)
    })?;
    let full = n * n * std::mem::size_of::<f32>();
    ensure(largest < full, || {
        format!("allocation of {largest} bytes during execute (full matrix is {full})")
    })?;

    // The same composition built here from the public API, checked against
    // relu(A·B + C/2 + bias_j) computed from the triple-loop oracle.
    let (m, nn, k) = (128, 96, 64);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut gen = |len: usize| (0..len).map(|_| rng.gen_range(-1.0f32..1.0)).collect::<Vec<_>>();
    let (a, b, c, bias) = (gen(m * k), gen(k * nn), gen(m * nn), gen(nn));
    let t = Transforms {
        global_to_shared_c: Transform::Scale(0.5),
        shared_to_global_d: Transform::Relu,
        ..Default::default()
    };
    let cfg = MatmulConfig::<f32, f32>::new(m, nn, k)
        .transforms(t)
        .epilogue(Epilogue::bias(bias.clone()));
    let mut kernel = Kernel::new(cfg.resolve().map_err(err)?).map_err(err)?;
    let mut d = vec![0.0f32; m * nn];
    let (cnt, largest) = largest_allocation(|| kernel.execute(&a, &b, &c, &mut d));
    cnt.map_err(err)?;
    ensure(largest < m * nn * 4, || {
        format!("allocation of {largest} bytes during execute")
    })?;
    let w = |v: &[f32]| v.iter().map(|&x| f64::from(x)).collect::<Vec<_>>();
    let base = oracle_gemm(m, nn, k, &w(&a), &w(&b), &w(&c), 1.0, 0.5, false, false).map_err(err)?;
    let want: Vec<f64> = base
        .iter()
        .enumerate()
        .map(|(i, &v)| (v + f64::from(bias[i / m])).max(0.0))
        .collect();
    let rel2 = max_rel_err(&w(&d), &want);
    ensure(rel2 <= 1e-5, || format!("composed rel err {rel2:e}"))?;
    Ok(format!(
        "rel err {rel:.2e} / {rel2:.2e}, D stores {}, largest allocation during execute {largest} B",
        counters.global_stores
    ))
}

fn complex_and_dual() -> Outcome {
    let spec = VariantSpec::new(Variant::Complex, 128, 128, 128);
    let r = check(&spec).map_err(err)?;
    ensure(r.max_rel_err <= 1e-5, || format!("complex rel err {:e}", r.max_rel_err))?;
    let c = &r.counters;
    ensure(c.real_block_multiplies == 4 * c.operator_invocations, || {
        format!(
            "{} real multiplies for {} calls",
            c.real_block_multiplies, c.operator_invocations
        )
    })?;

    let r = check(&VariantSpec::new(Variant::Dual, 128, 128, 128)).map_err(err)?;
    ensure(r.max_rel_err == 0.0, || {
        format!("dual variant rel err {:e}", r.max_rel_err)
    })?;

    let n = 64;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut ints = |len: usize| {
        (0..len)
            .map(|_| f64::from(rng.gen_range(-4i32..=4)))
            .collect::<Vec<_>>()
    };
    let (a0, a1, b0, b1) = (ints(n * n), ints(n * n), ints(n * n), ints(n * n));
    let a: Vec<Dual<f64>> = a0.iter().zip(&a1).map(|(&v, &e)| Dual::new(v, e)).collect();
    let b: Vec<Dual<f64>> = b0.iter().zip(&b1).map(|(&v, &e)| Dual::new(v, e)).collect();
    let mut d = vec![Dual::new(0.0, 0.0); n * n];
    let args = GemmExArgs {
        trans_a: Transpose::No,
        trans_b: Transpose::No,
        m: n,
        n,
        k: n,
        alpha: Dual::new(1.0, 0.0),
        a: &a,
        b: &b,
        beta: Dual::new(0.0, 0.0),
        c: &mut d,
    };
    gemm_ex(args, &GemmExOptions::default()).map_err(err)?;
    let x = oracle_gemm(n, n, n, &a0, &b1, &[], 1.0, 0.0, false, false).map_err(err)?;
    let y = oracle_gemm(n, n, n, &a1, &b0, &[], 1.0, 0.0, false, false).map_err(err)?;
    let eps_ok = d.iter().zip(x.iter().zip(&y)).all(|(dv, (p, q))| dv.epsilon == p + q);
    ensure(eps_ok, || "dual epsilon part differs from A0·B1 + A1·B0".into())?;
    Ok(format!(
        "complex rel err {:.2e}, 4 real multiplies per call; dual epsilon exact",
        check(&spec).map_err(err)?.max_rel_err
    ))
}

fn tensor_contraction() -> Outcome {
    let mut notes = Vec::new();
    for (na, nb, nc, nd) in [(4, 2, 8, 8), (8, 4, 16, 16), (16, 8, 32, 32)] {
        let r = check(&VariantSpec::tc(TcShape { na, nb, nc, nd })).map_err(err)?;
        ensure(r.max_rel_err <= 1e-5, || {
            format!("({na},{nb},{nc},{nd}): rel err {:e}", r.max_rel_err)
        })?;
        ensure(r.counters.global_loads_c == 0, || {
            format!("({na},{nb},{nc},{nd}): {} C loads", r.counters.global_loads_c)
        })?;
        notes.push(format!("({na},{nb},{nc},{nd}) {:.1e}", r.max_rel_err));
    }
    Ok(format!("{}; no C loads", notes.join(", ")))
}

/// Every `s × s` and `2s × s` face that is a multiple of the 8×8 operator
/// and divides the problem, with its f32 scratch bytes.
fn enumerate_faces(g: TileShape, bk: usize, scope: BudgetScope) -> Vec<(usize, usize, usize)> {
    let mut out = Vec::new();
    let mut s = 1;
    while s <= g.m.max(g.n) {
        for (bm, bn) in [(s, s), (2 * s, s)] {
            if bm % 8 == 0 && bn % 8 == 0 && g.m % bm == 0 && g.n % bn == 0 {
                let mut elems = bm * bk + bk * bn;
                if scope == BudgetScope::InputsAndAccumulator {
                    elems += bm * bn;
                }
                out.push((bm, bn, elems * 4));
            }
        }
        s *= 2;
    }
    out
}

fn params_heuristic() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let sizes = [64, 128, 192, 256, 384, 512, 768, 1024, 2048];
    let mut feasible = 0;
    for case in 0..20 {
        let g = TileShape::new(
            sizes[rng.gen_range(0..sizes.len())],
            sizes[rng.gen_range(0..sizes.len())],
            sizes[rng.gen_range(0..sizes.len())],
        );
        let bk = [8, 16, 32][rng.gen_range(0..3)];
        let scope = if rng.gen_bool(0.5) {
            BudgetScope::Inputs
        } else {
            BudgetScope::InputsAndAccumulator
        };
        let budget = rng.gen_range(256..1 << 20);
        let mut partial = PartialParams::new(g);
        partial.block_k = Some(bk);
        partial.scratch_budget = Some(budget);
        partial.budget_scope = Some(scope);
        let got = resolve_params(&partial, &ScratchModel::dense(ElemType::F32));
        let best = enumerate_faces(g, bk, scope)
            .into_iter()
            .filter(|&(_, _, bytes)| bytes <= budget)
            .max_by_key(|&(bm, bn, _)| bm * bn);
        match (best, got) {
            (Some((bm, bn, bytes)), Ok(p)) => {
                ensure((p.block.m, p.block.n) == (bm, bn), || {
                    format!(
                        "case {case}: {g} budget {budget}: chose {}x{}, maximal is {bm}x{bn}",
                        p.block.m, p.block.n
                    )
                })?;
                ensure(bytes <= budget, || format!("case {case}: infeasible"))?;
                feasible += 1;
            }
            (None, Err(Error::Config { field: "block", .. })) => {}
            (best, got) => {
                return Err(format!(
                    "case {case}: {g} budget {budget}: expected {best:?}, got {got:?}"
                ))
            }
        }
    }
    Ok(format!("20 budgets, {feasible} feasible, all maximal"))
}

fn determinism() -> Outcome {
    let mut specs: Vec<VariantSpec> = Variant::ALL
        .into_iter()
        .filter(|&v| v != Variant::Tc)
        .map(|v| VariantSpec::new(v, 128, 128, 128))
        .collect();
    specs.push(VariantSpec::tc(TcShape {
        na: 16,
        nb: 8,
        nc: 32,
        nd: 32,
    }));
    for base in specs {
        let mut reference = None;
        for threads in [1, 2, 4, 8] {
            let mut spec = base.clone();
            spec.threads = threads;
            let mut p = prepare(&spec).map_err(err)?;
            let counters = p.execute().map_err(err)?;
            let out = (p.output_bits(), counters);
            match &reference {
                None => reference = Some(out),
                Some(r) => ensure(*r == out, || format!("{} differs at {threads} threads", base.variant))?,
            }
        }
    }
    Ok("8 variants, threads 1/2/4/8, bitwise-identical D and counters".into())
}

fn best_of(reps: usize, mut f: impl FnMut()) -> Duration {
    (0..reps)
        .map(|_| {
            let t = Instant::now();
            f();
            t.elapsed()
        })
        .min()
        .unwrap()
}

fn performance() -> Outcome {
    let n = 1024;
    let mut dense = prepare(&VariantSpec::new(Variant::Dense, n, n, n)).map_err(err)?;
    let mut fused = prepare(&VariantSpec::new(Variant::Fused, n, n, n)).map_err(err)?;
    dense.execute().map_err(err)?;
    fused.execute().map_err(err)?;

    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut gen = |len: usize| (0..len).map(|_| rng.gen_range(-1.0f32..1.0)).collect::<Vec<_>>();
    let (a, b, c) = (gen(n * n), gen(n * n), gen(n * n));
    let mut d = vec![0.0f32; n * n];
    let naive = best_of(1, || {
        naive_gemm_f32(n, n, n, std::hint::black_box(&a), &b, &c, &mut d);
        std::hint::black_box(&d);
    });

    let (mut t_dense, mut t_fused) = (Duration::MAX, Duration::MAX);
    for _ in 0..7 {
        t_dense = t_dense.min(best_of(1, || {
            dense.execute().unwrap();
        }));
        t_fused = t_fused.min(best_of(1, || {
            fused.execute().unwrap();
        }));
    }
    let speedup = naive.as_secs_f64() / t_dense.as_secs_f64();
    let overhead = t_fused.as_secs_f64() / t_dense.as_secs_f64();
    let gflops = 2.0 * (n as f64).powi(3) / t_dense.as_secs_f64() / 1e9;
    let line = format!(
        "tiled {t_dense:.2?} ({gflops:.1} GFLOP/s) vs naive {naive:.2?}: {speedup:.1}x; fused/dense {overhead:.3}"
    );
    ensure(speedup >= 2.0 && overhead <= 1.05, || line.clone())?;
    Ok(line)
}

fn main() -> ExitCode {
    type Criterion = (&'static str, fn() -> Outcome);
    let criteria: [Criterion; 9] = [
        ("tiling algebra properties", tiling_properties),
        ("dense GEMM equivalence", dense_equivalence),
        ("diagonal variant", diagonal),
        ("fusion", fusion),
        ("complex and dual", complex_and_dual),
        ("tensor contraction", tensor_contraction),
        ("params heuristic", params_heuristic),
        ("determinism and thread invariance", determinism),
        ("performance smoke", performance),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        match f() {
            Ok(detail) => println!("PASS {} {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {} {name}: {detail}", i + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
