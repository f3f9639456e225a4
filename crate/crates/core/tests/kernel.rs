use num_complex::Complex;
use tilekit::api::variants::{check, prepare, Variant, VariantSpec};
use tilekit::reference::{max_rel_err, oracle_gemm};
use tilekit::{
    matmul, run_epilogue, Dual, Epilogue, EventCounters, Kernel, Layout, LayoutKind, MatmulConfig, OperatorShape,
    Predicate, Tile, TileShape, Transform, Transforms,
};

fn data(len: usize, seed: u64) -> Vec<f32> {
    let mut x = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
    (0..len)
        .map(|_| {
            x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((x >> 40) as f32 / (1u64 << 24) as f32) * 2.0 - 1.0
        })
        .collect()
}

fn wide(v: &[f32]) -> Vec<f64> {
    v.iter().map(|&x| f64::from(x)).collect()
}

fn run(cfg: &MatmulConfig<f32, f32>, a: &[f32], b: &[f32], c: &[f32]) -> (Vec<f32>, EventCounters) {
    let g = cfg.params.gemm_shape;
    let mut d = vec![0.0f32; g.m * g.n];
    let cnt = matmul(cfg, a, b, c, &mut d).unwrap();
    (d, cnt)
}

#[test]
fn identity_b_reproduces_a() {
    let n = 64;
    let a = data(n * n, 1);
    let mut eye = vec![0.0f32; n * n];
    for i in 0..n {
        eye[i + i * n] = 1.0;
    }
    let cfg = MatmulConfig::new(n, n, n).global_c(LayoutKind::Zero);
    let (d, _) = run(&cfg, &a, &eye, &[]);
    assert_eq!(d, a);
}

#[test]
fn f32_256_cube_matches_oracle() {
    let n = 256;
    let (a, b, c) = (data(n * n, 2), data(n * n, 3), data(n * n, 4));
    let (d, _) = run(&MatmulConfig::new(n, n, n), &a, &b, &c);
    let want = oracle_gemm(n, n, n, &wide(&a), &wide(&b), &wide(&c), 1.0, 1.0, false, false).unwrap();
    assert!(max_rel_err(&wide(&d), &want) <= 1e-5);
}

#[test]
fn invocation_count_follows_tiling() {
    let n = 128;
    let (a, b, c) = (data(n * n, 5), data(n * n, 6), data(n * n, 7));
    let cfg = MatmulConfig::new(n, n, n)
        .block(TileShape::new(64, 64, 16))
        .op_shape(OperatorShape::new(8, 8, 8));
    let (_, cnt) = run(&cfg, &a, &b, &c);
    assert_eq!(cnt.operator_invocations, 4096);
    assert_eq!(cnt.real_block_multiplies, 4096);
    assert_eq!(cnt.inner_iterations_executed, 4 * 8);
    assert_eq!(cnt.global_loads_a, 4 * (n * n) as u64 / 2);
    assert_eq!(cnt.global_stores, (n * n) as u64);
}

#[test]
fn zero_c_is_never_read() {
    let n = 64;
    let (a, b) = (data(n * n, 8), data(n * n, 9));
    let (d, cnt) = run(&MatmulConfig::new(n, n, n).global_c(LayoutKind::Zero), &a, &b, &[]);
    assert_eq!(cnt.global_loads_c, 0);
    let want = oracle_gemm(n, n, n, &wide(&a), &wide(&b), &[], 1.0, 0.0, false, false).unwrap();
    assert!(max_rel_err(&wide(&d), &want) <= 1e-5);
}

#[test]
fn repeated_and_threaded_runs_are_bitwise_identical() {
    let n = 128;
    let (a, b, c) = (data(n * n, 10), data(n * n, 11), data(n * n, 12));
    let base = MatmulConfig::new(n, n, n).block(TileShape::new(32, 32, 16));
    let (d1, c1) = run(&base, &a, &b, &c);
    let (d2, c2) = run(&base, &a, &b, &c);
    assert_eq!(d1, d2);
    assert_eq!(c1, c2);
    for t in [2, 3, 4, 8] {
        let (dt, ct) = run(&base.clone().threads(t), &a, &b, &c);
        assert_eq!(d1, dt, "threads {t}");
        assert_eq!(c1, ct, "threads {t}");
    }
}

#[test]
fn always_predicate_is_neutral() {
    let n = 64;
    let (a, b, c) = (data(n * n, 13), data(n * n, 14), data(n * n, 15));
    let with = MatmulConfig::new(n, n, n).predicate(Predicate::Always);
    let without = MatmulConfig::new(n, n, n).without_predicate();
    assert_eq!(run(&with, &a, &b, &c), run(&without, &a, &b, &c));
}

#[test]
fn identity_transforms_match_custom_identities() {
    let n = 64;
    let (a, b, c) = (data(n * n, 16), data(n * n, 17), data(n * n, 18));
    let plain = MatmulConfig::new(n, n, n);
    let custom = MatmulConfig::new(n, n, n).transforms(Transforms::all(Transform::custom(|x: f32| x)));
    assert_eq!(run(&plain, &a, &b, &c), run(&custom, &a, &b, &c));
}

#[test]
fn never_predicate_leaves_c() {
    let n = 32;
    let a = vec![f32::NAN; n * n];
    let (b, c) = (data(n * n, 19), data(n * n, 20));
    let (d, cnt) = run(&MatmulConfig::new(n, n, n).predicate(Predicate::Never), &a, &b, &c);
    assert_eq!(d, c);
    assert_eq!(cnt.inner_iterations_executed, 0);
    assert_eq!(cnt.operator_invocations, 0);
}

/// Per block-K iteration: executed iff the `M` and `K` ranges meet; A reads
/// are the diagonal entries in the intersection.
fn diagonal_enumeration(n: usize, cols: usize, bm: usize, bn: usize, bk: usize) -> (u64, u64, u64) {
    let (mut exec, mut skip, mut loads) = (0, 0, 0);
    for _ in 0..cols / bn {
        for m0 in (0..n).step_by(bm) {
            for k0 in (0..n).step_by(bk) {
                let lo = m0.max(k0);
                let hi = (m0 + bm).min(k0 + bk);
                if lo < hi {
                    exec += 1;
                    loads += (hi - lo) as u64;
                } else {
                    skip += 1;
                }
            }
        }
    }
    (exec, skip, loads)
}

#[test]
fn diagonal_counts_match_enumeration() {
    for (n, cols, block) in [
        (64, 32, TileShape::new(16, 16, 8)),
        (96, 64, TileShape::new(32, 16, 16)),
        (64, 64, TileShape::new(16, 32, 32)),
    ] {
        let mut spec = VariantSpec::new(Variant::Diagonal, n, cols, n);
        spec.block = Some(block);
        let r = check(&spec).unwrap();
        assert!(r.passed(), "{}", r.max_rel_err);
        let (exec, skip, loads) = diagonal_enumeration(n, cols, block.m, block.n, block.k);
        assert_eq!(r.counters.inner_iterations_executed, exec);
        assert_eq!(r.counters.inner_iterations_skipped, skip);
        assert_eq!(r.counters.global_loads_a, loads);
    }
}

#[test]
fn complex_and_dual_block_multiplies_per_call() {
    let r = check(&VariantSpec::new(Variant::Complex, 32, 32, 32)).unwrap();
    assert!(r.passed());
    assert_eq!(r.counters.real_block_multiplies, 4 * r.counters.operator_invocations);
    let r = check(&VariantSpec::new(Variant::Dual, 32, 32, 32)).unwrap();
    assert_eq!(r.max_rel_err, 0.0);
    assert_eq!(r.counters.real_block_multiplies, 3 * r.counters.operator_invocations);
}

#[test]
fn complex_kernel_on_typed_buffers() {
    let n = 16;
    let a: Vec<Complex<f64>> = (0..n * n).map(|i| Complex::new(i as f64, -(i as f64) / 2.0)).collect();
    let mut eye = vec![Complex::new(0.0, 0.0); n * n];
    for i in 0..n {
        eye[i + i * n] = Complex::new(0.0, 1.0);
    }
    let cfg = MatmulConfig::<Complex<f64>, Complex<f64>>::new(n, n, n).global_c(LayoutKind::Zero);
    let mut d = vec![Complex::new(0.0, 0.0); n * n];
    matmul(
        &cfg,
        tilekit::as_lanes(&a),
        tilekit::as_lanes(&eye),
        &[],
        tilekit::as_lanes_mut(&mut d),
    )
    .unwrap();
    let want: Vec<Complex<f64>> = a.iter().map(|z| z * Complex::new(0.0, 1.0)).collect();
    assert_eq!(d, want);
}

#[test]
fn dual_epsilon_propagates() {
    let n = 8;
    let a: Vec<Dual<f64>> = (0..n * n).map(|i| Dual::new((i % 5) as f64, 0.0)).collect();
    let b: Vec<Dual<f64>> = (0..n * n).map(|i| Dual::new(0.0, (i % 3) as f64)).collect();
    let cfg = MatmulConfig::<Dual<f64>, Dual<f64>>::new(n, n, n).global_c(LayoutKind::Zero);
    let mut d = vec![Dual::new(0.0, 0.0); n * n];
    matmul(
        &cfg,
        tilekit::as_lanes(&a),
        tilekit::as_lanes(&b),
        &[],
        tilekit::as_lanes_mut(&mut d),
    )
    .unwrap();
    let va: Vec<f64> = a.iter().map(|x| x.value).collect();
    let eb: Vec<f64> = b.iter().map(|x| x.epsilon).collect();
    let want = oracle_gemm(n, n, n, &va, &eb, &[], 1.0, 0.0, false, false).unwrap();
    assert!(d.iter().all(|x| x.value == 0.0));
    assert_eq!(d.iter().map(|x| x.epsilon).collect::<Vec<_>>(), want);
}

#[test]
fn bias_epilogue_example() {
    let scratch_layout = Layout::matrix::<f32>(LayoutKind::ColMajor, 2, 2).unwrap();
    let global_layout = Layout::matrix::<f32>(LayoutKind::ColMajor, 2, 2).unwrap();
    let scratch = [1.0f32, 3.0, 2.0, 4.0];
    let mut global = [0.0f32; 4];
    let block = Tile::with_extents(&[(tilekit::DimName::M, 2), (tilekit::DimName::N, 2)]).unwrap();
    let stats = run_epilogue::<f32, f32>(
        &Epilogue::bias(vec![10.0, 20.0]),
        &scratch_layout,
        &scratch,
        &global_layout,
        &mut global,
        &block,
        &Transform::Identity,
        1,
    )
    .unwrap();
    assert_eq!(global, [11.0, 13.0, 22.0, 24.0]);
    assert_eq!(stats.global_stores, 4);
}

#[test]
fn kernel_reuse_across_inputs() {
    let n = 32;
    let cfg = MatmulConfig::<f32, f32>::new(n, n, n).resolve().unwrap();
    let mut kernel = Kernel::new(cfg).unwrap();
    for seed in 0..3 {
        let (a, b, c) = (data(n * n, 30 + seed), data(n * n, 40 + seed), data(n * n, 50 + seed));
        let mut d = vec![0.0f32; n * n];
        let cnt = kernel.execute(&a, &b, &c, &mut d).unwrap();
        assert_eq!(cnt, kernel.snapshot_counters());
        let want = oracle_gemm(n, n, n, &wide(&a), &wide(&b), &wide(&c), 1.0, 1.0, false, false).unwrap();
        assert!(max_rel_err(&wide(&d), &want) <= 1e-5);
    }
}

#[test]
fn prepared_variants_repeat_exactly() {
    for v in Variant::ALL {
        let mut p = prepare(&VariantSpec::new(v, 64, 64, 64)).unwrap();
        let c1 = p.execute().unwrap();
        let d1 = p.output_bits();
        let c2 = p.execute().unwrap();
        assert_eq!(c1, c2, "{v}");
        assert_eq!(d1, p.output_bits(), "{v}");
    }
}

#[test]
fn mismatched_buffers_are_rejected() {
    let cfg = MatmulConfig::<f32, f32>::new(16, 16, 16);
    let a = vec![0.0f32; 16 * 15];
    let b = vec![0.0f32; 256];
    let mut d = vec![0.0f32; 256];
    assert!(matmul(&cfg, &a, &b, &b, &mut d).is_err());
}
