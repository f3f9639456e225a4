use tilekit::{
    gemm_ex, matmul, Epilogue, GemmExArgs, GemmExOptions, LayoutKind, MatmulConfig, Transform, Transforms, Transpose,
};

fn main() -> tilekit::Result<()> {
    let (m, n, k) = (128, 64, 32);
    let a = vec![1.0f32; m * k];
    let b = vec![0.5f32; k * n];
    let bias = vec![1.0f32; n];
    let mut d = vec![0.0f32; m * n];

    let cfg = MatmulConfig::<f32, f32>::new(m, n, k)
        .global_c(LayoutKind::Zero)
        .transforms(Transforms {
            shared_to_global_d: Transform::Relu,
            ..Default::default()
        })
        .epilogue(Epilogue::bias(bias));
    let counters = matmul(&cfg, &a, &b, &[], &mut d)?;
    println!("{} operator calls", counters.operator_invocations);

    let mut c = vec![0.0f64; m * n];
    let a64 = vec![1.0f64; k * m];
    let b64 = vec![2.0f64; k * n];
    gemm_ex(
        GemmExArgs {
            trans_a: Transpose::Yes,
            trans_b: Transpose::No,
            m,
            n,
            k,
            alpha: 1.0,
            a: &a64,
            b: &b64,
            beta: 0.0,
            c: &mut c,
        },
        &GemmExOptions {
            threads: 4,
            ..Default::default()
        },
    )?;
    assert_eq!(c[0], 64.0);
    Ok(())
}
