//! Ready-made kernel configurations with random inputs and an oracle check,
//! shared by the command-line tool, the benchmarks and the tests.

use std::fmt;
use std::str::FromStr;

use num_complex::{Complex, Complex64};
use num_traits::AsPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::MatmulConfig;
use crate::components::{Epilogue, Params, Predicate, TileShape, Transform, Transforms};
use crate::element::{as_lanes, ConvertTo, Dual, Element, Real};
use crate::error::{Error, Result};
use crate::kernel::{EventCounters, Kernel};
use crate::layout::{LayoutKind, TensorMap};
use crate::operator::OperatorShape;
use crate::reference::{
    materialize_diagonal, max_rel_err, max_rel_err_complex, oracle_complex, oracle_dual, oracle_gemm, oracle_tc,
    DualPair,
};
use crate::tiling::DimName;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    /// Plain GEMM.
    Dense,
    /// `f32` storage, `f64` accumulation.
    Mixed,
    /// Padded scratch layouts.
    Padded,
    /// Diagonal A with off-diagonal block iterations skipped.
    Diagonal,
    /// `relu(A·B + C/2 + bias)` in one pass.
    Fused,
    Complex,
    Dual,
    /// `D[a, b, c] = Σ_d A[b, d, a] · B[d, c]`.
    Tc,
}

impl Variant {
    pub const ALL: [Variant; 8] = [
        Variant::Dense,
        Variant::Mixed,
        Variant::Padded,
        Variant::Diagonal,
        Variant::Fused,
        Variant::Complex,
        Variant::Dual,
        Variant::Tc,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Variant::Dense => "dense",
            Variant::Mixed => "mixed",
            Variant::Padded => "padded",
            Variant::Diagonal => "diagonal",
            Variant::Fused => "fused",
            Variant::Complex => "complex",
            Variant::Dual => "dual",
            Variant::Tc => "tc",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Variant::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| Error::config("variant", format!("unknown variant `{s}`")))
    }
}

/// Lane precision of a variant's data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Precision {
    #[default]
    Single,
    Double,
}

/// Extents of the tensor contraction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TcShape {
    pub na: usize,
    pub nb: usize,
    pub nc: usize,
    pub nd: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VariantSpec {
    pub variant: Variant,
    pub m: usize,
    pub n: usize,
    pub k: usize,
    /// Used by [`Variant::Tc`] instead of `m, n, k`.
    pub tc: TcShape,
    pub block: Option<TileShape>,
    pub op: Option<OperatorShape>,
    pub threads: usize,
    pub precision: Precision,
    pub trans_a: bool,
    pub trans_b: bool,
    /// Small integers instead of uniform `[-1, 1)` data.
    pub integers: bool,
    pub seed: u64,
}

impl VariantSpec {
    pub fn new(variant: Variant, m: usize, n: usize, k: usize) -> Self {
        VariantSpec {
            variant,
            m,
            n,
            k,
            tc: TcShape {
                na: 4,
                nb: 2,
                nc: 8,
                nd: 8,
            },
            block: None,
            op: None,
            threads: 1,
            precision: Precision::Single,
            trans_a: false,
            trans_b: false,
            integers: variant == Variant::Dual,
            seed: 42,
        }
    }

    pub fn tc(tc: TcShape) -> Self {
        let mut s = VariantSpec::new(Variant::Tc, tc.na * tc.nb, tc.nc, tc.nd);
        s.tc = tc;
        s
    }

    /// `(M, N, K)` of the underlying GEMM.
    pub fn gemm_shape(&self) -> TileShape {
        match self.variant {
            Variant::Tc => TileShape::new(self.tc.na * self.tc.nb, self.tc.nc, self.tc.nd),
            _ => TileShape::new(self.m, self.n, self.k),
        }
    }

    /// `2·M·N·K`.
    pub fn flops(&self) -> f64 {
        let g = self.gemm_shape();
        2.0 * g.m as f64 * g.n as f64 * g.k as f64
    }

    /// Acceptable relative error against the oracle.
    pub fn tolerance(&self) -> f64 {
        if self.integers {
            return 0.0;
        }
        match (self.variant, self.precision) {
            (Variant::Mixed, _) | (_, Precision::Single) => 1e-5,
            (_, Precision::Double) => 1e-12,
        }
    }
}

/// A configured kernel with its inputs, ready to run repeatedly.
pub struct PreparedVariant {
    pub spec: VariantSpec,
    pub params: Params,
    inner: Box<dyn Runnable>,
}

trait Runnable: Send {
    fn execute(&mut self) -> Result<EventCounters>;
    fn max_rel_err(&self) -> f64;
    fn output_bits(&self) -> Vec<u64>;
    fn scratch_scalars(&self) -> usize;
}

type Check<R> = Box<dyn Fn(&[R]) -> f64 + Send>;

struct Problem<S: Element, T: Element> {
    kernel: Kernel<S, T>,
    a: Vec<S::Real>,
    b: Vec<S::Real>,
    c: Vec<S::Real>,
    d: Vec<S::Real>,
    check: Check<S::Real>,
}

impl<S: ConvertTo<T>, T: ConvertTo<S>> Runnable for Problem<S, T> {
    fn execute(&mut self) -> Result<EventCounters> {
        self.kernel.execute(&self.a, &self.b, &self.c, &mut self.d)
    }

    fn max_rel_err(&self) -> f64 {
        (self.check)(&self.d)
    }

    fn output_bits(&self) -> Vec<u64> {
        self.d.iter().map(|&x| AsPrimitive::<f64>::as_(x).to_bits()).collect()
    }

    fn scratch_scalars(&self) -> usize {
        self.kernel.scratch_scalars()
    }
}

impl PreparedVariant {
    pub fn execute(&mut self) -> Result<EventCounters> {
        self.inner.execute()
    }

    /// Relative error of the last output against the oracle.
    pub fn max_rel_err(&self) -> f64 {
        self.inner.max_rel_err()
    }

    /// Bit patterns of the last output (widened to `f64`).
    pub fn output_bits(&self) -> Vec<u64> {
        self.inner.output_bits()
    }

    pub fn scratch_scalars(&self) -> usize {
        self.inner.scratch_scalars()
    }
}

/// Outcome of [`check`].
#[derive(Debug, Clone, PartialEq)]
pub struct CheckReport {
    pub params: Params,
    pub counters: EventCounters,
    pub max_rel_err: f64,
    pub tolerance: f64,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.max_rel_err <= self.tolerance
    }
}

/// Prepares, runs once and compares with the oracle.
pub fn check(spec: &VariantSpec) -> Result<CheckReport> {
    let mut p = prepare(spec)?;
    let counters = p.execute()?;
    Ok(CheckReport {
        params: p.params,
        counters,
        max_rel_err: p.max_rel_err(),
        tolerance: spec.tolerance(),
    })
}

struct Gen(ChaCha8Rng, bool);

impl Gen {
    fn value(&mut self) -> f64 {
        if self.1 {
            f64::from(self.0.gen_range(-4i32..=4))
        } else {
            self.0.gen_range(-1.0..1.0)
        }
    }

    fn reals<R: Real>(&mut self, len: usize) -> Vec<R> {
        (0..len).map(|_| R::from_f64_lossy(self.value())).collect()
    }
}

fn widen<R: Real>(v: &[R]) -> Vec<f64> {
    v.iter().map(|&x| x.as_()).collect()
}

/// Builds the kernel and inputs described by `spec`.
pub fn prepare(spec: &VariantSpec) -> Result<PreparedVariant> {
    match (spec.variant, spec.precision) {
        (Variant::Mixed, _) => real::<f32, f64>(spec),
        (Variant::Complex, Precision::Single) => complex::<f32>(spec),
        (Variant::Complex, Precision::Double) => complex::<f64>(spec),
        (Variant::Dual, Precision::Single) => dual::<f32>(spec),
        (Variant::Dual, Precision::Double) => dual::<f64>(spec),
        (_, Precision::Single) => real::<f32, f32>(spec),
        (_, Precision::Double) => real::<f64, f64>(spec),
    }
}

fn base_config<S: ConvertTo<T>, T: ConvertTo<S>>(spec: &VariantSpec) -> MatmulConfig<S, T> {
    let g = spec.gemm_shape();
    let mut cfg = MatmulConfig::new(g.m, g.n, g.k).threads(spec.threads.max(1));
    if let Some(b) = spec.block {
        cfg = cfg.block(b);
    }
    if let Some(op) = spec.op {
        cfg = cfg.op_shape(op);
    }
    cfg
}

fn finish<S, T>(
    spec: &VariantSpec,
    cfg: MatmulConfig<S, T>,
    a: Vec<S::Real>,
    b: Vec<S::Real>,
    c: Vec<S::Real>,
    check: Check<S::Real>,
) -> Result<PreparedVariant>
where
    S: ConvertTo<T>,
    T: ConvertTo<S>,
{
    let resolved = cfg.resolve()?;
    let params = resolved.params;
    let d = vec![<S::Real as Element>::zero(); resolved.layouts.global_d.physical_size()];
    let kernel = Kernel::new(resolved)?;
    Ok(PreparedVariant {
        spec: spec.clone(),
        params,
        inner: Box::new(Problem {
            kernel,
            a,
            b,
            c,
            d,
            check,
        }),
    })
}

fn real<S, T>(spec: &VariantSpec) -> Result<PreparedVariant>
where
    S: Real + ConvertTo<T>,
    T: Real + ConvertTo<S>,
{
    let g = spec.gemm_shape();
    let (m, n, k) = (g.m, g.n, g.k);
    let mut gen = Gen(ChaCha8Rng::seed_from_u64(spec.seed), spec.integers);
    let mut cfg = base_config::<S, T>(spec);
    let major = |t: bool| if t { LayoutKind::RowMajor } else { LayoutKind::ColMajor };
    if spec.variant != Variant::Tc {
        cfg = cfg.global_a(major(spec.trans_a)).global_b(major(spec.trans_b));
    }

    match spec.variant {
        Variant::Diagonal => {
            if m != k {
                return Err(Error::config("k", format!("diagonal A needs m = k, got {m} and {k}")));
            }
            let diag: Vec<S> = gen.reals(m);
            let b: Vec<S> = gen.reals(k * n);
            let c: Vec<S> = gen.reals(m * n);
            let dense_a = materialize_diagonal(&widen(&diag));
            let want = oracle_gemm(m, n, k, &dense_a, &widen(&b), &widen(&c), 1.0, 1.0, false, spec.trans_b)?;
            let cfg = cfg.global_a(LayoutKind::Diagonal).predicate(Predicate::DiagonalA);
            finish(spec, cfg, diag, b, c, Box::new(move |d| max_rel_err(&widen(d), &want)))
        }
        Variant::Tc => {
            let TcShape { na, nb, nc, nd } = spec.tc;
            let (a_, b_, c_, d_) = (
                DimName::new('a'),
                DimName::new('b'),
                DimName::new('c'),
                DimName::new('d'),
            );
            let a_map = TensorMap::new(&[(b_, nb), (a_, na), (d_, nd)], &[b_, d_, a_], 2)?;
            let d_map = TensorMap::new(&[(b_, nb), (a_, na), (c_, nc)], &[a_, b_, c_], 2)?;
            let a: Vec<S> = gen.reals(nb * nd * na);
            let b: Vec<S> = gen.reals(nd * nc);
            let want = oracle_tc(na, nb, nc, nd, &widen(&a), &widen(&b))?;
            let cfg = cfg
                .global_a(LayoutKind::StridedPermutation(a_map))
                .global_b(LayoutKind::ColMajor)
                .global_c(LayoutKind::Zero)
                .global_d(LayoutKind::StridedPermutation(d_map));
            finish(
                spec,
                cfg,
                a,
                b,
                Vec::new(),
                Box::new(move |d| max_rel_err(&widen(d), &want)),
            )
        }
        _ => {
            let a: Vec<S> = gen.reals(m * k);
            let b: Vec<S> = gen.reals(k * n);
            let c: Vec<S> = gen.reals(m * n);
            let (wa, wb, wc) = (widen(&a), widen(&b), widen(&c));
            let mut want = oracle_gemm(m, n, k, &wa, &wb, &wc, 1.0, 1.0, spec.trans_a, spec.trans_b)?;
            match spec.variant {
                Variant::Padded => {
                    cfg = cfg
                        .shared_a(LayoutKind::padded(LayoutKind::ColMajor, 8))
                        .shared_b(LayoutKind::padded(LayoutKind::ColMajor, 8))
                        .shared_c(LayoutKind::padded(LayoutKind::ColMajor, 8));
                }
                Variant::Fused => {
                    let bias: Vec<S> = gen.reals(n);
                    let base = oracle_gemm(m, n, k, &wa, &wb, &wc, 1.0, 0.5, spec.trans_a, spec.trans_b)?;
                    want = base
                        .iter()
                        .enumerate()
                        .map(|(idx, &v)| (v + bias[idx / m].as_()).max(0.0))
                        .collect();
                    let t = Transforms {
                        global_to_shared_c: Transform::Scale(T::from_f64(0.5)),
                        shared_to_global_d: Transform::Relu,
                        ..Default::default()
                    };
                    cfg = cfg
                        .transforms(t)
                        .epilogue(Epilogue::bias(bias.iter().map(|&x| x.convert()).collect()));
                }
                _ => {}
            }
            finish(spec, cfg, a, b, c, Box::new(move |d| max_rel_err(&widen(d), &want)))
        }
    }
}

fn complex<R>(spec: &VariantSpec) -> Result<PreparedVariant>
where
    R: Real,
    Complex<R>: Element<Real = R> + ConvertTo<Complex<R>>,
{
    let g = spec.gemm_shape();
    let (m, n, k) = (g.m, g.n, g.k);
    let mut gen = Gen(ChaCha8Rng::seed_from_u64(spec.seed), spec.integers);
    let mut values = |len: usize| -> Vec<Complex<R>> {
        (0..len)
            .map(|_| Complex::new(R::from_f64_lossy(gen.value()), R::from_f64_lossy(gen.value())))
            .collect()
    };
    let (a, b, c) = (values(m * k), values(k * n), values(m * n));
    let wide =
        |v: &[Complex<R>]| -> Vec<Complex64> { v.iter().map(|z| Complex64::new(z.re.as_(), z.im.as_())).collect() };
    let one = Complex64::new(1.0, 0.0);
    let want = oracle_complex(
        m,
        n,
        k,
        &wide(&a),
        &wide(&b),
        &wide(&c),
        one,
        one,
        spec.trans_a,
        spec.trans_b,
    )?;
    let major = |t: bool| LayoutKind::interleaved(if t { LayoutKind::RowMajor } else { LayoutKind::ColMajor });
    let cfg = base_config::<Complex<R>, Complex<R>>(spec)
        .global_a(major(spec.trans_a))
        .global_b(major(spec.trans_b));
    let check = move |d: &[R]| {
        let got: Vec<Complex64> = d
            .chunks_exact(2)
            .map(|p| Complex64::new(p[0].as_(), p[1].as_()))
            .collect();
        max_rel_err_complex(&got, &want)
    };
    finish(
        spec,
        cfg,
        as_lanes(&a).to_vec(),
        as_lanes(&b).to_vec(),
        as_lanes(&c).to_vec(),
        Box::new(check),
    )
}

fn dual<R>(spec: &VariantSpec) -> Result<PreparedVariant>
where
    R: Real,
    Dual<R>: Element<Real = R> + ConvertTo<Dual<R>>,
{
    let g = spec.gemm_shape();
    let (m, n, k) = (g.m, g.n, g.k);
    let mut gen = Gen(ChaCha8Rng::seed_from_u64(spec.seed), spec.integers);
    let mut values = |len: usize| -> Vec<Dual<R>> {
        (0..len)
            .map(|_| Dual::new(R::from_f64_lossy(gen.value()), R::from_f64_lossy(gen.value())))
            .collect()
    };
    let (a, b, c) = (values(m * k), values(k * n), values(m * n));
    let pairs = |v: &[Dual<R>]| -> Vec<DualPair> { v.iter().map(|x| (x.value.as_(), x.epsilon.as_())).collect() };
    let want = oracle_dual(
        m,
        n,
        k,
        &pairs(&a),
        &pairs(&b),
        &pairs(&c),
        (1.0, 0.0),
        (1.0, 0.0),
        spec.trans_a,
        spec.trans_b,
    )?;
    let major = |t: bool| LayoutKind::interleaved(if t { LayoutKind::RowMajor } else { LayoutKind::ColMajor });
    let cfg = base_config::<Dual<R>, Dual<R>>(spec)
        .global_a(major(spec.trans_a))
        .global_b(major(spec.trans_b));
    let check = move |d: &[R]| {
        let (mut val, mut eps) = (Vec::with_capacity(want.len()), Vec::with_capacity(want.len()));
        for p in d.chunks_exact(2) {
            val.push(p[0].as_());
            eps.push(p[1].as_());
        }
        let want_val: Vec<f64> = want.iter().map(|w| w.0).collect();
        let want_eps: Vec<f64> = want.iter().map(|w| w.1).collect();
        max_rel_err(&val, &want_val).max(max_rel_err(&eps, &want_eps))
    };
    finish(
        spec,
        cfg,
        as_lanes(&a).to_vec(),
        as_lanes(&b).to_vec(),
        as_lanes(&c).to_vec(),
        Box::new(check),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_variant_passes_at_small_size() {
        for v in Variant::ALL {
            let spec = match v {
                Variant::Tc => VariantSpec::tc(TcShape {
                    na: 4,
                    nb: 2,
                    nc: 8,
                    nd: 8,
                }),
                _ => VariantSpec::new(v, 64, 64, 64),
            };
            let r = check(&spec).unwrap();
            assert!(r.passed(), "{v}: error {} > {}", r.max_rel_err, r.tolerance);
        }
    }

    #[test]
    fn names_round_trip() {
        for v in Variant::ALL {
            assert_eq!(v.name().parse::<Variant>().unwrap(), v);
        }
        assert!("nope".parse::<Variant>().is_err());
    }
}
