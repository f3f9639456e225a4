//! Command-line front end: oracle checks, timing runs and CSV sweeps.

pub mod sweep;

use std::io::Write;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use tilekit::api::variants::{check, prepare, CheckReport, Precision, PreparedVariant, TcShape, Variant, VariantSpec};
use tilekit::{OperatorShape, TileShape};

#[derive(Debug, Parser)]
#[command(
    name = "tilekit",
    version,
    about = "Blocked GEMM kernels checked against brute-force oracles"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one variant once and compare it with its oracle.
    Check(ProblemArgs),
    /// Time one variant over one or more shapes and emit CSV.
    Bench(BenchArgs),
    /// Time the cartesian product described by a key=value file and emit CSV.
    Sweep(SweepArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PrecisionArg {
    Single,
    Double,
}

#[derive(Debug, Clone, Args)]
pub struct ProblemArgs {
    /// dense, mixed, padded, diagonal, fused, complex, dual or tc.
    #[arg(long, default_value = "dense")]
    pub variant: Variant,
    /// Rows of D. Missing extents default to the first one given, else 256.
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub k: Option<usize>,
    /// Tensor contraction extents.
    #[arg(long, default_value_t = 4)]
    pub na: usize,
    #[arg(long, default_value_t = 2)]
    pub nb: usize,
    #[arg(long, default_value_t = 8)]
    pub nc: usize,
    #[arg(long, default_value_t = 8)]
    pub nd: usize,
    /// Block tile; chosen from the scratch budget when omitted.
    #[arg(long, requires = "block_n")]
    pub block_m: Option<usize>,
    #[arg(long, requires = "block_m")]
    pub block_n: Option<usize>,
    /// Block K extent; defaults to the operator K.
    #[arg(long, requires = "block_m")]
    pub block_k: Option<usize>,
    #[arg(long, requires_all = ["op_n", "op_k"])]
    pub op_m: Option<usize>,
    #[arg(long, requires_all = ["op_m", "op_k"])]
    pub op_n: Option<usize>,
    #[arg(long, requires_all = ["op_m", "op_n"])]
    pub op_k: Option<usize>,
    #[arg(long, env = "TILEKIT_THREADS", default_value_t = 1)]
    pub threads: usize,
    #[arg(long, value_enum, default_value_t = PrecisionArg::Single)]
    pub precision: PrecisionArg,
    #[arg(long)]
    pub trans_a: bool,
    #[arg(long)]
    pub trans_b: bool,
    /// Integer-valued inputs (always on for dual).
    #[arg(long)]
    pub integers: bool,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    /// Square sizes to sweep instead of a single `m, n, k`.
    #[arg(long, value_delimiter = ',')]
    pub sizes: Vec<usize>,
    /// Timed repetitions per point, after one untimed warm-up.
    #[arg(long, default_value_t = 5)]
    pub reps: usize,
    /// CSV destination; stdout when omitted.
    #[arg(long)]
    pub out: Option<std::path::PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    /// File of `key=value` lines; keys are CSV column names, values may be
    /// comma-separated lists.
    pub config: std::path::PathBuf,
    #[arg(long)]
    pub out: Option<std::path::PathBuf>,
}

impl ProblemArgs {
    /// `(m, n, k)` with missing extents filled in.
    pub fn shape(&self) -> (usize, usize, usize) {
        let first = self.m.or(self.n).or(self.k).unwrap_or(256);
        (
            self.m.unwrap_or(first),
            self.n.unwrap_or(first),
            self.k.unwrap_or(first),
        )
    }

    pub fn spec(&self) -> Result<VariantSpec> {
        let mut spec = if self.variant == Variant::Tc {
            VariantSpec::tc(TcShape {
                na: self.na,
                nb: self.nb,
                nc: self.nc,
                nd: self.nd,
            })
        } else {
            let (m, n, k) = self.shape();
            VariantSpec::new(self.variant, m, n, k)
        };
        spec.op = match (self.op_m, self.op_n, self.op_k) {
            (Some(m), Some(n), Some(k)) => Some(OperatorShape::new(m, n, k)),
            _ => None,
        };
        if let (Some(bm), Some(bn)) = (self.block_m, self.block_n) {
            let bk = self.block_k.unwrap_or(spec.op.map_or(8, |o| o.k));
            spec.block = Some(TileShape::new(bm, bn, bk));
        }
        if self.threads == 0 {
            bail!("--threads must be at least 1");
        }
        spec.threads = self.threads;
        spec.precision = match self.precision {
            PrecisionArg::Single => Precision::Single,
            PrecisionArg::Double => Precision::Double,
        };
        spec.trans_a = self.trans_a;
        spec.trans_b = self.trans_b;
        spec.integers |= self.integers;
        spec.seed = self.seed;
        Ok(spec)
    }
}

/// Human-readable outcome of a check.
pub fn format_report(spec: &VariantSpec, r: &CheckReport) -> String {
    let g = spec.gemm_shape();
    let p = &r.params;
    let mut s = format!(
        "{} variant={} m={} n={} k={} block={} op={} threads={}\nmax_rel_err={:.3e} tolerance={:.0e}\n",
        if r.passed() { "PASS" } else { "FAIL" },
        spec.variant,
        g.m,
        g.n,
        g.k,
        p.block,
        p.op,
        p.worker_threads,
        r.max_rel_err,
        r.tolerance,
    );
    s.push_str(&r.counters.to_string());
    s
}

/// Wall-clock statistics of the timed repetitions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Timing {
    pub best: f64,
    pub mean: f64,
    pub std: f64,
}

impl Timing {
    pub fn from_samples(samples: &[f64]) -> Timing {
        let n = samples.len() as f64;
        let mean = samples.iter().sum::<f64>() / n;
        let var = samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / n;
        Timing {
            best: samples.iter().copied().fold(f64::INFINITY, f64::min),
            mean,
            std: var.sqrt(),
        }
    }
}

pub const CSV_HEADER: [&str; 21] = [
    "variant",
    "m",
    "n",
    "k",
    "block_m",
    "block_n",
    "block_k",
    "op_m",
    "op_n",
    "op_k",
    "threads",
    "reps",
    "sec_mean",
    "sec_std",
    "gflops",
    "max_rel_err",
    "global_loads",
    "global_stores",
    "operator_invocations",
    "iters_executed",
    "iters_skipped",
];

/// One measured point.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub spec: VariantSpec,
    pub params: tilekit::Params,
    pub reps: usize,
    pub timing: Timing,
    pub max_rel_err: f64,
    pub counters: tilekit::EventCounters,
}

impl Row {
    /// GFLOP/s at the best repetition.
    pub fn gflops(&self) -> f64 {
        self.spec.flops() / self.timing.best / 1e9
    }

    pub fn record(&self) -> Vec<String> {
        let g = self.spec.gemm_shape();
        let (p, c) = (&self.params, &self.counters);
        vec![
            self.spec.variant.to_string(),
            g.m.to_string(),
            g.n.to_string(),
            g.k.to_string(),
            p.block.m.to_string(),
            p.block.n.to_string(),
            p.block.k.to_string(),
            p.op.m.to_string(),
            p.op.n.to_string(),
            p.op.k.to_string(),
            p.worker_threads.to_string(),
            self.reps.to_string(),
            format!("{:.6e}", self.timing.mean),
            format!("{:.6e}", self.timing.std),
            format!("{:.4}", self.gflops()),
            format!("{:.3e}", self.max_rel_err),
            c.global_loads().to_string(),
            c.global_stores.to_string(),
            c.operator_invocations.to_string(),
            c.inner_iterations_executed.to_string(),
            c.inner_iterations_skipped.to_string(),
        ]
    }
}

/// One untimed warm-up, then `reps` timed executions.
pub fn measure(spec: &VariantSpec, reps: usize) -> Result<Row> {
    if reps == 0 {
        bail!("--reps must be at least 1");
    }
    let mut p: PreparedVariant = prepare(spec).with_context(|| format!("configuring {}", spec.variant))?;
    p.execute()?;
    let mut samples = Vec::with_capacity(reps);
    let mut counters = Default::default();
    for _ in 0..reps {
        let t = Instant::now();
        counters = p.execute()?;
        samples.push(t.elapsed().as_secs_f64());
    }
    Ok(Row {
        spec: spec.clone(),
        params: p.params,
        reps,
        timing: Timing::from_samples(&samples),
        max_rel_err: p.max_rel_err(),
        counters,
    })
}

pub fn write_csv(rows: &[Row], out: &mut dyn Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.write_record(r.record())?;
    }
    w.flush()?;
    Ok(())
}

fn emit(rows: &[Row], out: Option<&std::path::Path>) -> Result<()> {
    match out {
        Some(path) => {
            let mut f = std::fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
            write_csv(rows, &mut f)
        }
        None => write_csv(rows, &mut std::io::stdout().lock()),
    }
}

/// Bench points: one per `--sizes` entry, else the single problem.
pub fn bench_specs(args: &BenchArgs) -> Result<Vec<VariantSpec>> {
    if args.sizes.is_empty() {
        return Ok(vec![args.problem.spec()?]);
    }
    if args.problem.variant == Variant::Tc {
        bail!("--sizes does not apply to tc; use --na/--nb/--nc/--nd");
    }
    args.sizes
        .iter()
        .map(|&s| {
            if s == 0 {
                bail!("sweep sizes must be positive");
            }
            let mut p = args.problem.clone();
            (p.m, p.n, p.k) = (Some(s), Some(s), Some(s));
            p.spec()
        })
        .collect()
}

/// Process exit status: 0 success, 1 check mismatch, 2 error.
pub fn run(cli: Cli) -> i32 {
    let result = match cli.command {
        Command::Check(args) => args.spec().and_then(|spec| {
            let r = check(&spec).with_context(|| format!("configuring {}", spec.variant))?;
            print!("{}", format_report(&spec, &r));
            Ok(if r.passed() { 0 } else { 1 })
        }),
        Command::Bench(args) => bench_specs(&args).and_then(|specs| {
            let rows = specs
                .iter()
                .map(|s| measure(s, args.reps))
                .collect::<Result<Vec<_>>>()?;
            emit(&rows, args.out.as_deref())?;
            Ok(0)
        }),
        Command::Sweep(args) => std::fs::read_to_string(&args.config)
            .with_context(|| format!("reading {}", args.config.display()))
            .and_then(|text| sweep::parse(&text))
            .and_then(|points| {
                let rows = points
                    .iter()
                    .map(|(spec, reps)| measure(spec, *reps))
                    .collect::<Result<Vec<_>>>()?;
                emit(&rows, args.out.as_deref())?;
                Ok(0)
            }),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            2
        }
    }
}
