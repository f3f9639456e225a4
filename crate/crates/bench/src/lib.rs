//! Benchmark points shared by the criterion benches.

use tilekit::api::variants::{TcShape, Variant, VariantSpec};

/// Square sizes for the dense scaling group.
pub const DENSE_SIZES: [usize; 3] = [128, 256, 512];

/// One point per variant at a common size.
pub fn variant_points(size: usize) -> Vec<VariantSpec> {
    Variant::ALL
        .into_iter()
        .map(|v| match v {
            Variant::Tc => VariantSpec::tc(TcShape {
                na: size / 8,
                nb: 8,
                nc: size,
                nd: size,
            }),
            _ => VariantSpec::new(v, size, size, size),
        })
        .collect()
}

/// Thread counts for the scaling group, capped at the machine's parallelism.
pub fn thread_counts() -> Vec<usize> {
    let max = std::thread::available_parallelism().map_or(1, |n| n.get());
    [1, 2, 4, 8].into_iter().filter(|&t| t <= max.max(1)).collect()
}
