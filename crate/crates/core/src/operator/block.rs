//! Real block multiply-accumulate on column-major panels.
//!
//! `acc[i, j] ±= Σ_k a[i, k] · b[k, j]`, with `k` ascending for every output
//! element so results are reproducible bit for bit.

use crate::element::{Element, Real};

#[inline]
pub(crate) fn block_mac<R: Real>(m: usize, n: usize, k: usize, a: &[R], b: &[R], acc: &mut [R], subtract: bool) {
    match (m, n, k) {
        (8, 8, 8) => mac_fixed::<R, 8, 8, 8>(a, b, acc, subtract),
        (4, 4, 4) => mac_fixed::<R, 4, 4, 4>(a, b, acc, subtract),
        (16, 16, 16) => mac_fixed::<R, 16, 16, 16>(a, b, acc, subtract),
        (16, 8, 8) => mac_fixed::<R, 16, 8, 8>(a, b, acc, subtract),
        _ => mac_dyn(m, n, k, a, b, acc, subtract),
    }
}

#[inline(always)]
fn mac_fixed<R: Real, const M: usize, const N: usize, const K: usize>(a: &[R], b: &[R], acc: &mut [R], subtract: bool) {
    let a = &a[..M * K];
    let b = &b[..K * N];
    let acc = &mut acc[..M * N];
    for j in 0..N {
        let mut col = [<R as Element>::zero(); M];
        col.copy_from_slice(&acc[j * M..(j + 1) * M]);
        for kk in 0..K {
            let bv = b[j * K + kk];
            let bv = if subtract { -bv } else { bv };
            let acol = &a[kk * M..(kk + 1) * M];
            for i in 0..M {
                col[i] += acol[i] * bv;
            }
        }
        acc[j * M..(j + 1) * M].copy_from_slice(&col);
    }
}

fn mac_dyn<R: Real>(m: usize, n: usize, k: usize, a: &[R], b: &[R], acc: &mut [R], subtract: bool) {
    let a = &a[..m * k];
    let b = &b[..k * n];
    for j in 0..n {
        let col = &mut acc[j * m..(j + 1) * m];
        for kk in 0..k {
            let bv = b[j * k + kk];
            let bv = if subtract { -bv } else { bv };
            for (c, &av) in col.iter_mut().zip(&a[kk * m..(kk + 1) * m]) {
                *c += av * bv;
            }
        }
    }
}
