//! Brute-force oracles. Column-major arrays, `f64` accumulation, plain
//! loops. Nothing here touches the kernel, layout or operator code.

use num_complex::Complex64;

use crate::error::{Error, Result};

fn check_len(name: &'static str, got: usize, want: usize) -> Result<()> {
    if got != want {
        return Err(Error::BufferSize {
            name,
            expected: want,
            actual: got,
        });
    }
    Ok(())
}

/// `A[i, p]` of an `m × k` operand stored column-major, or of its
/// `k × m` transpose when `trans` is set.
#[inline]
fn op_index(trans: bool, rows: usize, cols: usize, i: usize, p: usize) -> usize {
    if trans {
        p + i * cols
    } else {
        i + p * rows
    }
}

/// `alpha · op(A) · op(B) + beta · C`, all column-major. `op(A)` is
/// `m × k` and `op(B)` is `k × n`; `c` may be empty when `beta` is zero.
#[allow(clippy::too_many_arguments)]
pub fn oracle_gemm(
    m: usize,
    n: usize,
    k: usize,
    a: &[f64],
    b: &[f64],
    c: &[f64],
    alpha: f64,
    beta: f64,
    trans_a: bool,
    trans_b: bool,
) -> Result<Vec<f64>> {
    check_len("a", a.len(), m * k)?;
    check_len("b", b.len(), k * n)?;
    if beta != 0.0 {
        check_len("c", c.len(), m * n)?;
    }
    let mut d = vec![0.0; m * n];
    for j in 0..n {
        for i in 0..m {
            let mut s = 0.0;
            for p in 0..k {
                s += a[op_index(trans_a, m, k, i, p)] * b[op_index(trans_b, k, n, p, j)];
            }
            let cv = if beta != 0.0 { beta * c[i + j * m] } else { 0.0 };
            d[i + j * m] = alpha * s + cv;
        }
    }
    Ok(d)
}

/// Complex counterpart of [`oracle_gemm`].
#[allow(clippy::too_many_arguments)]
pub fn oracle_complex(
    m: usize,
    n: usize,
    k: usize,
    a: &[Complex64],
    b: &[Complex64],
    c: &[Complex64],
    alpha: Complex64,
    beta: Complex64,
    trans_a: bool,
    trans_b: bool,
) -> Result<Vec<Complex64>> {
    check_len("a", a.len(), m * k)?;
    check_len("b", b.len(), k * n)?;
    let zero = Complex64::new(0.0, 0.0);
    if beta != zero {
        check_len("c", c.len(), m * n)?;
    }
    let mut d = vec![zero; m * n];
    for j in 0..n {
        for i in 0..m {
            let mut s = zero;
            for p in 0..k {
                s += a[op_index(trans_a, m, k, i, p)] * b[op_index(trans_b, k, n, p, j)];
            }
            let cv = if beta != zero { beta * c[i + j * m] } else { zero };
            d[i + j * m] = alpha * s + cv;
        }
    }
    Ok(d)
}

/// Dual numbers as `(value, epsilon)` pairs.
pub type DualPair = (f64, f64);

fn dual_mul(x: DualPair, y: DualPair) -> DualPair {
    (x.0 * y.0, x.0 * y.1 + x.1 * y.0)
}

fn dual_add(x: DualPair, y: DualPair) -> DualPair {
    (x.0 + y.0, x.1 + y.1)
}

/// Dual-number GEMM with `ε² = 0`.
#[allow(clippy::too_many_arguments)]
pub fn oracle_dual(
    m: usize,
    n: usize,
    k: usize,
    a: &[DualPair],
    b: &[DualPair],
    c: &[DualPair],
    alpha: DualPair,
    beta: DualPair,
    trans_a: bool,
    trans_b: bool,
) -> Result<Vec<DualPair>> {
    check_len("a", a.len(), m * k)?;
    check_len("b", b.len(), k * n)?;
    let reads_c = beta != (0.0, 0.0);
    if reads_c {
        check_len("c", c.len(), m * n)?;
    }
    let mut d = vec![(0.0, 0.0); m * n];
    for j in 0..n {
        for i in 0..m {
            let mut s = (0.0, 0.0);
            for p in 0..k {
                s = dual_add(
                    s,
                    dual_mul(a[op_index(trans_a, m, k, i, p)], b[op_index(trans_b, k, n, p, j)]),
                );
            }
            let cv = if reads_c {
                dual_mul(beta, c[i + j * m])
            } else {
                (0.0, 0.0)
            };
            d[i + j * m] = dual_add(dual_mul(alpha, s), cv);
        }
    }
    Ok(d)
}

/// `D[a, b, c] = Σ_d A[b, d, a] · B[d, c]`.
///
/// `a` is the `(Nb, Nd, Na)` tensor and `b` the `(Nd, Nc)` matrix, both
/// column-major (first index fastest). The result is `(Na, Nb, Nc)`.
pub fn oracle_tc(na: usize, nb: usize, nc: usize, nd: usize, a: &[f64], b: &[f64]) -> Result<Vec<f64>> {
    check_len("a", a.len(), nb * nd * na)?;
    check_len("b", b.len(), nd * nc)?;
    let mut out = vec![0.0; na * nb * nc];
    for ia in 0..na {
        for ib in 0..nb {
            for ic in 0..nc {
                let mut s = 0.0;
                for id in 0..nd {
                    s += a[ib + nb * (id + nd * ia)] * b[id + nd * ic];
                }
                out[ia + na * (ib + nb * ic)] = s;
            }
        }
    }
    Ok(out)
}

/// The dense `n × n` matrix with `diag` on its diagonal.
pub fn materialize_diagonal(diag: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut out = vec![0.0; n * n];
    for (i, &v) in diag.iter().enumerate() {
        out[i + i * n] = v;
    }
    out
}

/// Explicit transpose of a column-major `rows × cols` matrix.
pub fn transpose(rows: usize, cols: usize, x: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; rows * cols];
    for j in 0..cols {
        for i in 0..rows {
            out[j + i * cols] = x[i + j * rows];
        }
    }
    out
}

/// `max |x - y| / max |y|` (or the plain max difference when `y` is all
/// zero).
pub fn max_rel_err(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len());
    let diff = x.iter().zip(y).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let scale = y.iter().map(|v| v.abs()).fold(0.0, f64::max);
    if scale == 0.0 {
        diff
    } else {
        diff / scale
    }
}

/// The complex-magnitude version of [`max_rel_err`].
pub fn max_rel_err_complex(x: &[Complex64], y: &[Complex64]) -> f64 {
    assert_eq!(x.len(), y.len());
    let diff = x.iter().zip(y).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    let scale = y.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        diff
    } else {
        diff / scale
    }
}

/// Textbook `f32` triple loop, `D = A·B + C`, with the `k` loop innermost.
/// The performance baseline.
pub fn naive_gemm_f32(m: usize, n: usize, k: usize, a: &[f32], b: &[f32], c: &[f32], d: &mut [f32]) {
    for i in 0..m {
        for j in 0..n {
            let mut s = c[i + j * m];
            for p in 0..k {
                s += a[i + p * m] * b[p + j * k];
            }
            d[i + j * m] = s;
        }
    }
}
