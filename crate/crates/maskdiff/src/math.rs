//! Dense kernels shared by the model and the decoders.
//!
//! With the `parallel` feature (default) the kernels fan out over rayon.
//! Parallel work is split only across whole output rows and each row is
//! computed by the same sequential inner loop, so results are bitwise
//! identical to the sequential fallback.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Minimum rows per rayon task. Desk-scale rows are a few microseconds of
/// work, so fine splits cost more in scheduling than they recover; the
/// bench suite compares both paths per machine.
#[cfg(feature = "parallel")]
const MIN_ROWS_PER_TASK: usize = 16;

/// Applies `f(row_index, row)` to each `width`-sized row of `out`.
pub fn for_each_row<F>(out: &mut [f64], width: usize, f: F)
where
    F: Fn(usize, &mut [f64]) + Sync + Send,
{
    debug_assert_eq!(out.len() % width.max(1), 0);
    #[cfg(feature = "parallel")]
    {
        out.par_chunks_mut(width)
            .with_min_len(MIN_ROWS_PER_TASK)
            .enumerate()
            .for_each(|(i, row)| f(i, row));
    }
    #[cfg(not(feature = "parallel"))]
    {
        for_each_row_seq(out, width, f);
    }
}

/// Sequential counterpart of [`for_each_row`], always available for
/// benchmark comparisons.
pub fn for_each_row_seq<F>(out: &mut [f64], width: usize, f: F)
where
    F: Fn(usize, &mut [f64]),
{
    for (i, row) in out.chunks_mut(width).enumerate() {
        f(i, row);
    }
}

fn matmul_row(row: &mut [f64], a_row: &[f64], b: &[f64], k: usize, m: usize) {
    row.fill(0.0);
    for (x, b_row) in a_row.iter().zip(b.chunks_exact(m)) {
        if *x == 0.0 {
            continue;
        }
        for (acc, w) in row.iter_mut().zip(b_row) {
            *acc += x * w;
        }
    }
    debug_assert_eq!(a_row.len(), k);
}

/// `out = a * b` where `a` is `n x k` and `b` is `k x m`, all row-major.
pub fn matmul_into(out: &mut [f64], a: &[f64], b: &[f64], n: usize, k: usize, m: usize) {
    assert_eq!(a.len(), n * k);
    assert_eq!(b.len(), k * m);
    assert_eq!(out.len(), n * m);
    for_each_row(out, m, |i, row| {
        matmul_row(row, &a[i * k..(i + 1) * k], b, k, m);
    });
}

/// Sequential matmul used by the criterion benches as the baseline.
pub fn matmul_into_seq(out: &mut [f64], a: &[f64], b: &[f64], n: usize, k: usize, m: usize) {
    assert_eq!(a.len(), n * k);
    assert_eq!(b.len(), k * m);
    assert_eq!(out.len(), n * m);
    for_each_row_seq(out, m, |i, row| {
        matmul_row(row, &a[i * k..(i + 1) * k], b, k, m);
    });
}

/// Numerically stable in-place softmax.
pub fn softmax_in_place(xs: &mut [f64]) {
    if xs.is_empty() {
        return;
    }
    let max = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for x in xs.iter_mut() {
        *x = (*x - max).exp();
        sum += *x;
    }
    for x in xs.iter_mut() {
        *x /= sum;
    }
}

/// Index of the maximum element; ties go to the lowest index.
pub fn argmax(xs: &[f64]) -> usize {
    let mut best = 0;
    let mut best_val = f64::NEG_INFINITY;
    for (i, &x) in xs.iter().enumerate() {
        if x > best_val {
            best_val = x;
            best = i;
        }
    }
    best
}

pub fn relu_in_place(xs: &mut [f64]) {
    for x in xs.iter_mut() {
        if *x < 0.0 {
            *x = 0.0;
        }
    }
}

/// FNV-1a over raw f64 bits; stable across runs and platforms.
pub fn fnv1a64(values: impl IntoIterator<Item = f64>) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for v in values {
        for byte in v.to_bits().to_le_bytes() {
            hash ^= u64::from(byte);
            hash = hash.wrapping_mul(0x100_0000_01b3);
        }
    }
    hash
}
