//! Small numerical helpers shared across modules.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// Derives an independent, reproducible RNG stream from a base seed, a
/// purpose tag, and a stream index.
///
/// Every stochastic component in the crate (optimiser restarts, Monte-Carlo
/// blocks) draws from its own stream so that results are bit-identical
/// regardless of thread count or evaluation order. The 256-bit ChaCha seed is
/// built from the three inputs through a splitmix64 chain, with the purpose
/// tag hashed by FNV-1a so that distinct tags decorrelate even for equal
/// `(seed, index)` pairs.
pub(crate) fn rng_stream(seed: u64, purpose: &str, index: u64) -> ChaCha12Rng {
    let mut tag: u64 = 0xcbf2_9ce4_8422_2325;
    for byte in purpose.bytes() {
        tag = (tag ^ u64::from(byte)).wrapping_mul(0x0000_0100_0000_01b3);
    }
    let mut state = seed ^ tag.rotate_left(17) ^ index.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    let mut splitmix = move || {
        state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    };
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix().to_le_bytes());
    }
    ChaCha12Rng::from_seed(key)
}

/// Compensated (Kahan–Neumaier) accumulator.
///
/// Quadrature sums and Monte-Carlo reductions in this crate are specified to
/// be deterministic, so they are accumulated serially; compensation keeps the
/// rounding error of a length-`n` sum at O(1) ulps instead of O(n).
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct KahanSum {
    sum: f64,
    compensation: f64,
}

impl KahanSum {
    pub(crate) fn new() -> Self {
        Self::default()
    }

    pub(crate) fn add(&mut self, term: f64) {
        let t = self.sum + term;
        if self.sum.abs() >= term.abs() {
            self.compensation += (self.sum - t) + term;
        } else {
            self.compensation += (term - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

/// Solves the dense system `a x = b` in place by Gaussian elimination with
/// partial pivoting. `a` is row-major `n x n`. Returns `None` when a pivot
/// vanishes (singular matrix).
pub(crate) fn solve_dense(a: &mut [f64], b: &mut [f64]) -> Option<Vec<f64>> {
    let n = b.len();
    debug_assert_eq!(a.len(), n * n);
    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&r, &s| {
                a[r * n + col]
                    .abs()
                    .partial_cmp(&a[s * n + col].abs())
                    .expect("pivot comparison on finite entries")
            })
            .expect("non-empty pivot search");
        if a[pivot_row * n + col].abs() < f64::MIN_POSITIVE {
            return None;
        }
        if pivot_row != col {
            for k in 0..n {
                a.swap(col * n + k, pivot_row * n + k);
            }
            b.swap(col, pivot_row);
        }
        let pivot = a[col * n + col];
        for row in (col + 1)..n {
            let factor = a[row * n + col] / pivot;
            if factor == 0.0 {
                continue;
            }
            a[row * n + col] = 0.0;
            for k in (col + 1)..n {
                a[row * n + k] -= factor * a[col * n + k];
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut acc = b[row];
        for k in (row + 1)..n {
            acc -= a[row * n + k] * x[k];
        }
        x[row] = acc / a[row * n + row];
    }
    Some(x)
}
