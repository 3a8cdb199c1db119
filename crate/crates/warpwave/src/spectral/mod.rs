//! Reference DFT, radix-2 transforms and pruned kernels with butterfly accounting.
//!
//! Every fast kernel is checked against [`dft_ref`]. The pruned kernels accept
//! lengths of the form `2^k * m` with `m` odd. The forward kernel splits into
//! `m` decimated blocks first and the inverse merges them last, each block a
//! radix-2 graph of length `2^k`, so non-power-of-two receiver windows (768,
//! 522) still run through the same butterfly machinery.

mod dft;
mod pruned;
mod radix2;

pub use dft::{dft_ref, idft_ref};
pub use pruned::{fft_dif_pruned, ifft_dit_pruned, PruneSpec, PrunedDif, PrunedDit};
pub use radix2::{fft_radix2, ifft_radix2};

use num_complex::Complex64;
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

/// Operation tally of one transform call.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OpCount {
    /// Radix-2 butterflies that did any arithmetic.
    pub butterflies: u64,
    /// Complex multiplications, twiddles and leaf DFT terms included.
    pub complex_mults: u64,
}

impl std::ops::Add for OpCount {
    type Output = OpCount;
    fn add(self, o: OpCount) -> OpCount {
        OpCount { butterflies: self.butterflies + o.butterflies, complex_mults: self.complex_mults + o.complex_mults }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SpectralError {
    #[error("transform length {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("transform length must be positive")]
    Empty,
    #[error("index {index} outside transform of size {size}")]
    IndexOutOfRange { index: usize, size: usize },
    #[error("{0} index set is empty")]
    EmptySet(&'static str),
    #[error("input length {got} does not match transform size {size}")]
    LengthMismatch { got: usize, size: usize },
}

/// Splits `n` into `(k, m)` with `n = 2^k * m`, `m` odd.
pub(crate) fn factor_two(n: usize) -> (u32, usize) {
    let k = n.trailing_zeros();
    (k, n >> k)
}

pub(crate) fn bit_reverse(mut v: usize, bits: u32) -> usize {
    let mut r = 0;
    for _ in 0..bits {
        r = (r << 1) | (v & 1);
        v >>= 1;
    }
    r
}

/// `e^{-j 2 pi i / n}` for `i in 0..n`, shared per size.
pub(crate) fn twiddles(n: usize) -> Arc<[Complex64]> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<[Complex64]>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("twiddle cache poisoned");
    guard
        .entry(n)
        .or_insert_with(|| {
            (0..n).map(|i| Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * i as f64 / n as f64)).collect()
        })
        .clone()
}
