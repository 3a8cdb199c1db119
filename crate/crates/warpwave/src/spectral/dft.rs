use num_complex::Complex64;
use std::f64::consts::PI;

/// Direct O(N^2) forward transform, `X[f] = sum_t x[t] e^{-j 2 pi f t / N}`.
pub fn dft_ref(x: &[Complex64]) -> Vec<Complex64> {
    direct(x, -1.0)
}

/// Direct inverse, scaled by `1/N`.
pub fn idft_ref(x: &[Complex64]) -> Vec<Complex64> {
    let n = x.len() as f64;
    direct(x, 1.0).into_iter().map(|v| v / n).collect()
}

fn direct(x: &[Complex64], sign: f64) -> Vec<Complex64> {
    let n = x.len();
    (0..n)
        .map(|f| {
            x.iter()
                .enumerate()
                .map(|(t, &v)| {
                    // reduce the product first so large sizes keep full phase accuracy
                    let ph = sign * 2.0 * PI * ((f * t) % n) as f64 / n as f64;
                    v * Complex64::from_polar(1.0, ph)
                })
                .sum()
        })
        .collect()
}
