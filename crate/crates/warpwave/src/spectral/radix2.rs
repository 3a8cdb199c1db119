use super::{bit_reverse, twiddles, OpCount, SpectralError};
use num_complex::Complex64;

fn check_pow2(n: usize) -> Result<u32, SpectralError> {
    if n == 0 {
        return Err(SpectralError::Empty);
    }
    if !n.is_power_of_two() {
        return Err(SpectralError::NotPowerOfTwo(n));
    }
    Ok(n.trailing_zeros())
}

/// In-place decimation-in-frequency transform, natural order out.
fn dif(buf: &mut [Complex64], inverse: bool) -> OpCount {
    let n = buf.len();
    let k = n.trailing_zeros();
    let tw = twiddles(n);
    let mut count = OpCount::default();
    for s in 0..k {
        let len = n >> s;
        let half = len / 2;
        let stride = 1usize << s;
        for start in (0..n).step_by(len) {
            for q in 0..half {
                let a = buf[start + q];
                let b = buf[start + q + half];
                let w = if inverse { tw[q * stride].conj() } else { tw[q * stride] };
                buf[start + q] = a + b;
                buf[start + q + half] = (a - b) * w;
            }
        }
        count.butterflies += (n / 2) as u64;
        count.complex_mults += (n / 2) as u64;
    }
    for i in 0..n {
        let j = bit_reverse(i, k);
        if j > i {
            buf.swap(i, j);
        }
    }
    count
}

/// Forward radix-2 transform; power-of-two lengths only.
pub fn fft_radix2(x: &[Complex64]) -> Result<(Vec<Complex64>, OpCount), SpectralError> {
    check_pow2(x.len())?;
    let mut buf = x.to_vec();
    let c = dif(&mut buf, false);
    Ok((buf, c))
}

/// Inverse radix-2 transform scaled by `1/N`.
pub fn ifft_radix2(x: &[Complex64]) -> Result<(Vec<Complex64>, OpCount), SpectralError> {
    check_pow2(x.len())?;
    let mut buf = x.to_vec();
    let c = dif(&mut buf, true);
    let scale = 1.0 / x.len() as f64;
    buf.iter_mut().for_each(|v| *v *= scale);
    Ok((buf, c))
}
