//! Raised-cosine pulses in time and frequency, and warped pulse synthesis.

use crate::spectral::{fft_radix2, SpectralError};
use crate::wavecore::{CoreError, SampledSignal, WarpingMap};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Distance from a removable singularity below which the limit value is used.
pub const SINGULAR_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PulseError {
    #[error(transparent)]
    Map(#[from] CoreError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error("requested {got} samples but the map covers {need}")]
    Length { got: usize, need: usize },
}

/// Left/right roll-off pair of one pulse.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PulseSpec {
    pub alpha_left: f64,
    pub alpha_right: f64,
}

impl PulseSpec {
    pub fn symmetric(alpha: f64) -> Self {
        Self { alpha_left: alpha, alpha_right: alpha }
    }

    pub fn swapped(self) -> Self {
        Self { alpha_left: self.alpha_right, alpha_right: self.alpha_left }
    }
}

impl From<(f64, f64)> for PulseSpec {
    fn from((alpha_left, alpha_right): (f64, f64)) -> Self {
        Self { alpha_left, alpha_right }
    }
}

/// Normalized sinc, `sin(pi x) / (pi x)`.
pub fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        let px = PI * x;
        px.sin() / px
    }
}

/// Raised-cosine pulse at `x` pulse periods from its peak.
pub fn rc_time(alpha: f64, x: f64) -> f64 {
    if alpha == 0.0 {
        return sinc(x);
    }
    let den = 1.0 - (2.0 * alpha * x).powi(2);
    if den.abs() < SINGULAR_TOL {
        PI / 4.0 * sinc(1.0 / (2.0 * alpha))
    } else {
        sinc(x) * (PI * alpha * x).cos() / den
    }
}

/// Asymmetric pulse: left roll-off for `x < 0`, right roll-off otherwise.
pub fn asym_rc_time(spec: PulseSpec, x: f64) -> f64 {
    if x < 0.0 {
        rc_time(spec.alpha_left, x)
    } else {
        rc_time(spec.alpha_right, x)
    }
}

/// Value of the frequency-domain raised-cosine prototype.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrototypeValue {
    pub value: f64,
    /// Set when `alpha == 0`: the transition band is empty and the
    /// prototype degenerates to a rectangle.
    pub degenerate: bool,
}

/// Raised-cosine spectrum at normalized frequency `nu` (band edge at 0.5).
pub fn rc_freq_prototype(alpha: f64, nu: f64) -> PrototypeValue {
    let a = nu.abs();
    if alpha <= 0.0 {
        let value = if a < 0.5 {
            1.0
        } else if a == 0.5 {
            0.5
        } else {
            0.0
        };
        return PrototypeValue { value, degenerate: true };
    }
    let value = if a <= (1.0 - alpha) / 2.0 {
        1.0
    } else if a <= (1.0 + alpha) / 2.0 {
        0.5 * (1.0 + (PI / alpha * (a - (1.0 - alpha) / 2.0)).cos())
    } else {
        0.0
    };
    PrototypeValue { value, degenerate: false }
}

/// Samples of the pulse centred at map coordinate `n`, over the whole map
/// domain. No amplitude compensation for the local warp slope is applied.
pub fn warped_pulse_samples(
    spec: PulseSpec,
    map: &WarpingMap,
    n: i64,
    length: usize,
) -> Result<SampledSignal, PulseError> {
    map.anchor(n)?;
    let need = map.len_samples();
    if length < need {
        return Err(PulseError::Length { got: length, need });
    }
    let (lo, _) = map.domain();
    let mut out = Vec::with_capacity(length);
    for k in 0..need {
        let xw = map.eval((lo + k as i64) as f64)?;
        out.push(Complex64::new(asym_rc_time(spec, xw - n as f64), 0.0));
    }
    out.resize(length, Complex64::new(0.0, 0.0));
    Ok(SampledSignal::new(out, 1, lo)?)
}

/// Zero-padded transform of [`warped_pulse_samples`].
pub fn warped_pulse_spectrum(
    spec: PulseSpec,
    map: &WarpingMap,
    n: i64,
    fft_len: usize,
) -> Result<Vec<Complex64>, PulseError> {
    if !fft_len.is_power_of_two() {
        return Err(SpectralError::NotPowerOfTwo(fft_len).into());
    }
    let s = warped_pulse_samples(spec, map, n, fft_len)?;
    Ok(fft_radix2(s.samples())?.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn peak_and_limit_values() {
        assert_eq!(rc_time(0.5, 0.0), 1.0);
        assert!((rc_time(1.0, 0.5) - 0.5).abs() < 1e-15);
        assert!((rc_time(1.0, -0.5) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn formula_agrees_with_neighbourhood_near_singularity() {
        // x = 1/(2 alpha) for alpha = 0.25 is x = 2
        let a = 0.25;
        let eps = 1e-5;
        let avg = 0.5 * (rc_time(a, 2.0 - eps) + rc_time(a, 2.0 + eps));
        assert!((rc_time(a, 2.0) - avg).abs() < 1e-8);
        let direct = rc_time(0.33, 2.0);
        let avg = 0.5 * (rc_time(0.33, 2.0 - eps) + rc_time(0.33, 2.0 + eps));
        assert!((direct - avg).abs() < 1e-8);
    }

    #[test]
    fn alpha_zero_is_sinc() {
        for x in [-2.3, -1.0, 0.0, 0.4, 3.7] {
            assert_eq!(rc_time(0.0, x), sinc(x));
        }
    }

    #[test]
    fn asymmetric_branches() {
        let s = PulseSpec { alpha_left: 1.0, alpha_right: 0.15 };
        assert_eq!(asym_rc_time(s, 0.0), 1.0);
        assert!((asym_rc_time(s, -0.5) - 0.5).abs() < 1e-15);
        assert_eq!(asym_rc_time(s, 0.5), rc_time(0.15, 0.5));
        for x in [-1.7, -0.2, 0.3, 2.2] {
            assert_eq!(asym_rc_time(s, x), asym_rc_time(s.swapped(), -x));
            assert_eq!(asym_rc_time(PulseSpec::symmetric(0.4), x), rc_time(0.4, x));
        }
    }

    #[test]
    fn integer_zero_crossings() {
        for a in [0.0, 0.08, 0.3, 0.48, 1.0] {
            for k in 1..8 {
                assert!(rc_time(a, k as f64).abs() < 1e-15, "alpha {a} k {k}");
            }
        }
    }

    #[test]
    fn prototype_cases() {
        assert_eq!(rc_freq_prototype(0.35, 0.0).value, 1.0);
        for a in [0.1, 0.35, 1.0] {
            assert!((rc_freq_prototype(a, 0.5).value - 0.5).abs() < 1e-15);
        }
        assert_eq!(rc_freq_prototype(0.35, 0.7).value, 0.0);
        let d = rc_freq_prototype(0.0, 0.2);
        assert!(d.degenerate && d.value == 1.0);
    }

    #[test]
    fn tails_shrink_with_rolloff() {
        let grid: Vec<f64> = (0..=3000).map(|i| 3.0 + i as f64 * 1e-3).collect();
        let peak = |a: f64| grid.iter().map(|&x| rc_time(a, x).abs()).fold(0.0, f64::max);
        let alphas = [0.1, 0.3, 0.5, 0.8, 1.0];
        for w in alphas.windows(2) {
            assert!(peak(w[1]) <= peak(w[0]), "{} vs {}", w[0], w[1]);
        }
    }

    #[test]
    fn identity_map_samples_are_sinc() {
        let v = 6;
        let map = WarpingMap::uniform(v, 10).unwrap();
        let s = warped_pulse_samples(PulseSpec::symmetric(0.0), &map, 4, map.len_samples()).unwrap();
        for (k, c) in s.samples().iter().enumerate() {
            assert!((c.re - sinc(k as f64 / v as f64 - 4.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn spectrum_satisfies_parseval() {
        let map = WarpingMap::uniform(4, 16).unwrap();
        let spec = PulseSpec { alpha_left: 1.0, alpha_right: 0.2 };
        let s = warped_pulse_samples(spec, &map, 8, 128).unwrap();
        let f = warped_pulse_spectrum(spec, &map, 8, 128).unwrap();
        let et: f64 = s.samples().iter().map(|c| c.norm_sqr()).sum();
        let ef: f64 = f.iter().map(|c| c.norm_sqr()).sum::<f64>() / 128.0;
        assert!((et - ef).abs() < 1e-9 * et);
        assert!(warped_pulse_spectrum(spec, &map, 8, 100).is_err());
    }
}
