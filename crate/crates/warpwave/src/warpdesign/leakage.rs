//! Out-of-band energy fraction of warped pulses.
//!
//! The in-band energy of a densely sampled pulse is computed exactly from
//! its autocorrelation `r[m]`: integrating `|P(f)|^2` over `|f| <= fm`
//! gives `dt * sum_m r[m] * 2 fm * sinc(2 fm m dt)`, with total energy
//! `dt * r[0]`. The result does not depend on any frequency grid.

use super::{wdot_eval, wdot_rising, WarpError, WarpTable, TABLE_STEP};
use crate::pulses::{asym_rc_time, sinc, PulseSpec};
use crate::spectral::{fft_radix2, ifft_radix2};
use crate::wavecore::{RolloffProfile, Validate, WarpDerivativeParams};
use num_complex::Complex64;
use rayon::prelude::*;

/// Time sampling of pulses for leakage evaluation, in pulse periods.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LeakageGrid {
    pub dt: f64,
    /// Pulses are sampled over `[-t_max, t_max]`.
    pub t_max: f64,
    /// One-sided band edge in cycles per pulse period.
    pub band_edge: f64,
}

impl Default for LeakageGrid {
    fn default() -> Self {
        Self { dt: 0.125, t_max: 64.0, band_edge: 0.5 }
    }
}

impl LeakageGrid {
    fn times(&self) -> impl Iterator<Item = f64> + '_ {
        let k = (self.t_max / self.dt).round() as i64;
        (-k..=k).map(move |i| i as f64 * self.dt)
    }
}

/// Fraction of energy outside `|f| <= band_edge` of real samples spaced `dt`.
pub fn leakage_of_samples(samples: &[f64], dt: f64, band_edge: f64) -> f64 {
    let n = samples.len();
    if n == 0 {
        return 0.0;
    }
    let nfft = (2 * n).next_power_of_two();
    let mut buf = vec![Complex64::new(0.0, 0.0); nfft];
    for (b, &s) in buf.iter_mut().zip(samples) {
        b.re = s;
    }
    let (spec, _) = fft_radix2(&buf).expect("power-of-two length");
    let power: Vec<Complex64> = spec.iter().map(|c| Complex64::new(c.norm_sqr(), 0.0)).collect();
    let (r, _) = ifft_radix2(&power).expect("power-of-two length");
    let r0 = r[0].re;
    if r0 <= 0.0 {
        return 0.0;
    }
    let w = 2.0 * band_edge;
    let mut inband = r0 * w;
    for (m, rm) in r.iter().enumerate().take(n).skip(1) {
        inband += 2.0 * rm.re * w * sinc(w * m as f64 * dt);
    }
    (1.0 - dt * inband / r0).max(0.0)
}

fn pulse_leakage(spec: PulseSpec, center: f64, table: &WarpTable, grid: &LeakageGrid) -> f64 {
    let samples: Vec<f64> = grid.times().map(|t| asym_rc_time(spec, table.eval(t) - center)).collect();
    leakage_of_samples(&samples, grid.dt, grid.band_edge)
}

/// Leakage of every pulse of `profile` under the double-sigmoid warp, with
/// pulse `n` centred at warped coordinate `n - (N - 1) / 2`.
pub fn leakage_per_pulse(
    profile: &RolloffProfile,
    params: &WarpDerivativeParams,
    grid: &LeakageGrid,
) -> Result<Vec<f64>, WarpError> {
    params.validate()?;
    let q = *params;
    let r = grid.t_max + 1.0;
    let table = WarpTable::from_derivative(move |t| wdot_eval(&q, t), -r, r, TABLE_STEP);
    Ok(leakage_with_table(profile, &table, grid))
}

/// Per-pulse leakage using a prebuilt table covering `[-t_max, t_max]`.
pub(crate) fn leakage_with_table(profile: &RolloffProfile, table: &WarpTable, grid: &LeakageGrid) -> Vec<f64> {
    let half = (profile.len() as f64 - 1.0) / 2.0;
    profile
        .pairs()
        .par_iter()
        .enumerate()
        .map(|(n, &pair)| pulse_leakage(pair.into(), n as f64 - half, table, grid))
        .collect()
}

/// Largest per-pulse leakage.
pub fn leakage_profile(
    profile: &RolloffProfile,
    params: &WarpDerivativeParams,
    grid: &LeakageGrid,
) -> Result<f64, WarpError> {
    Ok(leakage_per_pulse(profile, params, grid)?.into_iter().fold(0.0, f64::max))
}

/// Leakage of one pulse centred at the origin under the one-sided warp that
/// rises from `s_out` to `s_in` around `t1` (only `s_out`, `s_in`, `t1` and
/// `t_cap` are used).
pub fn leakage_single(spec: PulseSpec, params: &WarpDerivativeParams, grid: &LeakageGrid) -> f64 {
    let q = *params;
    let r = grid.t_max + 1.0;
    let table = WarpTable::from_derivative(move |t| wdot_rising(&q, t), -r, r, TABLE_STEP);
    pulse_leakage(spec, 0.0, &table, grid)
}
