//! Containment and envelope measurements over random-data frames.

use crate::LabError;
use num_complex::Complex64;
use rand::Rng;
use warpwave::channel::{substream, Stream};
use warpwave::phy::{papr, Modem};
use warpwave::spectral::{PruneSpec, PrunedDif};

/// Uniformly drawn constellation points.
pub fn random_symbols(modem: &dyn Modem, rng: &mut impl Rng) -> Vec<Complex64> {
    let points = modem.constellation().points();
    (0..modem.data_len()).map(|_| points[rng.gen_range(0..points.len())]).collect()
}

/// Frame `t` of a measurement run; frames are independent of each other and
/// of the run length.
pub fn random_frame(modem: &dyn Modem, seed: u64, t: u64) -> Result<Vec<Complex64>, LabError> {
    let data = random_symbols(modem, &mut substream(seed, t, Stream::VictimData));
    Ok(modem.modulate(&data)?)
}

fn check_trials(trials: usize) -> Result<(), LabError> {
    if trials == 0 {
        return Err(LabError::Validation("at least one trial is required".into()));
    }
    Ok(())
}

/// Averaged periodogram on `nfft` bins, in dB relative to its peak.
#[derive(Debug, Clone, PartialEq)]
pub struct Psd {
    /// Frame length; offsets are expressed in bins of a frame-length transform.
    pub frame_len: usize,
    /// Bin `k` is frequency `k / nfft` cycles per sample (wrapping).
    pub db: Vec<f64>,
}

impl Psd {
    pub fn nfft(&self) -> usize {
        self.db.len()
    }

    /// Frequency of bin `k` in frame bins, signed.
    pub fn offset_of(&self, k: usize) -> f64 {
        let n = self.nfft() as f64;
        let f = if k < self.nfft() / 2 { k as f64 } else { k as f64 - n };
        f * self.frame_len as f64 / n
    }

    /// Mean of the two sides at `offset` frame bins, in dB; the nearest bin is used.
    pub fn at_offset(&self, offset: f64) -> f64 {
        let n = self.nfft() as f64;
        let k = (offset * n / self.frame_len as f64).round() as i64;
        let side = |k: i64| 10f64.powf(self.db[k.rem_euclid(n as i64) as usize] / 10.0);
        10.0 * ((side(k) + side(-k)) / 2.0).log10()
    }

    /// Mean power over the one-frame-bin interval centred at `offset` on
    /// both sides, in dB. Interval ends count half (trapezoid rule).
    ///
    /// A frame-length symbol built from whole frame bins can have exact
    /// spectral nulls at integer offsets, so a single sample there says
    /// nothing about the leakage between them.
    pub fn band_level(&self, offset: f64) -> f64 {
        let n = self.nfft() as i64;
        let per_bin = self.nfft() as f64 / self.frame_len as f64;
        let lo = ((offset - 0.5) * per_bin).round() as i64;
        let hi = ((offset + 0.5) * per_bin).round() as i64;
        let lin = |k: i64| 10f64.powf(self.db[k.rem_euclid(n) as usize] / 10.0);
        let (mut sum, mut weight) = (0.0, 0.0);
        for k in lo..=hi {
            let w = if k == lo || k == hi { 0.5 } else { 1.0 };
            sum += w * (lin(k) + lin(-k));
            weight += 2.0 * w;
        }
        10.0 * (sum / weight).log10()
    }
}

/// Welch estimate over `trials` consecutive frames: flat-window segments one
/// frame long, advanced by `hop` samples, zero-padded `pad` times.
pub fn psd_welch_hop(modem: &dyn Modem, trials: usize, seed: u64, pad: usize, hop: usize) -> Result<Psd, LabError> {
    check_trials(trials)?;
    let len = modem.frame_len();
    let nfft = len * pad.max(1);
    let plan = PrunedDif::new(&PruneSpec::full(nfft).map_err(warpwave::phy::PhyError::from)?);
    let mut stream = Vec::with_capacity(trials * len);
    for t in 0..trials {
        stream.extend(random_frame(modem, seed, t as u64)?);
    }
    let hop = hop.max(1);
    let mut acc = vec![0.0; nfft];
    let mut segments = 0usize;
    let mut buf = vec![Complex64::new(0.0, 0.0); nfft];
    for start in (0..=stream.len() - len).step_by(hop) {
        buf[..len].copy_from_slice(&stream[start..start + len]);
        let spec = plan.run(&buf).map_err(warpwave::phy::PhyError::from)?;
        acc.iter_mut().zip(&spec).for_each(|(a, c)| *a += c.norm_sqr());
        segments += 1;
    }
    let peak = acc.iter().copied().fold(0.0, f64::max);
    if !(peak > 0.0) {
        return Err(LabError::Numerical("spectrum is identically zero".into()));
    }
    let db = acc.iter().map(|&p| 10.0 * (p.max(peak * 1e-30) / peak).log10()).collect();
    debug_assert!(segments > 0);
    Ok(Psd { frame_len: len, db })
}

/// Welch estimate with segments aligned to frame boundaries, so every
/// segment holds exactly one symbol and the flat window never cuts one.
pub fn psd_welch(modem: &dyn Modem, trials: usize, seed: u64, pad: usize) -> Result<Psd, LabError> {
    psd_welch_hop(modem, trials, seed, pad, modem.frame_len())
}

/// Per-sample RMS amplitude over `trials` frames, in dB relative to the
/// frame's mean power.
pub fn time_profile(modem: &dyn Modem, trials: usize, seed: u64) -> Result<Vec<f64>, LabError> {
    check_trials(trials)?;
    let mut acc = vec![0.0; modem.frame_len()];
    for t in 0..trials {
        acc.iter_mut().zip(random_frame(modem, seed, t as u64)?).for_each(|(a, x)| *a += x.norm_sqr());
    }
    let mean = acc.iter().sum::<f64>() / acc.len() as f64;
    if !(mean > 0.0) {
        return Err(LabError::Numerical("frames have zero power".into()));
    }
    Ok(acc.iter().map(|&p| 10.0 * (p.max(mean * 1e-30) / mean).log10()).collect())
}

/// Power-averaged level of the first and last `edge` samples of a profile, in dB.
pub fn edge_level_db(profile_db: &[f64], edge: usize) -> f64 {
    let n = profile_db.len();
    let edge = edge.min(n / 2);
    let lin = |d: &f64| 10f64.powf(d / 10.0);
    let sum: f64 = profile_db[..edge].iter().chain(&profile_db[n - edge..]).map(lin).sum();
    10.0 * (sum / (2 * edge) as f64).log10()
}

/// Median and 99th percentile of the per-frame PAPR, in dB.
pub fn papr_stats(modem: &dyn Modem, trials: usize, seed: u64) -> Result<(f64, f64), LabError> {
    check_trials(trials)?;
    let mut v = (0..trials)
        .map(|t| Ok(papr(&random_frame(modem, seed, t as u64)?)?))
        .collect::<Result<Vec<f64>, LabError>>()?;
    v.sort_by(f64::total_cmp);
    let q = |p: f64| v[((p * (v.len() - 1) as f64).round() as usize).min(v.len() - 1)];
    Ok((q(0.5), q(0.99)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;

    #[test]
    fn zero_trials_rejected() {
        let m = presets::zt(4, 16).unwrap();
        assert!(matches!(psd_welch(&m, 0, 1, 4), Err(LabError::Validation(_))));
        assert!(matches!(time_profile(&m, 0, 1), Err(LabError::Validation(_))));
    }

    #[test]
    fn psd_peaks_at_zero_db_in_band() {
        let m = presets::zt(4, 16).unwrap();
        let p = psd_welch(&m, 20, 3, 4).unwrap();
        assert_eq!(p.nfft(), 512);
        assert!(p.db.iter().all(|&d| d <= 0.0));
        assert!(p.at_offset(3.0) > -6.0);
        assert!(p.at_offset(30.0) < -20.0);
        assert_eq!(p.offset_of(4), 1.0);
    }

    #[test]
    fn time_profile_averages_to_zero_db() {
        let m = presets::cp_dfts(16).unwrap();
        let t = time_profile(&m, 30, 2).unwrap();
        let mean: f64 = t.iter().map(|d| 10f64.powf(d / 10.0)).sum::<f64>() / t.len() as f64;
        assert!((mean - 1.0).abs() < 1e-9);
        assert!((edge_level_db(&[0.0; 8], 2)).abs() < 1e-12);
    }

    #[test]
    fn single_carrier_has_lower_papr_than_ofdm() {
        let sc = papr_stats(&presets::cp_dfts(16).unwrap(), 50, 1).unwrap();
        let mc = papr_stats(&presets::cp_ofdm(104, 16).unwrap(), 50, 1).unwrap();
        assert!(sc.0 < mc.0, "{sc:?} vs {mc:?}");
    }
}
