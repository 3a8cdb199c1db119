//! Filter-bank synthesis of the warped symbol and its pruned ZF receiver.

use super::{check_len, Constellation, Modem, PhyError, ZF_THRESHOLD};
use crate::pulses::warped_pulse_samples;
use crate::spectral::{PruneSpec, PrunedDif, PrunedDit};
use crate::wavecore::{SampledSignal, WaveformConfig};
use num_complex::Complex64;
use std::f64::consts::PI;

/// Real sampled pulse of every data slot over the map domain.
fn pulse_bank(cfg: &WaveformConfig) -> Result<Vec<Vec<f64>>, PhyError> {
    let len = cfg.warp().len_samples();
    cfg.profile()
        .pairs()
        .iter()
        .enumerate()
        .map(|(n, &pair)| {
            let s = warped_pulse_samples(pair.into(), cfg.warp(), cfg.pulse_coordinate(n), len)?;
            Ok(s.samples().iter().map(|c| c.re).collect())
        })
        .collect()
}

fn synthesize(bank: &[Vec<f64>], data: &[Complex64], len: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); len];
    for (a, p) in data.iter().zip(bank) {
        if *a == Complex64::new(0.0, 0.0) {
            continue;
        }
        out.iter_mut().zip(p).for_each(|(o, &v)| *o += a * v);
    }
    out
}

/// `sum_n a[n] P_n` over the map domain; guard slots stay unmodulated.
pub fn tx_filterbank(data: &[Complex64], cfg: &WaveformConfig) -> Result<SampledSignal, PhyError> {
    check_len(data.len(), cfg.n_pulses())?;
    let bank = pulse_bank(cfg)?;
    let out = synthesize(&bank, data, cfg.warp().len_samples());
    Ok(SampledSignal::new(out, cfg.v(), cfg.warp().domain().0)?)
}

/// Channel frequency response at `bins` of an `m`-point transform.
pub fn channel_response(taps: &[Complex64], m: usize, bins: &[usize]) -> Vec<Complex64> {
    bins.iter()
        .map(|&k| {
            taps.iter()
                .enumerate()
                .map(|(l, h)| h * Complex64::from_polar(1.0, -2.0 * PI * ((k * l) % m) as f64 / m as f64))
                .sum()
        })
        .collect()
}

/// Receiver plans for one waveform: band selection, ZF and anchor sampling.
#[derive(Debug, Clone)]
pub struct WarpedReceiver {
    m: usize,
    band: Vec<usize>,
    anchors: Vec<usize>,
    dif: PrunedDif,
    dit: PrunedDit,
}

impl WarpedReceiver {
    /// Keeps bins `[0, b)` and `[M - b, M)` with `b = M / V` unless overridden.
    pub fn new(cfg: &WaveformConfig, band_bins: Option<usize>) -> Result<Self, PhyError> {
        let m = cfg.warp().len_samples();
        let b = band_bins.unwrap_or(m / cfg.v() as usize);
        if b == 0 || 2 * b > m {
            return Err(PhyError::Size(format!("band of {b} bins per side does not fit {m} bins")));
        }
        let band: Vec<usize> = (0..b).chain(m - b..m).collect();
        let lo = cfg.warp().domain().0;
        let anchors = (0..cfg.n_pulses())
            .map(|n| Ok((cfg.warp().anchor(cfg.pulse_coordinate(n))? - lo) as usize))
            .collect::<Result<Vec<usize>, PhyError>>()?;
        let dif = PrunedDif::new(&PruneSpec::keep_outputs(m, band.iter().copied())?);
        let dit = PrunedDit::new(&PruneSpec::new(m, band.iter().copied(), anchors.iter().copied())?);
        Ok(Self { m, band, anchors, dif, dit })
    }

    pub fn band(&self) -> &[usize] {
        &self.band
    }

    pub fn window_len(&self) -> usize {
        self.m
    }

    pub fn anchors(&self) -> &[usize] {
        &self.anchors
    }

    /// Kept bins of the received window.
    pub fn band_spectrum(&self, rx: &[Complex64]) -> Result<Vec<Complex64>, PhyError> {
        if rx.len() != self.m {
            return Err(PhyError::WindowLength { got: rx.len(), want: self.m });
        }
        Ok(self.dif.run(rx)?)
    }

    /// Zero-forced band bins, or the first bin where the channel vanishes.
    pub fn zero_force(&self, kept: &[Complex64], taps: &[Complex64]) -> Result<Vec<Complex64>, PhyError> {
        let h = channel_response(taps, self.m, &self.band);
        kept.iter()
            .zip(&h)
            .zip(&self.band)
            .map(|((r, h), &bin)| {
                if h.norm() < ZF_THRESHOLD {
                    Err(PhyError::ZfSingular { bin, magnitude: h.norm() })
                } else {
                    Ok(r / h)
                }
            })
            .collect()
    }

    /// Samples at the data anchors after band selection and ZF.
    pub fn equalize(&self, rx: &[Complex64], taps: &[Complex64]) -> Result<Vec<Complex64>, PhyError> {
        let kept = self.band_spectrum(rx)?;
        let eq = self.zero_force(&kept, taps)?;
        let mut full = vec![Complex64::new(0.0, 0.0); self.m];
        self.band.iter().zip(eq).for_each(|(&k, v)| full[k] = v);
        Ok(self.dit.run(&full)?)
    }
}

/// Recovered bits of one received warped symbol with perfect channel knowledge.
pub fn rx_chain(received: &SampledSignal, cfg: &WaveformConfig, csi: &[Complex64]) -> Result<Vec<u8>, PhyError> {
    let rx = WarpedReceiver::new(cfg, None)?;
    let symbols = rx.equalize(received.samples(), csi)?;
    Ok(Constellation::new(cfg.qam_order())?.demap(&symbols))
}

/// Cached transmitter and receiver of one warped configuration.
#[derive(Debug, Clone)]
pub struct WarpedModem {
    label: String,
    cfg: WaveformConfig,
    bank: Vec<Vec<f64>>,
    receiver: WarpedReceiver,
    constellation: Constellation,
}

impl WarpedModem {
    pub fn new(label: impl Into<String>, cfg: WaveformConfig, band_bins: Option<usize>) -> Result<Self, PhyError> {
        let bank = pulse_bank(&cfg)?;
        let receiver = WarpedReceiver::new(&cfg, band_bins)?;
        let constellation = Constellation::new(cfg.qam_order())?;
        Ok(Self { label: label.into(), cfg, bank, receiver, constellation })
    }

    pub fn config(&self) -> &WaveformConfig {
        &self.cfg
    }

    pub fn receiver(&self) -> &WarpedReceiver {
        &self.receiver
    }
}

impl Modem for WarpedModem {
    fn label(&self) -> String {
        self.label.clone()
    }

    fn data_len(&self) -> usize {
        self.cfg.n_pulses()
    }

    fn frame_len(&self) -> usize {
        self.cfg.warp().len_samples()
    }

    fn constellation(&self) -> &Constellation {
        &self.constellation
    }

    fn band_edge_bins(&self) -> f64 {
        self.receiver.band.len() as f64 / 2.0
    }

    fn modulate(&self, data: &[Complex64]) -> Result<Vec<Complex64>, PhyError> {
        check_len(data.len(), self.cfg.n_pulses())?;
        Ok(synthesize(&self.bank, data, self.frame_len()))
    }

    fn equalize(&self, rx: &[Complex64], taps: &[Complex64]) -> Result<Vec<Complex64>, PhyError> {
        self.receiver.equalize(rx, taps)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wavecore::{RolloffProfile, WarpingMap};

    fn uniform_cfg() -> WaveformConfig {
        let map = WarpingMap::uniform(8, 16).unwrap();
        WaveformConfig::new(12, 2, 2, 8, 16, RolloffProfile::mirrored(&[0.5; 6], None).unwrap(), map).unwrap()
    }

    #[test]
    fn zero_data_gives_zero_signal() {
        let s = tx_filterbank(&[Complex64::new(0.0, 0.0); 12], &uniform_cfg()).unwrap();
        assert!(s.samples().iter().all(|c| c.norm() == 0.0));
    }

    #[test]
    fn anchors_carry_the_data() {
        let cfg = uniform_cfg();
        let data: Vec<Complex64> = (0..12).map(|k| Complex64::new(k as f64, -(k as f64) * 0.5)).collect();
        let s = tx_filterbank(&data, &cfg).unwrap();
        for (n, a) in data.iter().enumerate() {
            let at = cfg.warp().anchor(cfg.pulse_coordinate(n)).unwrap() as usize;
            assert!((s.samples()[at] - a).norm() < 1e-9);
        }
    }

    #[test]
    fn flat_gain_divides_out() {
        let cfg = uniform_cfg();
        let rx = WarpedReceiver::new(&cfg, None).unwrap();
        let x: Vec<Complex64> = (0..cfg.warp().len_samples()).map(|k| Complex64::new((k as f64).sin(), 0.3)).collect();
        let kept = rx.band_spectrum(&x).unwrap();
        let g = Complex64::new(0.5, -1.5);
        let eq = rx.zero_force(&kept, &[g]).unwrap();
        for (e, k) in eq.iter().zip(&kept) {
            assert!((e - k / g).norm() < 1e-15);
        }
    }

    #[test]
    fn vanishing_channel_is_reported() {
        let cfg = uniform_cfg();
        let rx = WarpedReceiver::new(&cfg, None).unwrap();
        let x = vec![Complex64::new(1.0, 0.0); cfg.warp().len_samples()];
        // [1, 1] has a null at the Nyquist bin, which is outside the band; [1, -1] nulls DC
        assert!(rx.equalize(&x, &[Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0)]).is_ok());
        let r = rx.equalize(&x, &[Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0)]);
        assert!(matches!(r, Err(PhyError::ZfSingular { bin: 0, .. })));
    }

    #[test]
    fn window_length_is_checked() {
        let rx = WarpedReceiver::new(&uniform_cfg(), None).unwrap();
        assert!(matches!(rx.equalize(&[Complex64::new(1.0, 0.0); 5], &[]), Err(PhyError::WindowLength { .. })));
    }
}
