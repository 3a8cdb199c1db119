//! Split modulation: edge pulses through the filter bank, the constant-slope
//! middle through a DFT-spread branch with a frequency-domain RC window.

use super::{check_len, tx_filterbank, PhyError};
use crate::pulses::rc_freq_prototype;
use crate::spectral::{dft_ref, fft_radix2, PruneSpec, PrunedDit};
use crate::wavecore::{SampledSignal, WaveformConfig};
use num_complex::Complex64;

/// Sizes and precomputed window of the DFT-spread branch.
#[derive(Debug, Clone)]
pub struct SplitPlan {
    cfg: WaveformConfig,
    edge: usize,
    /// Data index of the first DFT input.
    first: usize,
    n_dft: usize,
    n_ifft: usize,
    /// Output sample where the inverse transform starts.
    start: usize,
    /// `(ifft bin, window value, dft bin)` for every nonzero branch bin.
    bins: Vec<(usize, f64, usize)>,
    dit: PrunedDit,
}

impl SplitPlan {
    /// `e` edge pulses per side go through the filter bank; the DFT branch
    /// spans `N - 2 (e - z_e)` positions with `z_e` zero inputs per side.
    pub fn new(cfg: &WaveformConfig, e: usize, z_e: usize) -> Result<Self, PhyError> {
        let n = cfg.n_pulses();
        if z_e > e || 2 * e >= n {
            return Err(PhyError::Size(format!("need z_e <= e and 2e < N (e={e}, z_e={z_e}, N={n})")));
        }
        let first = e - z_e;
        let n_dft = n - 2 * first;
        let v = cfg.v() as usize;
        let n_ifft = n_dft * v;
        if v < 2 {
            return Err(PhyError::Size("the RC window needs at least 2 samples per pulse".into()));
        }
        let pairs = cfg.profile().pairs();
        let alpha = pairs[e].0;
        for (k, &(l, r)) in pairs.iter().enumerate().take(n - e).skip(e) {
            if l != r || l != alpha {
                return Err(PhyError::Split {
                    pulse: k,
                    reason: format!("roll-off ({l}, {r}) differs from the shared {alpha}"),
                });
            }
        }
        let map = cfg.warp();
        let lo = map.domain().0;
        let anchor = |d: usize| map.anchor(cfg.pulse_coordinate(d));
        let a0 = anchor(first)?;
        for i in 1..n_dft {
            let a = anchor(first + i)?;
            if a - a0 != (i * v) as i64 {
                return Err(PhyError::Split {
                    pulse: first + i,
                    reason: format!("anchor {a} is off the {v}-sample grid starting at {a0}"),
                });
            }
        }
        let start = (a0 - lo) as usize;
        if start + n_ifft > map.len_samples() {
            return Err(PhyError::Size(format!(
                "branch of {n_ifft} samples from {start} overruns the {}-sample symbol",
                map.len_samples()
            )));
        }
        let bins: Vec<(usize, f64, usize)> = (0..2 * n_dft)
            .map(|j| {
                let k = j as i64 - n_dft as i64;
                let w = rc_freq_prototype(alpha, k as f64 / n_dft as f64).value;
                (k.rem_euclid(n_ifft as i64) as usize, w, k.rem_euclid(n_dft as i64) as usize)
            })
            .collect();
        let spec = PruneSpec::new(n_ifft, bins.iter().map(|b| b.0), 0..n_ifft)?;
        Ok(Self { cfg: cfg.clone(), edge: e, first, n_dft, n_ifft, start, bins, dit: PrunedDit::new(&spec) })
    }

    pub fn n_dft(&self) -> usize {
        self.n_dft
    }

    /// Width of the frequency-domain window.
    pub fn n_window(&self) -> usize {
        self.bins.len()
    }

    pub fn n_ifft(&self) -> usize {
        self.n_ifft
    }

    pub fn total_len(&self) -> usize {
        self.cfg.warp().len_samples()
    }

    /// Output sample where the middle branch is placed.
    pub fn branch_start(&self) -> usize {
        self.start
    }

    /// DFT-spread branch alone: middle pulses only, `n_ifft` samples.
    pub fn middle_branch(&self, data: &[Complex64]) -> Result<Vec<Complex64>, PhyError> {
        let n = self.cfg.n_pulses();
        check_len(data.len(), n)?;
        let d: Vec<Complex64> = (0..self.n_dft)
            .map(|i| {
                let idx = self.first + i;
                if idx >= self.edge && idx < n - self.edge {
                    data[idx]
                } else {
                    Complex64::new(0.0, 0.0)
                }
            })
            .collect();
        let spread = if self.n_dft.is_power_of_two() { fft_radix2(&d)?.0 } else { dft_ref(&d) };
        let mut x = vec![Complex64::new(0.0, 0.0); self.n_ifft];
        for &(bin, w, k) in &self.bins {
            x[bin] = spread[k] * w;
        }
        // unit peak per pulse: the window sums to n_dft over 2 n_dft bins
        let gain = self.n_ifft as f64 / self.n_dft as f64;
        Ok(self.dit.run(&x)?.into_iter().map(|c| c * gain).collect())
    }

    pub fn run(&self, data: &[Complex64]) -> Result<SampledSignal, PhyError> {
        let n = self.cfg.n_pulses();
        check_len(data.len(), n)?;
        let edges: Vec<Complex64> = data
            .iter()
            .enumerate()
            .map(|(i, &a)| if i < self.edge || i >= n - self.edge { a } else { Complex64::new(0.0, 0.0) })
            .collect();
        let mut out = tx_filterbank(&edges, &self.cfg)?.into_samples();
        let mid = self.middle_branch(data)?;
        out[self.start..self.start + self.n_ifft].iter_mut().zip(mid).for_each(|(o, m)| *o += m);
        Ok(SampledSignal::new(out, self.cfg.v(), self.cfg.warp().domain().0)?)
    }
}

/// One-shot split transmitter.
pub fn tx_split(data: &[Complex64], cfg: &WaveformConfig, e: usize, z_e: usize) -> Result<SampledSignal, PhyError> {
    SplitPlan::new(cfg, e, z_e)?.run(data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wavecore::{RolloffProfile, WarpingMap};

    fn cfg() -> WaveformConfig {
        let mut outer = vec![1.0, 0.5, 0.3];
        outer.extend([0.2; 9]);
        let profile = RolloffProfile::mirrored(&outer, None).unwrap();
        let map = WarpingMap::uniform(4, 26).unwrap();
        WaveformConfig::new(24, 1, 1, 4, 16, profile, map).unwrap()
    }

    #[test]
    fn sizes() {
        let p = SplitPlan::new(&cfg(), 6, 4).unwrap();
        assert_eq!((p.n_dft(), p.n_window(), p.n_ifft()), (20, 40, 80));
        assert_eq!(p.branch_start(), 4 * 3);
    }

    #[test]
    fn single_middle_pulse_peaks_at_one() {
        let p = SplitPlan::new(&cfg(), 6, 4).unwrap();
        let mut d = vec![Complex64::new(0.0, 0.0); 24];
        d[10] = Complex64::new(1.0, 0.0);
        let m = p.middle_branch(&d).unwrap();
        assert!((m[(10 - 2) * 4] - 1.0).norm() < 1e-12);
        for i in [9usize, 11, 12] {
            assert!(m[(i - 2) * 4].norm() < 1e-12);
        }
    }

    #[test]
    fn zero_middle_equals_edge_filterbank() {
        let c = cfg();
        let mut d: Vec<Complex64> = (0..24).map(|k| Complex64::new(1.0 + k as f64, 0.5)).collect();
        d[6..18].iter_mut().for_each(|x| *x = Complex64::new(0.0, 0.0));
        let a = tx_split(&d, &c, 6, 4).unwrap();
        let b = tx_filterbank(&d, &c).unwrap();
        assert_eq!(a.samples(), b.samples());
    }

    #[test]
    fn unequal_middle_rolloff_is_named() {
        let mut outer = vec![1.0, 0.5, 0.3];
        outer.extend([0.2; 6]);
        outer.extend([0.19; 3]);
        let profile = RolloffProfile::mirrored(&outer, None).unwrap();
        let c = WaveformConfig::new(24, 1, 1, 4, 16, profile, WarpingMap::uniform(4, 26).unwrap()).unwrap();
        assert!(matches!(SplitPlan::new(&c, 6, 4), Err(PhyError::Split { pulse: 9, .. })));
    }
}
