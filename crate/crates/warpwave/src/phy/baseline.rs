//! Baseline waveforms: zero-tail and cyclic-prefix DFT-spread OFDM and
//! plain CP-OFDM, each with a perfect-CSI zero-forcing receiver.

use super::{channel_response, check_len, Constellation, Modem, PhyError, ZF_THRESHOLD};
use crate::spectral::{PruneSpec, PrunedDif, PrunedDit};
use crate::wavecore::SampledSignal;
use num_complex::Complex64;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// `width` contiguous bins of a `size`-point transform centred on DC, listed
/// from the most negative frequency up.
fn centred_bins(width: usize, size: usize) -> Vec<usize> {
    (0..width).map(|j| (j as i64 - (width / 2) as i64).rem_euclid(size as i64) as usize).collect()
}

/// Position of every listed bin in the ascending order used by pruned plans.
fn sorted_positions(bins: &[usize]) -> Vec<usize> {
    let mut sorted = bins.to_vec();
    sorted.sort_unstable();
    bins.iter().map(|b| sorted.binary_search(b).expect("listed bin")).collect()
}

fn zero_force(r: &[Complex64], h: &[Complex64], bins: &[usize]) -> Result<Vec<Complex64>, PhyError> {
    r.iter()
        .zip(h)
        .zip(bins)
        .map(
            |((r, h), &bin)| {
                if h.norm() < ZF_THRESHOLD {
                    Err(PhyError::ZfSingular { bin, magnitude: h.norm() })
                } else {
                    Ok(r / h)
                }
            },
        )
        .collect()
}

/// Plans shared by the three schemes: `width` occupied bins of an `ifft`-point
/// body preceded by `cp` cyclic-prefix samples, optionally DFT-spread.
#[derive(Debug, Clone)]
struct Ofdm {
    ifft: usize,
    cp: usize,
    bins: Vec<usize>,
    /// Position of `bins[j]` in the pruned plans' ascending output order.
    pos: Vec<usize>,
    tx: PrunedDit,
    rx: PrunedDif,
    spread_fwd: Option<PrunedDif>,
    spread_inv: Option<PrunedDit>,
    gain: f64,
}

impl Ofdm {
    fn new(width: usize, ifft: usize, cp: usize, spread: bool) -> Result<Self, PhyError> {
        if width == 0 || width > ifft {
            return Err(PhyError::Size(format!("{width} occupied bins do not fit a {ifft}-point transform")));
        }
        if cp > ifft {
            return Err(PhyError::Size(format!("cyclic prefix {cp} longer than the {ifft}-sample body")));
        }
        let bins = centred_bins(width, ifft);
        let pos = sorted_positions(&bins);
        let tx = PrunedDit::new(&PruneSpec::new(ifft, bins.iter().copied(), 0..ifft)?);
        let rx = PrunedDif::new(&PruneSpec::keep_outputs(ifft, bins.iter().copied())?);
        let (spread_fwd, spread_inv, gain) = if spread {
            let full = PruneSpec::full(width)?;
            // unit-amplitude symbols come out with unit peak
            (Some(PrunedDif::new(&full)), Some(PrunedDit::new(&full)), ifft as f64 / width as f64)
        } else {
            (None, None, ifft as f64 / (width as f64).sqrt())
        };
        Ok(Self { ifft, cp, bins, pos, tx, rx, spread_fwd, spread_inv, gain })
    }

    fn width(&self) -> usize {
        self.bins.len()
    }

    fn frame_len(&self) -> usize {
        self.ifft + self.cp
    }

    /// Frequency-domain symbols in listed-bin order.
    fn to_bins(&self, data: &[Complex64]) -> Result<Vec<Complex64>, PhyError> {
        match &self.spread_fwd {
            Some(dft) => {
                let w = self.width();
                let d = dft.run(data)?;
                Ok((0..w).map(|j| d[(j as i64 - (w / 2) as i64).rem_euclid(w as i64) as usize]).collect())
            }
            None => Ok(data.to_vec()),
        }
    }

    fn despread(&self, y: Vec<Complex64>) -> Result<Vec<Complex64>, PhyError> {
        match &self.spread_inv {
            Some(idft) => {
                let w = self.width();
                let mut d = vec![ZERO; w];
                for (j, v) in y.into_iter().enumerate() {
                    d[(j as i64 - (w / 2) as i64).rem_euclid(w as i64) as usize] = v;
                }
                Ok(idft.run(&d)?)
            }
            None => Ok(y),
        }
    }

    fn modulate(&self, data: &[Complex64]) -> Result<Vec<Complex64>, PhyError> {
        check_len(data.len(), self.width())?;
        let mut x = vec![ZERO; self.ifft];
        self.bins.iter().zip(self.to_bins(data)?).for_each(|(&b, v)| x[b] = v);
        let body: Vec<Complex64> = self.tx.run(&x)?.into_iter().map(|c| c * self.gain).collect();
        Ok(body[self.ifft - self.cp..].iter().chain(&body).copied().collect())
    }

    fn equalize(&self, rx: &[Complex64], taps: &[Complex64]) -> Result<Vec<Complex64>, PhyError> {
        if rx.len() != self.frame_len() {
            return Err(PhyError::WindowLength { got: rx.len(), want: self.frame_len() });
        }
        let kept = self.rx.run(&rx[self.cp..])?;
        let r: Vec<Complex64> = self.pos.iter().map(|&p| kept[p]).collect();
        let h = channel_response(taps, self.ifft, &self.bins);
        let eq = zero_force(&r, &h, &self.bins)?;
        self.despread(eq.into_iter().map(|v| v / self.gain).collect())
    }
}

/// Nearest whole number of samples per data symbol, for signal metadata.
fn nominal_v(samples: usize, symbols: usize) -> u32 {
    ((samples as f64 / symbols as f64).round() as u32).max(1)
}

/// Zero-tail DFT-spread OFDM: `z_h` and `z_t` zeros around the data inside
/// the spreading transform, no cyclic prefix.
#[derive(Debug, Clone)]
pub struct ZtDftsOfdm {
    inner: Ofdm,
    z_h: usize,
    z_t: usize,
    constellation: Constellation,
}

impl ZtDftsOfdm {
    pub fn new(dft_size: usize, ifft_size: usize, z_h: usize, z_t: usize, qam_order: u32) -> Result<Self, PhyError> {
        if z_h + z_t >= dft_size {
            return Err(PhyError::Size(format!(
                "{z_h} + {z_t} zero samples leave no data in a {dft_size}-point spread"
            )));
        }
        Ok(Self {
            inner: Ofdm::new(dft_size, ifft_size, 0, true)?,
            z_h,
            z_t,
            constellation: Constellation::new(qam_order)?,
        })
    }

    pub fn dft_size(&self) -> usize {
        self.inner.width()
    }

    fn padded(&self, data: &[Complex64]) -> Result<Vec<Complex64>, PhyError> {
        check_len(data.len(), self.data_len())?;
        let mut d = vec![ZERO; self.dft_size()];
        d[self.z_h..self.z_h + data.len()].copy_from_slice(data);
        Ok(d)
    }
}

impl Modem for ZtDftsOfdm {
    fn label(&self) -> String {
        format!("zt-dfts-ofdm-z{}", self.z_h.max(self.z_t))
    }

    fn data_len(&self) -> usize {
        self.dft_size() - self.z_h - self.z_t
    }

    fn frame_len(&self) -> usize {
        self.inner.frame_len()
    }

    fn constellation(&self) -> &Constellation {
        &self.constellation
    }

    fn band_edge_bins(&self) -> f64 {
        self.dft_size() as f64 / 2.0
    }

    fn modulate(&self, data: &[Complex64]) -> Result<Vec<Complex64>, PhyError> {
        self.inner.modulate(&self.padded(data)?)
    }

    fn equalize(&self, rx: &[Complex64], taps: &[Complex64]) -> Result<Vec<Complex64>, PhyError> {
        let d = self.inner.equalize(rx, taps)?;
        Ok(d[self.z_h..self.z_h + self.data_len()].to_vec())
    }
}

/// Cyclic-prefix DFT-spread OFDM.
#[derive(Debug, Clone)]
pub struct CpDftsOfdm {
    inner: Ofdm,
    constellation: Constellation,
}

impl CpDftsOfdm {
    pub fn new(dft_size: usize, ifft_size: usize, cp: usize, qam_order: u32) -> Result<Self, PhyError> {
        Ok(Self { inner: Ofdm::new(dft_size, ifft_size, cp, true)?, constellation: Constellation::new(qam_order)? })
    }
}

impl Modem for CpDftsOfdm {
    fn label(&self) -> String {
        "cp-dfts-ofdm".into()
    }

    fn data_len(&self) -> usize {
        self.inner.width()
    }

    fn frame_len(&self) -> usize {
        self.inner.frame_len()
    }

    fn constellation(&self) -> &Constellation {
        &self.constellation
    }

    fn band_edge_bins(&self) -> f64 {
        self.inner.width() as f64 / 2.0 * self.frame_len() as f64 / self.inner.ifft as f64
    }

    fn modulate(&self, data: &[Complex64]) -> Result<Vec<Complex64>, PhyError> {
        self.inner.modulate(data)
    }

    fn equalize(&self, rx: &[Complex64], taps: &[Complex64]) -> Result<Vec<Complex64>, PhyError> {
        self.inner.equalize(rx, taps)
    }
}

/// Cyclic-prefix OFDM with `n_sc` centred subcarriers.
#[derive(Debug, Clone)]
pub struct CpOfdm {
    inner: Ofdm,
    constellation: Constellation,
}

impl CpOfdm {
    pub fn new(n_sc: usize, ifft_size: usize, cp: usize, qam_order: u32) -> Result<Self, PhyError> {
        Ok(Self { inner: Ofdm::new(n_sc, ifft_size, cp, false)?, constellation: Constellation::new(qam_order)? })
    }
}

impl Modem for CpOfdm {
    fn label(&self) -> String {
        "cp-ofdm".into()
    }

    fn data_len(&self) -> usize {
        self.inner.width()
    }

    fn frame_len(&self) -> usize {
        self.inner.frame_len()
    }

    fn constellation(&self) -> &Constellation {
        &self.constellation
    }

    fn band_edge_bins(&self) -> f64 {
        self.inner.width() as f64 / 2.0 * self.frame_len() as f64 / self.inner.ifft as f64
    }

    fn modulate(&self, data: &[Complex64]) -> Result<Vec<Complex64>, PhyError> {
        self.inner.modulate(data)
    }

    fn equalize(&self, rx: &[Complex64], taps: &[Complex64]) -> Result<Vec<Complex64>, PhyError> {
        self.inner.equalize(rx, taps)
    }
}

// Modulation does not depend on the constellation; QPSK is a placeholder.
const ANY_ORDER: u32 = 4;

pub fn tx_zt_dfts_ofdm(
    data: &[Complex64],
    dft_size: usize,
    ifft_size: usize,
    z_h: usize,
    z_t: usize,
) -> Result<SampledSignal, PhyError> {
    let m = ZtDftsOfdm::new(dft_size, ifft_size, z_h, z_t, ANY_ORDER)?;
    Ok(SampledSignal::new(m.modulate(data)?, nominal_v(ifft_size, dft_size), 0)?)
}

pub fn tx_cp_dfts_ofdm(
    data: &[Complex64],
    dft_size: usize,
    ifft_size: usize,
    cp: usize,
) -> Result<SampledSignal, PhyError> {
    let m = CpDftsOfdm::new(dft_size, ifft_size, cp, ANY_ORDER)?;
    Ok(SampledSignal::new(m.modulate(data)?, nominal_v(ifft_size, dft_size), cp as i64)?)
}

/// One subcarrier per data symbol.
pub fn tx_cp_ofdm(data: &[Complex64], ifft_size: usize, cp: usize) -> Result<SampledSignal, PhyError> {
    let m = CpOfdm::new(data.len(), ifft_size, cp, ANY_ORDER)?;
    Ok(SampledSignal::new(m.modulate(data)?, nominal_v(ifft_size, data.len()), cp as i64)?)
}

/// Equalized data symbols of one zero-tail frame.
pub fn rx_zt_dfts_ofdm(
    rx: &[Complex64],
    taps: &[Complex64],
    dft_size: usize,
    ifft_size: usize,
    z_h: usize,
    z_t: usize,
) -> Result<Vec<Complex64>, PhyError> {
    ZtDftsOfdm::new(dft_size, ifft_size, z_h, z_t, ANY_ORDER)?.equalize(rx, taps)
}

pub fn rx_cp_dfts_ofdm(
    rx: &[Complex64],
    taps: &[Complex64],
    dft_size: usize,
    ifft_size: usize,
    cp: usize,
) -> Result<Vec<Complex64>, PhyError> {
    CpDftsOfdm::new(dft_size, ifft_size, cp, ANY_ORDER)?.equalize(rx, taps)
}

pub fn rx_cp_ofdm(
    rx: &[Complex64],
    taps: &[Complex64],
    n_sc: usize,
    ifft_size: usize,
    cp: usize,
) -> Result<Vec<Complex64>, PhyError> {
    CpOfdm::new(n_sc, ifft_size, cp, ANY_ORDER)?.equalize(rx, taps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::dft_ref;

    fn data(n: usize) -> Vec<Complex64> {
        (0..n).map(|k| Complex64::new((k as f64 * 0.7).sin(), (k as f64 * 1.3).cos())).collect()
    }

    fn close(a: &[Complex64], b: &[Complex64], tol: f64) {
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(b) {
            assert!((x - y).norm() < tol, "{x} vs {y}");
        }
    }

    #[test]
    fn zt_occupies_centred_bins_and_has_low_tails() {
        let d = data(12);
        let s = tx_zt_dfts_ofdm(&d, 16, 128, 2, 2).unwrap();
        assert_eq!(s.len(), 128);
        let spec = dft_ref(s.samples());
        for (k, c) in spec.iter().enumerate() {
            let f = if k < 64 { k as i64 } else { k as i64 - 128 };
            if !(-8..8).contains(&f) {
                assert!(c.norm() < 1e-9, "bin {k}");
            }
        }
        let p = |r: std::ops::Range<usize>| s.samples()[r].iter().map(|c| c.norm_sqr()).sum::<f64>();
        let (head, mid) = (p(0..8), p(32..96) / 8.0);
        assert!(head > 0.0 && head < 0.2 * mid, "{head} vs {mid}");
    }

    #[test]
    fn zt_zero_data_gives_zero_signal() {
        let s = tx_zt_dfts_ofdm(&[ZERO; 12], 16, 128, 2, 2).unwrap();
        assert!(s.samples().iter().all(|c| c.norm() == 0.0));
    }

    #[test]
    fn cp_copies_the_body_tail() {
        let s = tx_cp_ofdm(&data(104), 104, 24).unwrap();
        assert_eq!(s.len(), 128);
        assert_eq!(&s.samples()[..24], &s.samples()[104..]);
        let s = tx_cp_dfts_ofdm(&data(12), 12, 104, 24).unwrap();
        assert_eq!(&s.samples()[..24], &s.samples()[104..]);
    }

    #[test]
    fn loopbacks_recover_data() {
        let taps = [Complex64::new(1.0, 0.0)];
        let d = data(12);
        let s = tx_zt_dfts_ofdm(&d, 20, 128, 4, 4).unwrap();
        close(&rx_zt_dfts_ofdm(s.samples(), &taps, 20, 128, 4, 4).unwrap(), &d, 1e-12);
        let s = tx_cp_dfts_ofdm(&d, 12, 104, 24).unwrap();
        close(&rx_cp_dfts_ofdm(s.samples(), &taps, 12, 104, 24).unwrap(), &d, 1e-12);
        let s = tx_cp_ofdm(&d, 104, 24).unwrap();
        close(&rx_cp_ofdm(s.samples(), &taps, 12, 104, 24).unwrap(), &d, 1e-12);
    }

    #[test]
    fn cp_absorbs_short_channel() {
        let taps = [Complex64::new(0.8, 0.1), Complex64::new(0.3, -0.2), Complex64::new(0.1, 0.05)];
        let d = data(12);
        let x = tx_cp_dfts_ofdm(&d, 12, 104, 24).unwrap().into_samples();
        let y: Vec<Complex64> = (0..x.len())
            .map(|t| taps.iter().enumerate().filter(|(l, _)| *l <= t).map(|(l, h)| h * x[t - l]).sum())
            .collect();
        close(&rx_cp_dfts_ofdm(&y, &taps, 12, 104, 24).unwrap(), &d, 1e-10);
    }

    #[test]
    fn dft_spread_symbols_have_unit_peak() {
        let mut d = vec![ZERO; 16];
        d[5] = Complex64::new(1.0, 0.0);
        let s = tx_zt_dfts_ofdm(&d[2..14], 16, 128, 2, 2).unwrap();
        let peak = s.samples().iter().map(|c| c.norm()).fold(0.0, f64::max);
        assert!((peak - 1.0).abs() < 1e-12, "{peak}");
    }

    #[test]
    fn size_errors() {
        assert!(matches!(ZtDftsOfdm::new(8, 128, 4, 4, 4), Err(PhyError::Size(_))));
        assert!(matches!(CpOfdm::new(200, 104, 24, 4), Err(PhyError::Size(_))));
        assert!(matches!(CpDftsOfdm::new(12, 104, 200, 4), Err(PhyError::Size(_))));
        assert!(matches!(tx_cp_dfts_ofdm(&data(11), 12, 104, 24), Err(PhyError::DataLength { got: 11, want: 12 })));
    }
}
