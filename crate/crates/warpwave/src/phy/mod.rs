//! Transmitters, the oversampled frequency-domain receiver, QAM mapping and
//! the baseline DFT-spread and OFDM waveforms.

mod baseline;
mod qam;
mod split;
mod warped;

pub use baseline::{
    rx_cp_dfts_ofdm, rx_cp_ofdm, rx_zt_dfts_ofdm, tx_cp_dfts_ofdm, tx_cp_ofdm, tx_zt_dfts_ofdm, CpDftsOfdm, CpOfdm,
    ZtDftsOfdm,
};
pub use qam::{qam_demap, qam_map, Constellation, QAM_ORDERS};
pub use split::{tx_split, SplitPlan};
pub use warped::{channel_response, rx_chain, tx_filterbank, WarpedModem, WarpedReceiver};

use crate::pulses::PulseError;
use crate::spectral::SpectralError;
use crate::wavecore::CoreError;
use num_complex::Complex64;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PhyError {
    #[error("unsupported QAM order {0}")]
    QamOrder(u32),
    #[error("{got} bits do not split into {per_symbol}-bit symbols")]
    BitCount { got: usize, per_symbol: usize },
    #[error("expected {want} data symbols, got {got}")]
    DataLength { got: usize, want: usize },
    #[error("expected {want} received samples, got {got}")]
    WindowLength { got: usize, want: usize },
    #[error("channel response {magnitude:e} at bin {bin} is too small to invert")]
    ZfSingular { bin: usize, magnitude: f64 },
    #[error("inconsistent sizes: {0}")]
    Size(String),
    #[error("split modulation needs a shared symmetric roll-off and constant slope; pulse {pulse}: {reason}")]
    Split { pulse: usize, reason: String },
    #[error("signal has zero power")]
    ZeroSignal,
    #[error(transparent)]
    Pulse(#[from] PulseError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Core(#[from] CoreError),
}

/// Below this channel magnitude zero-forcing refuses to divide.
pub const ZF_THRESHOLD: f64 = 1e-6;

/// Common interface of every simulated waveform: one frame of `data_len`
/// symbols in `frame_len` samples, received with perfect channel knowledge.
pub trait Modem: Send + Sync {
    fn label(&self) -> String;
    fn data_len(&self) -> usize;
    fn frame_len(&self) -> usize;
    fn constellation(&self) -> &Constellation;
    /// Nominal one-sided occupied bandwidth in bins of a `frame_len` transform.
    fn band_edge_bins(&self) -> f64;
    fn modulate(&self, data: &[Complex64]) -> Result<Vec<Complex64>, PhyError>;
    /// Equalized data symbols from one received frame.
    fn equalize(&self, rx: &[Complex64], taps: &[Complex64]) -> Result<Vec<Complex64>, PhyError>;
}

/// Peak-to-average power ratio in dB.
pub fn papr(signal: &[Complex64]) -> Result<f64, PhyError> {
    let mean = crate::wavecore::mean_power(signal);
    if mean <= 0.0 {
        return Err(PhyError::ZeroSignal);
    }
    let peak = signal.iter().map(|c| c.norm_sqr()).fold(0.0, f64::max);
    Ok(10.0 * (peak / mean).log10())
}

/// `sum |y - x|^2 / sum |x|^2` in dB.
pub fn evm_db(reference: &[Complex64], measured: &[Complex64]) -> f64 {
    let err: f64 = reference.iter().zip(measured).map(|(a, b)| (a - b).norm_sqr()).sum();
    let pow: f64 = reference.iter().map(|a| a.norm_sqr()).sum();
    10.0 * (err / pow).log10()
}

pub(crate) fn check_len(got: usize, want: usize) -> Result<(), PhyError> {
    if got == want {
        Ok(())
    } else {
        Err(PhyError::DataLength { got, want })
    }
}
