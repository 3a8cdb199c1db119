//! Reference waveforms: the 12-pulse warped symbols and their baselines,
//! and the 76-pulse split-modulation configuration.

use warpwave::phy::{CpDftsOfdm, CpOfdm, PhyError, WarpedModem, ZtDftsOfdm};
use warpwave::warpdesign::{fit_spline_windowed, WarpError};
use warpwave::wavecore::{RolloffProfile, WarpDerivativeParams, WarpingMap, WaveformConfig, REFERENCE_ASYM_INNER};

/// Samples per pulse period of the 12-pulse symbol.
pub const TWELVE_V: u32 = 6;
/// Length of the 12-pulse symbol window, shared by every 12-symbol baseline.
pub const TWELVE_WINDOW: usize = 128;
pub const TWELVE_PULSES: usize = 12;

/// Most compact warp for the symmetric reference profile at a 0.3%
/// leakage bound, as found by the simplex search from the reference start.
pub const SYM_PARAMS: WarpDerivativeParams = WarpDerivativeParams {
    s_out: 0.5774988286444014,
    s_in: 0.9259888705161492,
    t1: -5.252973098670382,
    t2: 5.252973098793499,
    t_cap: 1.8434890170696068,
};

/// Same search for the asymmetric reference profile.
pub const ASYM_PARAMS: WarpDerivativeParams = WarpDerivativeParams {
    s_out: 0.5676560556521613,
    s_in: 0.9579026865521074,
    t1: -5.9724917842571035,
    t2: 5.9724917844734255,
    t_cap: 1.390344038765652,
};

/// Starting point of the warp search.
pub fn reference_start() -> WarpDerivativeParams {
    WarpDerivativeParams::symmetric(0.49, 0.98, 5.3, 1.8)
}

#[derive(Debug, thiserror::Error)]
pub enum PresetError {
    #[error(transparent)]
    Warp(#[from] WarpError),
    #[error(transparent)]
    Phy(#[from] PhyError),
    #[error(transparent)]
    Invalid(#[from] warpwave::wavecore::ValidationError),
    #[error(transparent)]
    Core(#[from] warpwave::wavecore::CoreError),
}

/// 12-pulse map fitted to the symmetric-profile warp inside the 128-sample window.
pub fn twelve_map() -> Result<WarpingMap, PresetError> {
    Ok(fit_spline_windowed(&SYM_PARAMS, TWELVE_V, TWELVE_PULSES, 1, 1, TWELVE_WINDOW)?)
}

/// Warped 12-pulse symbol; `asym` selects the asymmetric inner roll-offs.
/// Both variants share the symmetric-profile map.
pub fn warped_twelve(asym: bool, qam_order: u32) -> Result<WaveformConfig, PresetError> {
    let profile = RolloffProfile::reference_twelve(asym.then_some(&REFERENCE_ASYM_INNER[..]));
    Ok(WaveformConfig::new(TWELVE_PULSES, 1, 1, TWELVE_V, qam_order, profile, twelve_map()?)?)
}

pub fn warped_twelve_modem(asym: bool, qam_order: u32) -> Result<WarpedModem, PresetError> {
    let label = if asym { "warped-asym" } else { "warped-sym" };
    Ok(WarpedModem::new(label, warped_twelve(asym, qam_order)?, None)?)
}

/// Zero-tail DFT-s-OFDM carrying 12 symbols with `z` zeros per side.
pub fn zt(z: usize, qam_order: u32) -> Result<ZtDftsOfdm, PresetError> {
    Ok(ZtDftsOfdm::new(TWELVE_PULSES + 2 * z, TWELVE_WINDOW, z, z, qam_order)?)
}

/// CP-DFT-s-OFDM with a 104-point body and a 24-sample prefix.
pub fn cp_dfts(qam_order: u32) -> Result<CpDftsOfdm, PresetError> {
    Ok(CpDftsOfdm::new(TWELVE_PULSES, 104, 24, qam_order)?)
}

/// CP-OFDM with `n_sc` subcarriers in a 104-point body and a 24-sample prefix.
pub fn cp_ofdm(n_sc: usize, qam_order: u32) -> Result<CpOfdm, PresetError> {
    Ok(CpOfdm::new(n_sc, 104, 24, qam_order)?)
}

/// Anchors of the 76-pulse symbol with three guard slots per side: tapered
/// spacing at both ends, a constant 6-sample spacing in between.
pub fn seventy_six_anchors() -> Vec<i64> {
    let head = [1, 12, 23, 33, 41, 49, 56];
    let tail = [478, 485, 492, 501, 511, 522];
    head.into_iter().chain((63..=471).step_by(6)).chain(tail).collect()
}

/// Edge pulses per side sent through the filter bank by the split transmitter.
pub const SPLIT_EDGE: usize = 20;
/// Zero inputs per side of the DFT-spread branch.
pub const SPLIT_ZEROS: usize = 14;

/// 76-pulse configuration used with the split transmitter.
pub fn seventy_six(qam_order: u32) -> Result<WaveformConfig, PresetError> {
    const HALF: usize = 38;
    let mut outer = vec![1.0, 0.48, 0.34, 0.27, 0.21, 0.17, 0.12];
    outer.resize(HALF, 0.09);
    let mut inner = vec![0.22, 0.15];
    inner.resize(HALF, 0.09);
    let profile = RolloffProfile::mirrored(&outer, Some(&inner))?;
    let map = WarpingMap::from_anchors(&seventy_six_anchors(), 1)?;
    Ok(WaveformConfig::new(2 * HALF, 3, 3, 6, qam_order, profile, map)?)
}
