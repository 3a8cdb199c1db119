//! Experiment config files: waveforms, link scenario, design and sweep settings.

use crate::presets;
use crate::LabError;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use warpwave::phy::{Modem, WarpedModem};
use warpwave::wavecore::{
    from_config_text, to_config_text, LinkScenario, RolloffProfile, Validate, ValidationError, WarpDerivativeParams,
    WaveformConfig,
};

/// One waveform under test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum WaveformSpec {
    /// Reference 12-pulse warped symbol, or a symbol loaded from a warp design.
    Warped {
        #[serde(default)]
        asym: bool,
        qam_order: u32,
        /// Receiver band per side; defaults to window / V.
        #[serde(default)]
        band_bins: Option<usize>,
        /// Design file written by `design-warp`; replaces the reference symbol.
        #[serde(default)]
        design: Option<PathBuf>,
    },
    Zt {
        z: usize,
        qam_order: u32,
    },
    CpDfts {
        qam_order: u32,
    },
    CpOfdm {
        n_sc: usize,
        qam_order: u32,
    },
}

/// A resolved waveform with what the leakage metric needs.
pub struct Built {
    pub modem: Box<dyn Modem>,
    /// Roll-offs and smooth warp for warped waveforms.
    pub warp: Option<(RolloffProfile, WarpDerivativeParams)>,
}

impl WaveformSpec {
    pub fn build(&self, base: &Path) -> Result<Built, LabError> {
        Ok(match self {
            WaveformSpec::Warped { asym, qam_order, band_bins, design } => {
                let (label, cfg, params) = match design {
                    Some(path) => {
                        let d = WarpDesign::load(&base.join(path))?;
                        let name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
                        (format!("warped-{name}"), d.waveform.with_qam_order(*qam_order)?, d.params)
                    }
                    None => {
                        let label = if *asym { "warped-asym" } else { "warped-sym" };
                        (label.to_string(), presets::warped_twelve(*asym, *qam_order)?, presets::SYM_PARAMS)
                    }
                };
                let profile = cfg.profile().clone();
                Built { modem: Box::new(WarpedModem::new(label, cfg, *band_bins)?), warp: Some((profile, params)) }
            }
            WaveformSpec::Zt { z, qam_order } => Built { modem: Box::new(presets::zt(*z, *qam_order)?), warp: None },
            WaveformSpec::CpDfts { qam_order } => Built { modem: Box::new(presets::cp_dfts(*qam_order)?), warp: None },
            WaveformSpec::CpOfdm { n_sc, qam_order } => {
                Built { modem: Box::new(presets::cp_ofdm(*n_sc, *qam_order)?), warp: None }
            }
        })
    }
}

/// Roll-off design settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProfileSettings {
    /// 1: coherent suppression, 2: own lobe, 3: equal lobe power.
    pub case: u8,
    /// Pulses in the symbol; half of them (rounded up) are solved and mirrored.
    pub n_pulses: usize,
    pub alpha1: f64,
}

impl Default for ProfileSettings {
    fn default() -> Self {
        Self { case: 3, n_pulses: 12, alpha1: 1.0 }
    }
}

/// Warp design settings. The profile comes from `profile_csv` (as written by
/// `design-profile`), else from `outer`/`inner`, else the reference set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WarpSettings {
    #[serde(default)]
    pub profile_csv: Option<PathBuf>,
    #[serde(default)]
    pub outer: Option<Vec<f64>>,
    #[serde(default)]
    pub inner: Option<Vec<f64>>,
    pub xi: f64,
    pub v: u32,
    pub z_h: usize,
    pub z_t: usize,
    /// Symbol window in samples; the map is centred in it when set.
    #[serde(default)]
    pub window: Option<usize>,
    pub qam_order: u32,
    #[serde(default)]
    pub init: Option<WarpDerivativeParams>,
}

impl Default for WarpSettings {
    fn default() -> Self {
        Self {
            profile_csv: None,
            outer: None,
            inner: None,
            xi: 0.003,
            v: presets::TWELVE_V,
            z_h: 1,
            z_t: 1,
            window: Some(presets::TWELVE_WINDOW),
            qam_order: 512,
            init: None,
        }
    }
}

/// Sweep grids of the BER command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSettings {
    pub snr_db: Vec<f64>,
    pub time_offsets: Vec<i64>,
    pub tau_rms: Vec<f64>,
    /// SNR of the offset map.
    pub map_snr_db: f64,
}

impl Default for SweepSettings {
    fn default() -> Self {
        Self {
            snr_db: (0..=10).map(|k| 5.0 * k as f64).collect(),
            time_offsets: vec![0, 10, 20, 30],
            tau_rms: vec![0.0, 1.0, 2.0, 4.0],
            map_snr_db: 50.0,
        }
    }
}

fn default_waveforms() -> Vec<WaveformSpec> {
    vec![
        WaveformSpec::Warped { asym: true, qam_order: 512, band_bins: None, design: None },
        WaveformSpec::Warped { asym: false, qam_order: 512, band_bins: None, design: None },
        WaveformSpec::Zt { z: 4, qam_order: 512 },
        WaveformSpec::CpDfts { qam_order: 512 },
    ]
}

/// Whole experiment file; every section is optional.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LabConfig {
    #[serde(default = "default_waveforms")]
    pub waveforms: Vec<WaveformSpec>,
    #[serde(default)]
    pub scenario: LinkScenario,
    #[serde(default)]
    pub profile: ProfileSettings,
    #[serde(default)]
    pub warp: WarpSettings,
    #[serde(default)]
    pub sweep: SweepSettings,
}

impl Default for LabConfig {
    fn default() -> Self {
        Self {
            waveforms: default_waveforms(),
            scenario: LinkScenario::default(),
            profile: ProfileSettings::default(),
            warp: WarpSettings::default(),
            sweep: SweepSettings::default(),
        }
    }
}

impl Validate for LabConfig {
    fn validate(&self) -> Result<(), ValidationError> {
        let mut e = ValidationError::default();
        if let Err(s) = self.scenario.validate() {
            e.merge(s);
        }
        e.check(!self.waveforms.is_empty(), || "no waveforms configured".into());
        e.check((1..=3).contains(&self.profile.case), || format!("unknown case {}", self.profile.case));
        e.check(self.profile.n_pulses >= 1, || "profile needs at least one pulse".into());
        e.check(self.warp.xi > 0.0 && self.warp.xi < 1.0, || format!("xi {} outside (0, 1)", self.warp.xi));
        e.check(self.warp.v >= 1, || "v must be at least 1".into());
        e.finish()
    }
}

impl LabConfig {
    /// Reads a config file, or the defaults when `path` is `None`.
    pub fn load(path: Option<&Path>) -> Result<Self, LabError> {
        match path {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| LabError::Validation(format!("cannot read {}: {e}", p.display())))?;
                Ok(from_config_text(&text)?)
            }
            None => Ok(Self::default()),
        }
    }

    pub fn to_text(&self) -> Result<String, LabError> {
        Ok(to_config_text(self)?)
    }
}

/// Output of the warp design: the smooth warp, its figures of merit and the
/// fitted waveform.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WarpDesign {
    pub xi: f64,
    pub d: f64,
    pub max_leakage: f64,
    pub params: WarpDerivativeParams,
    pub waveform: WaveformConfig,
}

impl Validate for WarpDesign {
    fn validate(&self) -> Result<(), ValidationError> {
        let mut e = ValidationError::default();
        if let Err(v) = self.params.validate() {
            e.merge(v);
        }
        if let Err(v) = self.waveform.validate() {
            e.merge(v);
        }
        e.finish()
    }
}

impl WarpDesign {
    pub fn load(path: &Path) -> Result<Self, LabError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| LabError::Validation(format!("cannot read {}: {e}", path.display())))?;
        Ok(from_config_text(&text)?)
    }
}
