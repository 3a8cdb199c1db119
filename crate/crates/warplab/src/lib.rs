//! Experiment runner for the warpwave toolkit: reference waveforms,
//! containment measurements, BER Monte Carlo and the command-line front end.

pub mod ber;
pub mod cli;
pub mod config;
pub mod measure;
pub mod presets;

use warpwave::channel::ChannelError;
use warpwave::phy::PhyError;
use warpwave::rolloff::RolloffError;
use warpwave::warpdesign::WarpError;
use warpwave::wavecore::{CoreError, ValidationError};

/// Failure classes, each with its own process exit code.
#[derive(Debug, thiserror::Error)]
pub enum LabError {
    #[error("invalid input: {0}")]
    Validation(String),
    #[error("did not converge: {0}")]
    NonConvergence(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

impl LabError {
    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::Validation(_) => 2,
            LabError::NonConvergence(_) => 3,
            LabError::Numerical(_) | LabError::Io(_) => 4,
        }
    }
}

impl From<ValidationError> for LabError {
    fn from(e: ValidationError) -> Self {
        LabError::Validation(e.to_string())
    }
}

impl From<CoreError> for LabError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::Invalid(v) => v.into(),
            CoreError::Parse(m) => LabError::Validation(m),
            other => LabError::Numerical(other.to_string()),
        }
    }
}

impl From<PhyError> for LabError {
    fn from(e: PhyError) -> Self {
        match e {
            PhyError::ZfSingular { .. } | PhyError::ZeroSignal | PhyError::Spectral(_) | PhyError::Pulse(_) => {
                LabError::Numerical(e.to_string())
            }
            PhyError::Core(c) => c.into(),
            other => LabError::Validation(other.to_string()),
        }
    }
}

impl From<ChannelError> for LabError {
    fn from(e: ChannelError) -> Self {
        match e {
            ChannelError::ZeroSignal => LabError::Numerical(e.to_string()),
            ChannelError::Core(c) => c.into(),
            other => LabError::Validation(other.to_string()),
        }
    }
}

impl From<RolloffError> for LabError {
    fn from(e: RolloffError) -> Self {
        match e {
            RolloffError::NonConvergence { .. } => LabError::NonConvergence(e.to_string()),
            other => LabError::Validation(other.to_string()),
        }
    }
}

impl From<WarpError> for LabError {
    fn from(e: WarpError) -> Self {
        match e {
            WarpError::Infeasible { .. } => LabError::NonConvergence(e.to_string()),
            WarpError::Invalid(v) => v.into(),
            WarpError::Map(c) => c.into(),
            WarpError::OversamplingTooLow { .. } | WarpError::WindowTooShort { .. } => {
                LabError::Validation(e.to_string())
            }
            other => LabError::Numerical(other.to_string()),
        }
    }
}

impl From<presets::PresetError> for LabError {
    fn from(e: presets::PresetError) -> Self {
        match e {
            presets::PresetError::Warp(w) => w.into(),
            presets::PresetError::Phy(p) => p.into(),
            presets::PresetError::Invalid(v) => v.into(),
            presets::PresetError::Core(c) => c.into(),
        }
    }
}
