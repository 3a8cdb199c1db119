//! Time-frequency warped single-carrier waveforms: roll-off and warp design,
//! pulse synthesis, pruned transforms, transmitters, receivers and channels.

pub mod channel;
pub mod phy;
pub mod pulses;
pub mod rolloff;
pub mod spectral;
pub mod warpdesign;
pub mod wavecore;
