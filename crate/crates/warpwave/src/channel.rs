//! Exponential-profile Rayleigh multipath, AWGN and the interference grid
//! around one victim symbol.

use crate::wavecore::{mean_power, CoreError, LinkScenario, SampledSignal, Validate, ValidationError};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use std::f64::consts::PI;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ChannelError {
    #[error("delay spread {0} must be finite and >= 0")]
    DelaySpread(f64),
    #[error("a channel needs at least one tap")]
    NoTaps,
    #[error("cannot set an SNR relative to a zero-power signal")]
    ZeroSignal,
    #[error(transparent)]
    Invalid(#[from] ValidationError),
    #[error(transparent)]
    Core(#[from] CoreError),
}

/// Taps needed to hold all but a negligible part of the profile energy.
pub fn default_tap_count(tau_rms: f64) -> usize {
    (8.0 * tau_rms).ceil() as usize + 1
}

fn complex_gaussian(rng: &mut impl Rng, variance: f64) -> Complex64 {
    let s = (variance / 2.0).sqrt();
    Complex64::new(s * rng.sample::<f64, _>(StandardNormal), s * rng.sample::<f64, _>(StandardNormal))
}

/// Rayleigh taps with mean power `exp(-k / tau_rms)` normalized to unit
/// total; `tau_rms = 0` gives the single tap `[1]`. `n_taps` defaults to
/// [`default_tap_count`].
pub fn exp_pdp_taps(tau_rms: f64, n_taps: Option<usize>, rng: &mut impl Rng) -> Result<Vec<Complex64>, ChannelError> {
    if !(tau_rms >= 0.0 && tau_rms.is_finite()) {
        return Err(ChannelError::DelaySpread(tau_rms));
    }
    if tau_rms == 0.0 {
        return Ok(vec![Complex64::new(1.0, 0.0)]);
    }
    let n = n_taps.unwrap_or_else(|| default_tap_count(tau_rms));
    if n == 0 {
        return Err(ChannelError::NoTaps);
    }
    let profile: Vec<f64> = (0..n).map(|k| (-(k as f64) / tau_rms).exp()).collect();
    let total: f64 = profile.iter().sum();
    Ok(profile.iter().map(|p| complex_gaussian(rng, p / total)).collect())
}

/// Full linear convolution, `len + taps - 1` samples.
pub fn convolve(x: &[Complex64], taps: &[Complex64]) -> Vec<Complex64> {
    if x.is_empty() || taps.is_empty() {
        return Vec::new();
    }
    let mut y = vec![Complex64::new(0.0, 0.0); x.len() + taps.len() - 1];
    for (i, a) in x.iter().enumerate() {
        for (k, h) in taps.iter().enumerate() {
            y[i + k] += a * h;
        }
    }
    y
}

pub fn apply_channel(signal: &SampledSignal, taps: &[Complex64]) -> Result<SampledSignal, ChannelError> {
    if taps.is_empty() {
        return Err(ChannelError::NoTaps);
    }
    Ok(SampledSignal::new(convolve(signal.samples(), taps), signal.v(), signal.origin())?)
}

/// Adds circular complex noise of variance `mean power / 10^(snr/10)`;
/// `snr_db = +inf` leaves the samples untouched.
pub fn add_noise(x: &mut [Complex64], snr_db: f64, rng: &mut impl Rng) -> Result<(), ChannelError> {
    let p = mean_power(x);
    if !(p > 0.0) {
        return Err(ChannelError::ZeroSignal);
    }
    if snr_db == f64::INFINITY {
        return Ok(());
    }
    let var = p / 10f64.powf(snr_db / 10.0);
    x.iter_mut().for_each(|s| *s += complex_gaussian(rng, var));
    Ok(())
}

pub fn awgn(signal: &SampledSignal, snr_db: f64, rng: &mut impl Rng) -> Result<SampledSignal, ChannelError> {
    let mut x = signal.samples().to_vec();
    add_noise(&mut x, snr_db, rng)?;
    Ok(SampledSignal::new(x, signal.v(), signal.origin())?)
}

/// Independent random sources of one trial; adding or removing a component
/// never changes another's draws.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    VictimData = 0,
    VictimChannel = 1,
    TimeData = 2,
    TimeChannel = 3,
    FreqData = 4,
    FreqChannel = 5,
    Noise = 6,
}

/// Generator for `component` of trial `trial` under `seed`.
pub fn substream(seed: u64, trial: u64, component: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((trial << 3) | component as u64);
    rng
}

/// One received window and what the receiver is allowed to know.
#[derive(Debug, Clone, PartialEq)]
pub struct GridRealization {
    pub received: SampledSignal,
    /// Victim channel, for perfect-CSI equalization.
    pub victim_taps: Vec<Complex64>,
    pub warnings: Vec<String>,
}

/// Adds `src` passed through `taps`, starting at window sample `start`, to
/// the window `out`.
fn add_shifted(out: &mut [Complex64], src: &[Complex64], taps: &[Complex64], start: i64, scale: f64) -> bool {
    let mut hit = false;
    for (i, v) in convolve(src, taps).into_iter().enumerate() {
        let k = start + i as i64;
        if k >= 0 && (k as usize) < out.len() {
            out[k as usize] += v * scale;
            hit = true;
        }
    }
    hit
}

/// Victim window with channel, noise and both interferers.
///
/// The receiver window is the victim's own `len` samples. The time-domain
/// interferer is the next symbol, starting `time_offset` samples before the
/// window ends. The frequency-domain interferer is time-aligned and shifted
/// by `freq_offset_bins` bins of the window. Each has its own channel draw
/// and is scaled by its imbalance; `-inf` dB disables it. Noise is set by the
/// victim's received power. `make_interferer` draws a fresh symbol.
pub fn compose_grid(
    victim: &SampledSignal,
    scenario: &LinkScenario,
    trial: u64,
    mut make_interferer: impl FnMut(&mut ChaCha8Rng) -> Vec<Complex64>,
) -> Result<GridRealization, ChannelError> {
    scenario.validate()?;
    let len = victim.len();
    let seed = scenario.seed;
    let tau = scenario.tau_rms;
    let victim_taps = exp_pdp_taps(tau, None, &mut substream(seed, trial, Stream::VictimChannel))?;
    let mut out = convolve(victim.samples(), &victim_taps);
    out.truncate(len);
    add_noise(&mut out, scenario.snr_db, &mut substream(seed, trial, Stream::Noise))?;
    let mut warnings = Vec::new();

    if scenario.p_imb_time_db > f64::NEG_INFINITY {
        let x = make_interferer(&mut substream(seed, trial, Stream::TimeData));
        let taps = exp_pdp_taps(tau, None, &mut substream(seed, trial, Stream::TimeChannel))?;
        let start = len as i64 - scenario.time_offset;
        let scale = 10f64.powf(scenario.p_imb_time_db / 20.0);
        if !add_shifted(&mut out, &x, &taps, start, scale) {
            warnings.push(format!("time offset {} leaves the interferer outside the window", scenario.time_offset));
        }
    }
    if scenario.p_imb_freq_db > f64::NEG_INFINITY {
        let shift = scenario.freq_offset_bins / len as f64;
        let x: Vec<Complex64> = make_interferer(&mut substream(seed, trial, Stream::FreqData))
            .into_iter()
            .enumerate()
            .map(|(k, v)| v * Complex64::from_polar(1.0, 2.0 * PI * shift * k as f64))
            .collect();
        let taps = exp_pdp_taps(tau, None, &mut substream(seed, trial, Stream::FreqChannel))?;
        let scale = 10f64.powf(scenario.p_imb_freq_db / 20.0);
        add_shifted(&mut out, &x, &taps, 0, scale);
    }
    Ok(GridRealization { received: SampledSignal::new(out, victim.v(), victim.origin())?, victim_taps, warnings })
}
