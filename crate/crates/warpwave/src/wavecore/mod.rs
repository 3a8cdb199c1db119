//! Shared domain types, the warping map, and config text I/O.

mod map;
pub mod spline;

pub use map::{warp_anchor, warp_eval, WarpingMap};

use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use std::fmt;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CoreError {
    #[error("position {x} outside map domain [{lo}, {hi}]")]
    Domain { x: f64, lo: i64, hi: i64 },
    #[error("pulse index {n} outside anchors {first}..{}", *first + *count as i64)]
    IndexOutOfRange { n: i64, first: i64, count: usize },
    #[error("spline construction failed: {0}")]
    Spline(String),
    #[error("map derivative is not positive in the segment starting at sample {knot}")]
    NotMonotone { knot: i64 },
    #[error(transparent)]
    Invalid(#[from] ValidationError),
    #[error("config text: {0}")]
    Parse(String),
}

/// Every violated invariant of one value, reported together.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ValidationError {
    pub problems: Vec<String>,
}

impl fmt::Display for ValidationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid config: {}", self.problems.join("; "))
    }
}

impl std::error::Error for ValidationError {}

impl ValidationError {
    /// Records `msg` when `ok` is false.
    pub fn check(&mut self, ok: bool, msg: impl FnOnce() -> String) {
        if !ok {
            self.problems.push(msg());
        }
    }

    /// Absorbs the problems of a nested value.
    pub fn merge(&mut self, other: ValidationError) {
        self.problems.extend(other.problems);
    }

    pub fn finish(self) -> Result<(), ValidationError> {
        if self.problems.is_empty() {
            Ok(())
        } else {
            Err(self)
        }
    }
}

/// Types that carry invariants checked after construction or parsing.
pub trait Validate {
    fn validate(&self) -> Result<(), ValidationError>;
}

/// Complex baseband samples at `v` samples per pulse period.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledSignal {
    samples: Vec<Complex64>,
    v: u32,
    origin: i64,
}

impl SampledSignal {
    pub fn new(samples: Vec<Complex64>, v: u32, origin: i64) -> Result<Self, CoreError> {
        let s = Self { samples, v, origin };
        s.validate()?;
        Ok(s)
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<Complex64> {
        self.samples
    }

    pub fn v(&self) -> u32 {
        self.v
    }

    /// Sample index of the time reference.
    pub fn origin(&self) -> i64 {
        self.origin
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn mean_power(&self) -> f64 {
        mean_power(&self.samples)
    }
}

impl Validate for SampledSignal {
    fn validate(&self) -> Result<(), ValidationError> {
        let mut e = ValidationError::default();
        e.check(!self.samples.is_empty(), || "signal has no samples".into());
        e.check(self.samples.iter().all(|c| c.re.is_finite() && c.im.is_finite()), || {
            "signal has non-finite samples".into()
        });
        e.check(self.v >= 1, || "oversampling ratio must be at least 1".into());
        e.finish()
    }
}

pub fn mean_power(x: &[Complex64]) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    x.iter().map(|c| c.norm_sqr()).sum::<f64>() / x.len() as f64
}

/// Per-pulse `(alpha_left, alpha_right)` roll-offs, symbol start to end.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RolloffProfile {
    pairs: Vec<(f64, f64)>,
}

impl RolloffProfile {
    pub fn new(pairs: Vec<(f64, f64)>) -> Result<Self, ValidationError> {
        let p = Self { pairs };
        p.validate()?;
        Ok(p)
    }

    /// Builds a mirrored profile from edge-facing roll-offs listed outermost
    /// first. `inner` optionally overrides the center-facing roll-off of the
    /// first few left-half pulses (asymmetric pulses); the rest stay symmetric.
    pub fn mirrored(outer: &[f64], inner: Option<&[f64]>) -> Result<Self, ValidationError> {
        let left: Vec<(f64, f64)> =
            outer.iter().enumerate().map(|(k, &o)| (o, inner.and_then(|i| i.get(k).copied()).unwrap_or(o))).collect();
        let right = left.iter().rev().map(|&(a, b)| (b, a));
        Self::new(left.iter().copied().chain(right).collect())
    }

    /// Mirrored six-pulse reference set `[1, 0.48, 0.34, 0.27, 0.17, 0.08]`.
    pub fn reference_twelve(inner: Option<&[f64]>) -> Self {
        Self::mirrored(&REFERENCE_OUTER, inner).expect("reference profile is valid")
    }

    /// All-zero roll-offs (plain sinc pulses).
    pub fn sinc(n: usize) -> Self {
        Self { pairs: vec![(0.0, 0.0); n] }
    }

    pub fn pairs(&self) -> &[(f64, f64)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

/// Outer roll-offs of the six-pulse reference half profile.
pub const REFERENCE_OUTER: [f64; 6] = [1.0, 0.48, 0.34, 0.27, 0.17, 0.08];

/// Inner roll-offs of the reference asymmetric pulses.
pub const REFERENCE_ASYM_INNER: [f64; 4] = [0.3, 0.1, 0.08, 0.08];

impl Validate for RolloffProfile {
    fn validate(&self) -> Result<(), ValidationError> {
        let mut e = ValidationError::default();
        let n = self.pairs.len();
        e.check(n > 0, || "profile is empty".into());
        for (k, &(a, b)) in self.pairs.iter().enumerate() {
            e.check((0.0..=1.0).contains(&a) && (0.0..=1.0).contains(&b), || {
                format!("pulse {k} roll-off ({a}, {b}) outside [0, 1]")
            });
            let (ma, mb) = self.pairs[n - 1 - k];
            e.check(a == mb && b == ma, || format!("pulse {k} does not mirror pulse {}", n - 1 - k));
        }
        for k in 1..n.div_ceil(2) {
            let (prev, cur) = (self.pairs[k - 1].0, self.pairs[k].0);
            e.check(cur <= prev, || format!("edge-facing roll-off rises at pulse {k} ({prev} -> {cur})"));
        }
        e.finish()
    }
}

/// Parameters of the double-sigmoid warp derivative.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WarpDerivativeParams {
    pub s_out: f64,
    pub s_in: f64,
    pub t1: f64,
    pub t2: f64,
    pub t_cap: f64,
}

impl WarpDerivativeParams {
    /// Symmetric sigmoid centers `-t_edge`, `+t_edge`.
    pub fn symmetric(s_out: f64, s_in: f64, t_edge: f64, t_cap: f64) -> Self {
        Self { s_out, s_in, t1: -t_edge, t2: t_edge, t_cap }
    }

    /// Unit slope everywhere.
    pub fn identity() -> Self {
        Self::symmetric(1.0, 1.0, 1.0, 1.0)
    }

    pub fn to_array(self) -> [f64; 5] {
        [self.s_out, self.s_in, self.t1, self.t2, self.t_cap]
    }

    pub fn from_array(x: [f64; 5]) -> Self {
        Self { s_out: x[0], s_in: x[1], t1: x[2], t2: x[3], t_cap: x[4] }
    }
}

impl Validate for WarpDerivativeParams {
    fn validate(&self) -> Result<(), ValidationError> {
        let mut e = ValidationError::default();
        let p = *self;
        e.check(p.to_array().iter().all(|v| v.is_finite()), || "non-finite warp parameter".into());
        e.check(0.0 < p.s_out && p.s_out <= p.s_in && p.s_in <= 1.0, || {
            format!("slopes need 0 < s_out <= s_in <= 1 (got {}, {})", p.s_out, p.s_in)
        });
        e.check(p.t1 < p.t2, || format!("sigmoid centers need t1 < t2 (got {}, {})", p.t1, p.t2));
        e.check(p.t_cap > 0.0, || format!("progression constant must be positive (got {})", p.t_cap));
        e.finish()
    }
}

/// A complete warped waveform: pulse count, guards, roll-offs and the map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveformConfig {
    n_pulses: usize,
    z_h: usize,
    z_t: usize,
    v: u32,
    qam_order: u32,
    profile: RolloffProfile,
    warp: WarpingMap,
}

impl WaveformConfig {
    pub fn new(
        n_pulses: usize,
        z_h: usize,
        z_t: usize,
        v: u32,
        qam_order: u32,
        profile: RolloffProfile,
        warp: WarpingMap,
    ) -> Result<Self, ValidationError> {
        let c = Self { n_pulses, z_h, z_t, v, qam_order, profile, warp };
        c.validate()?;
        Ok(c)
    }

    pub fn n_pulses(&self) -> usize {
        self.n_pulses
    }

    pub fn z_h(&self) -> usize {
        self.z_h
    }

    pub fn z_t(&self) -> usize {
        self.z_t
    }

    pub fn v(&self) -> u32 {
        self.v
    }

    pub fn qam_order(&self) -> u32 {
        self.qam_order
    }

    pub fn profile(&self) -> &RolloffProfile {
        &self.profile
    }

    pub fn warp(&self) -> &WarpingMap {
        &self.warp
    }

    /// Map coordinate of data pulse `n` (0-based).
    pub fn pulse_coordinate(&self, n: usize) -> i64 {
        self.warp.first_index() + (self.z_h + n) as i64
    }

    /// Same waveform with a different modulation order.
    pub fn with_qam_order(&self, qam_order: u32) -> Result<Self, ValidationError> {
        Self::new(self.n_pulses, self.z_h, self.z_t, self.v, qam_order, self.profile.clone(), self.warp.clone())
    }
}

impl Validate for WaveformConfig {
    fn validate(&self) -> Result<(), ValidationError> {
        let mut e = ValidationError::default();
        e.check(self.n_pulses >= 1, || "need at least one pulse".into());
        e.check(self.v >= 1, || "oversampling ratio must be at least 1".into());
        e.check(self.qam_order >= 4 && self.qam_order.is_power_of_two(), || {
            format!("qam order {} is not a power of two >= 4", self.qam_order)
        });
        e.check(self.profile.len() == self.n_pulses, || {
            format!("profile has {} pulses, config has {}", self.profile.len(), self.n_pulses)
        });
        let slots = self.n_pulses + self.z_h + self.z_t;
        e.check(self.warp.anchors().len() == slots, || {
            format!("map has {} anchors, pulses plus guards need {slots}", self.warp.anchors().len())
        });
        if let Err(p) = self.profile.validate() {
            e.problems.extend(p.problems);
        }
        e.finish()
    }
}

/// Channel, interferer and noise settings of one BER experiment.
///
/// An imbalance of `-inf` dB switches that interferer off.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkScenario {
    /// RMS delay spread in sample periods.
    pub tau_rms: f64,
    /// Overlap of the time-domain interferer with the victim, in samples.
    pub time_offset: i64,
    /// Frequency interferer shift in bins of the victim window.
    pub freq_offset_bins: f64,
    pub p_imb_time_db: f64,
    pub p_imb_freq_db: f64,
    pub snr_db: f64,
    pub seed: u64,
    pub n_bits: u64,
}

impl Default for LinkScenario {
    fn default() -> Self {
        Self {
            tau_rms: 4.0,
            time_offset: 0,
            freq_offset_bins: 25.0,
            p_imb_time_db: 0.0,
            p_imb_freq_db: 0.0,
            snr_db: 50.0,
            seed: 1,
            n_bits: 100_000,
        }
    }
}

impl Validate for LinkScenario {
    fn validate(&self) -> Result<(), ValidationError> {
        let mut e = ValidationError::default();
        e.check(self.tau_rms >= 0.0 && self.tau_rms.is_finite(), || {
            format!("tau_rms must be finite and >= 0 (got {})", self.tau_rms)
        });
        e.check(self.n_bits > 0, || "n_bits must be positive".into());
        e.check(!self.snr_db.is_nan(), || "snr_db is NaN".into());
        e.finish()
    }
}

/// Serializes any config type to nested key/value text.
pub fn to_config_text<T: Serialize>(value: &T) -> Result<String, CoreError> {
    toml::to_string(value).map_err(|e| CoreError::Parse(e.to_string()))
}

/// Parses and validates a config value.
pub fn from_config_text<T: DeserializeOwned + Validate>(text: &str) -> Result<T, CoreError> {
    let v: T = toml::from_str(text).map_err(|e| CoreError::Parse(e.to_string()))?;
    v.validate()?;
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mirrored_reference_profile() {
        let p = RolloffProfile::reference_twelve(Some(&REFERENCE_ASYM_INNER));
        assert_eq!(p.len(), 12);
        assert_eq!(p.pairs()[0], (1.0, 0.3));
        assert_eq!(p.pairs()[11], (0.3, 1.0));
        assert_eq!(p.pairs()[5], (0.08, 0.08));
    }

    #[test]
    fn profile_errors_are_collected() {
        let e = RolloffProfile::new(vec![(0.2, 1.5), (0.5, 0.2)]).unwrap_err();
        assert_eq!(e.problems.len(), 3, "{e}");
    }

    #[test]
    fn params_invariants() {
        assert!(WarpDerivativeParams::symmetric(0.49, 0.98, 5.3, 1.8).validate().is_ok());
        let bad = WarpDerivativeParams { s_out: 0.9, s_in: 0.5, t1: 2.0, t2: 1.0, t_cap: 0.0 };
        assert_eq!(bad.validate().unwrap_err().problems.len(), 3);
    }

    #[test]
    fn signal_rejects_empty_and_nan() {
        assert!(SampledSignal::new(vec![], 1, 0).is_err());
        assert!(SampledSignal::new(vec![Complex64::new(f64::NAN, 0.0)], 1, 0).is_err());
        assert!(SampledSignal::new(vec![Complex64::new(1.0, 0.0)], 0, 0).is_err());
    }

    #[test]
    fn scenario_round_trips_through_text() {
        let s = LinkScenario { p_imb_freq_db: f64::NEG_INFINITY, ..LinkScenario::default() };
        let text = to_config_text(&s).unwrap();
        assert!(text.contains("tau_rms"));
        let back: LinkScenario = from_config_text(&text).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn waveform_config_round_trips() {
        let warp = WarpingMap::uniform(6, 14).unwrap();
        let cfg = WaveformConfig::new(12, 1, 1, 6, 16, RolloffProfile::reference_twelve(None), warp).unwrap();
        let text = to_config_text(&cfg).unwrap();
        let back: WaveformConfig = from_config_text(&text).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn waveform_config_checks_anchor_count() {
        let warp = WarpingMap::uniform(6, 13).unwrap();
        let e = WaveformConfig::new(12, 1, 1, 6, 12, RolloffProfile::reference_twelve(None), warp).unwrap_err();
        assert_eq!(e.problems.len(), 2, "{e}");
    }
}
