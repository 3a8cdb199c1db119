//! Seeded Monte Carlo bit-error counting over the interference grid.

use crate::measure::random_symbols;
use crate::LabError;
use rand::Rng;
use rayon::prelude::*;
use std::collections::BTreeSet;
use warpwave::channel::{compose_grid, substream, Stream};
use warpwave::phy::Modem;
use warpwave::wavecore::{LinkScenario, SampledSignal};

/// Error count of one configuration at one sweep point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BerPoint {
    pub errors: u64,
    pub bits: u64,
    /// Distinct grid warnings raised by any trial.
    pub warnings: BTreeSet<String>,
}

impl BerPoint {
    pub fn ber(&self) -> f64 {
        self.errors as f64 / self.bits as f64
    }

    /// Wilson score interval at normal quantile `z`.
    pub fn wilson(&self, z: f64) -> (f64, f64) {
        let n = self.bits as f64;
        let p = self.ber();
        let denom = 1.0 + z * z / n;
        let centre = (p + z * z / (2.0 * n)) / denom;
        let half = z * (p * (1.0 - p) / n + z * z / (4.0 * n * n)).sqrt() / denom;
        ((centre - half).max(0.0), (centre + half).min(1.0))
    }
}

/// One-sided 95% normal quantile.
pub const Z_95: f64 = 1.6448536269514722;

/// Whether `a` has a lower error rate than `b` by a one-sided pooled
/// two-proportion test at 95% confidence.
pub fn lower_with_confidence(a: &BerPoint, b: &BerPoint) -> bool {
    let (na, nb) = (a.bits as f64, b.bits as f64);
    let pooled = (a.errors + b.errors) as f64 / (na + nb);
    if pooled == 0.0 {
        return false;
    }
    let se = (pooled * (1.0 - pooled) * (1.0 / na + 1.0 / nb)).sqrt();
    (b.ber() - a.ber()) / se > Z_95
}

fn trial(modem: &dyn Modem, scenario: &LinkScenario, t: u64) -> Result<(u64, u64, Vec<String>), LabError> {
    let c = modem.constellation();
    let mut rng = substream(scenario.seed, t, Stream::VictimData);
    let bits: Vec<u8> = (0..modem.data_len() * c.bits_per_symbol()).map(|_| rng.gen_range(0..2u8)).collect();
    let victim = SampledSignal::new(modem.modulate(&c.map(&bits)?)?, 1, 0).map_err(warpwave::phy::PhyError::from)?;
    let grid = compose_grid(&victim, scenario, t, |rng| {
        modem.modulate(&random_symbols(modem, rng)).expect("frame of data_len symbols")
    })?;
    let got = c.demap(&modem.equalize(grid.received.samples(), &grid.victim_taps)?);
    let errors = bits.iter().zip(&got).filter(|(a, b)| a != b).count() as u64;
    Ok((errors, bits.len() as u64, grid.warnings))
}

/// Runs whole frames until at least `scenario.n_bits` bits are sent.
/// Trials run in parallel; the result does not depend on scheduling.
pub fn simulate_ber(modem: &dyn Modem, scenario: &LinkScenario) -> Result<BerPoint, LabError> {
    let per_frame = (modem.data_len() * modem.constellation().bits_per_symbol()) as u64;
    let trials = scenario.n_bits.div_ceil(per_frame);
    let results =
        (0..trials).into_par_iter().map(|t| trial(modem, scenario, t)).collect::<Result<Vec<_>, LabError>>()?;
    let mut point = BerPoint { errors: 0, bits: 0, warnings: BTreeSet::new() };
    for (e, b, w) in results {
        point.errors += e;
        point.bits += b;
        point.warnings.extend(w);
    }
    Ok(point)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;

    fn clean() -> LinkScenario {
        LinkScenario {
            tau_rms: 0.0,
            p_imb_time_db: f64::NEG_INFINITY,
            p_imb_freq_db: f64::NEG_INFINITY,
            snr_db: 60.0,
            n_bits: 20_000,
            ..LinkScenario::default()
        }
    }

    #[test]
    fn noise_free_links_are_error_free() {
        let m = presets::zt(4, 64).unwrap();
        let p = simulate_ber(&m, &clean()).unwrap();
        assert_eq!(p.errors, 0);
        assert!(p.bits >= 20_000);
    }

    #[test]
    fn low_snr_gives_errors_and_reruns_match() {
        let m = presets::cp_dfts(16).unwrap();
        let s = LinkScenario { snr_db: 5.0, ..clean() };
        let a = simulate_ber(&m, &s).unwrap();
        assert!(a.errors > 0);
        assert_eq!(a, simulate_ber(&m, &s).unwrap());
    }

    #[test]
    fn confidence_test() {
        let p = |errors| BerPoint { errors, bits: 100_000, warnings: BTreeSet::new() };
        assert!(lower_with_confidence(&p(10), &p(60)));
        assert!(!lower_with_confidence(&p(50), &p(60)));
        assert!(!lower_with_confidence(&p(0), &p(0)));
        let (lo, hi) = p(100).wilson(1.96);
        assert!(lo < 1e-3 && hi > 1e-3);
    }
}
