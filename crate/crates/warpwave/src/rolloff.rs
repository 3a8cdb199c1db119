//! Roll-off profiles that equalize each pulse's contribution to the first
//! out-of-band side lobe.
//!
//! Pulse `n` (1-based from the edge) sits `n - 1` periods inside the edge
//! pulse, so over the edge pulse's first side lobe `x in [1, 2]` it shows
//! its own `n`-th side lobe `x + n - 1`.

use crate::pulses::rc_time;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RolloffError {
    #[error("unknown case {0}, expected 1, 2 or 3")]
    InvalidCase(u8),
    #[error("{0}")]
    InvalidInput(String),
    #[error("profile did not settle after {iterations} sweeps; last iterate {last:?}")]
    NonConvergence { iterations: usize, last: Vec<f64> },
}

/// Utility/cost model used to place the roll-offs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Case {
    /// Suppression of the coherent side-lobe sum, cross terms included.
    CoherentSuppression,
    /// Suppression of the pulse's own lobe power.
    OwnLobe,
    /// Every pulse leaks the same lobe power as the shaped edge pulse.
    EqualLobePower,
}

impl TryFrom<u8> for Case {
    type Error = RolloffError;
    fn try_from(v: u8) -> Result<Self, RolloffError> {
        match v {
            1 => Ok(Case::CoherentSuppression),
            2 => Ok(Case::OwnLobe),
            3 => Ok(Case::EqualLobePower),
            other => Err(RolloffError::InvalidCase(other)),
        }
    }
}

impl Case {
    pub fn id(self) -> u8 {
        match self {
            Case::CoherentSuppression => 1,
            Case::OwnLobe => 2,
            Case::EqualLobePower => 3,
        }
    }
}

/// Trapezoid grid over the edge pulse's first side lobe.
#[derive(Debug, Clone, PartialEq)]
pub struct LobeGrid {
    pub x: Vec<f64>,
    pub step: f64,
}

impl LobeGrid {
    /// `[1, 2]` sampled at `step` (at most 1e-3).
    pub fn first_lobe(step: f64) -> Result<Self, RolloffError> {
        if !(step > 0.0 && step <= 1e-3) {
            return Err(RolloffError::InvalidInput(format!("grid step {step} outside (0, 1e-3]")));
        }
        let n = (1.0 / step).round() as usize;
        let step = 1.0 / n as f64;
        Ok(Self { x: (0..=n).map(|i| 1.0 + i as f64 * step).collect(), step })
    }

    fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        let n = self.x.len();
        let inner: f64 = self.x[1..n - 1].iter().map(|&x| f(x)).sum();
        self.step * (inner + 0.5 * (f(self.x[0]) + f(self.x[n - 1])))
    }
}

impl Default for LobeGrid {
    fn default() -> Self {
        Self::first_lobe(1e-3).expect("valid step")
    }
}

/// Tail amplitude of pulse `n` (1-based) at lobe-grid position `x`.
/// `alpha = 0` gives the unshaped sinc tail.
pub fn lobe_amplitude(n: usize, alpha: f64, x: f64) -> f64 {
    rc_time(alpha, x + n as f64 - 1.0)
}

/// Worst-case coherent lobe power `int (sum_n |L_n|)^2` for pulses `1..=len`.
pub fn first_lobe_power(alphas: &[f64], grid: &LobeGrid) -> f64 {
    grid.integrate(|x| {
        let s: f64 = alphas.iter().enumerate().map(|(i, &a)| lobe_amplitude(i + 1, a, x).abs()).sum();
        s * s
    })
}

fn own_lobe_power(n: usize, alpha: f64, grid: &LobeGrid) -> f64 {
    grid.integrate(|x| lobe_amplitude(n, alpha, x).powi(2))
}

/// Power suppressed by shaping pulse `n` with `alphas[n - 1]`.
pub fn utility(case: Case, n: usize, alphas: &[f64], grid: &LobeGrid) -> Result<f64, RolloffError> {
    if n == 0 || n > alphas.len() {
        return Err(RolloffError::InvalidInput(format!("pulse {n} outside 1..={}", alphas.len())));
    }
    match case {
        Case::OwnLobe => Ok(own_lobe_power(n, 0.0, grid) - own_lobe_power(n, alphas[n - 1], grid)),
        Case::CoherentSuppression => {
            let mut bare = alphas.to_vec();
            bare[n - 1] = 0.0;
            Ok(first_lobe_power(&bare, grid) - first_lobe_power(alphas, grid))
        }
        Case::EqualLobePower => Err(RolloffError::InvalidCase(3)),
    }
}

const FD_STEP: f64 = 1e-4;
const ALPHA_TOL: f64 = 1e-6;

/// Marginal utility per marginal cost at `alpha`, with cost `1/(1+alpha)`.
fn marginal(case: Case, n: usize, alphas: &mut [f64], alpha: f64, grid: &LobeGrid) -> f64 {
    let (lo, hi) = ((alpha - FD_STEP).max(0.0), (alpha + FD_STEP).min(1.0));
    alphas[n - 1] = hi;
    let uh = utility(case, n, alphas, grid).expect("valid pulse");
    alphas[n - 1] = lo;
    let ul = utility(case, n, alphas, grid).expect("valid pulse");
    alphas[n - 1] = alpha;
    (uh - ul) / (hi - lo) * (1.0 + alpha).powi(2)
}

/// Largest root of `g` in `[0, top]` found by a downward scan then bisection.
/// Returns `top` when `g(top) >= 0` and 0 when `g` stays negative.
fn descend_root(top: f64, tol: f64, mut g: impl FnMut(f64) -> f64) -> f64 {
    if g(top) >= 0.0 {
        return top;
    }
    const SCAN: usize = 200;
    let mut hi = top;
    for i in 1..=SCAN {
        let lo = top * (1.0 - i as f64 / SCAN as f64);
        if g(lo) >= 0.0 {
            let (mut a, mut b) = (lo, hi);
            while b - a > tol {
                let m = 0.5 * (a + b);
                if g(m) >= 0.0 {
                    a = m;
                } else {
                    b = m;
                }
            }
            return 0.5 * (a + b);
        }
        hi = lo;
    }
    0.0
}

/// Edge-facing roll-offs, outermost first.
pub fn solve_profile(case: Case, n_pulses: usize, alpha1: f64, grid: &LobeGrid) -> Result<Vec<f64>, RolloffError> {
    if n_pulses == 0 {
        return Err(RolloffError::InvalidInput("need at least one pulse".into()));
    }
    if !(alpha1 > 0.0 && alpha1 <= 1.0) {
        return Err(RolloffError::InvalidInput(format!("edge roll-off {alpha1} outside (0, 1]")));
    }
    let mut alphas = vec![0.0; n_pulses];
    alphas[0] = alpha1;
    if n_pulses == 1 {
        return Ok(alphas);
    }
    match case {
        Case::EqualLobePower => {
            let target = own_lobe_power(1, alpha1, grid);
            for n in 2..=n_pulses {
                let top = alphas[n - 2];
                alphas[n - 1] = descend_root(top, 1e-10, |a| own_lobe_power(n, a, grid) - target);
            }
            Ok(alphas)
        }
        Case::CoherentSuppression | Case::OwnLobe => {
            const MAX_SWEEPS: usize = 100;
            for _ in 0..MAX_SWEEPS {
                let before = alphas.clone();
                let target = marginal(case, 1, &mut alphas, alpha1, grid);
                for n in 2..=n_pulses {
                    let top = alphas[n - 2];
                    let mut work = alphas.clone();
                    let a = descend_root(top, ALPHA_TOL, |a| marginal(case, n, &mut work, a, grid) - target);
                    alphas[n - 1] = a;
                }
                let change = alphas.iter().zip(&before).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                if change < 1e-4 {
                    return Ok(alphas);
                }
            }
            Err(RolloffError::NonConvergence { iterations: MAX_SWEEPS, last: alphas })
        }
    }
}

/// Marginal utility per marginal cost of every pulse, for residual checks.
pub fn marginal_ratios(case: Case, alphas: &[f64], grid: &LobeGrid) -> Vec<f64> {
    let mut work = alphas.to_vec();
    (1..=alphas.len()).map(|n| marginal(case, n, &mut work, alphas[n - 1], grid)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lobe_boundaries_are_sinc_zeros() {
        for n in 1..5 {
            assert!(lobe_amplitude(n, 0.0, 1.0).abs() < 1e-15);
            assert!(lobe_amplitude(n, 0.0, 2.0).abs() < 1e-15);
        }
        let g = LobeGrid::default();
        assert_eq!(g.x[0], 1.0);
        assert!((g.x.last().unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn shaped_tail_bounded_by_sinc_tail() {
        let g = LobeGrid::default();
        for &x in &g.x {
            assert!(lobe_amplitude(1, 1.0, x).abs() <= lobe_amplitude(1, 0.0, x).abs() + 1e-15);
        }
    }

    #[test]
    fn single_sinc_lobe_power_converges() {
        let coarse = first_lobe_power(&[0.0], &LobeGrid::default());
        let fine = first_lobe_power(&[0.0], &LobeGrid::first_lobe(1e-4).unwrap());
        assert!((coarse - fine).abs() / fine < 1e-6);
    }

    #[test]
    fn power_orderings() {
        let g = LobeGrid::default();
        assert!(first_lobe_power(&[0.0, 0.0], &g) >= first_lobe_power(&[0.0], &g));
        assert!(first_lobe_power(&[1.0; 4], &g) < first_lobe_power(&[0.0; 4], &g));
    }

    #[test]
    fn utility_properties() {
        let g = LobeGrid::default();
        assert_eq!(utility(Case::OwnLobe, 2, &[1.0, 0.0, 0.0], &g).unwrap(), 0.0);
        let u = utility(Case::OwnLobe, 1, &[1.0], &g).unwrap();
        let fine = LobeGrid::first_lobe(1e-4).unwrap();
        let want = own_lobe_power(1, 0.0, &fine) - own_lobe_power(1, 1.0, &fine);
        assert!(u > 0.0 && (u - want).abs() / want < 1e-5);
        let alphas = [0.6, 0.0, 0.0];
        for n in 1..=3 {
            let mut a = alphas;
            a[n - 1] = 0.4;
            assert!(
                utility(Case::CoherentSuppression, n, &a, &g).unwrap() >= utility(Case::OwnLobe, n, &a, &g).unwrap()
            );
        }
        assert_eq!(
            utility(Case::OwnLobe, 0, &alphas, &g),
            Err(RolloffError::InvalidInput("pulse 0 outside 1..=3".into()))
        );
    }

    #[test]
    fn single_pulse_is_trivial() {
        for c in [Case::CoherentSuppression, Case::OwnLobe, Case::EqualLobePower] {
            assert_eq!(solve_profile(c, 1, 0.7, &LobeGrid::default()).unwrap(), vec![0.7]);
        }
    }

    #[test]
    fn case_ids_round_trip() {
        for id in 1..=3u8 {
            assert_eq!(Case::try_from(id).unwrap().id(), id);
        }
        assert_eq!(Case::try_from(4), Err(RolloffError::InvalidCase(4)));
    }

    #[test]
    fn equal_lobe_residuals_are_small() {
        let g = LobeGrid::default();
        let a = solve_profile(Case::EqualLobePower, 6, 1.0, &g).unwrap();
        let p1 = own_lobe_power(1, 1.0, &g);
        for (i, &al) in a.iter().enumerate() {
            assert!((own_lobe_power(i + 1, al, &g) - p1).abs() / p1 < 1e-3, "pulse {}", i + 1);
        }
        assert!(a.windows(2).all(|w| w[1] <= w[0]));
    }
}
