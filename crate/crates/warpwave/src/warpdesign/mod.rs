//! Warp-derivative model, spectral leakage of warped pulses, the simplex
//! search for the most compact warp under a leakage bound, and spline fitting.

mod fit;
mod leakage;
mod simplex;

pub use fit::{fit_spline, fit_spline_windowed};
pub use leakage::{leakage_of_samples, leakage_per_pulse, leakage_profile, leakage_single, LeakageGrid};
pub use simplex::{nelder_mead, optimize_warp, OptimizedWarp, SimplexOptions, SimplexResult};

use crate::wavecore::{CoreError, Validate, ValidationError, WarpDerivativeParams};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum WarpError {
    #[error(transparent)]
    Invalid(#[from] ValidationError),
    #[error(transparent)]
    Map(#[from] CoreError),
    #[error("warped coordinate {0} is outside the tabulated range")]
    OutOfTable(f64),
    #[error("no point met the leakage bound; best had D = {d:.4} with max leakage {max_leakage:.5}")]
    Infeasible { best: WarpDerivativeParams, d: f64, max_leakage: f64 },
    #[error("oversampling too low: slots {first} and {second} snap to sample {sample}")]
    OversamplingTooLow { first: usize, second: usize, sample: i64 },
    #[error("anchors do not fit a window of {window} samples")]
    WindowTooShort { window: usize },
    #[error("spline stayed non-monotone after relaxing anchors near sample {knot}")]
    NotMonotone { knot: i64 },
}

/// Warp derivative: `s_out` outside, rising to `s_in` between `t1` and `t2`.
pub fn wdot_eval(p: &WarpDerivativeParams, t: f64) -> f64 {
    let bump = ((t - p.t1) / p.t_cap).tanh() - ((t - p.t2) / p.t_cap).tanh();
    bump * (p.s_in - p.s_out) / 2.0 + p.s_out
}

/// One-sided variant: `s_out` for early times rising to `s_in` around `t1`.
pub fn wdot_rising(p: &WarpDerivativeParams, t: f64) -> f64 {
    p.s_out + (p.s_in - p.s_out) * 0.5 * (1.0 + ((t - p.t1) / p.t_cap).tanh())
}

/// Cumulative trapezoid of a warp derivative on a uniform grid with `w(0) = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct WarpTable {
    t0: f64,
    step: f64,
    w: Vec<f64>,
}

impl WarpTable {
    /// Tabulates over `[-k step, +k' step]` covering `[t_lo, t_hi]`, which must contain 0.
    pub fn from_derivative(f: impl Fn(f64) -> f64, t_lo: f64, t_hi: f64, step: f64) -> Self {
        assert!(t_lo <= 0.0 && t_hi >= 0.0 && step > 0.0, "table range must contain 0");
        let below = (-t_lo / step).ceil() as usize;
        let above = (t_hi / step).ceil() as usize;
        let t0 = -(below as f64) * step;
        let n = below + above + 1;
        let d: Vec<f64> = (0..n).map(|i| f(t0 + i as f64 * step)).collect();
        let mut w = Vec::with_capacity(n);
        let mut acc = 0.0;
        w.push(0.0);
        for i in 1..n {
            acc += 0.5 * (d[i] + d[i - 1]) * step;
            w.push(acc);
        }
        let zero = w[below];
        w.iter_mut().for_each(|v| *v -= zero);
        Self { t0, step, w }
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn t_range(&self) -> (f64, f64) {
        (self.t0, self.t0 + (self.w.len() - 1) as f64 * self.step)
    }

    pub fn values(&self) -> &[f64] {
        &self.w
    }

    /// Grid time of entry `i`.
    pub fn time(&self, i: usize) -> f64 {
        self.t0 + i as f64 * self.step
    }

    /// Linear interpolation of the table at `t` (clamped to the range).
    pub fn eval(&self, t: f64) -> f64 {
        let pos = ((t - self.t0) / self.step).clamp(0.0, (self.w.len() - 1) as f64);
        let i = (pos.floor() as usize).min(self.w.len() - 2);
        let f = pos - i as f64;
        self.w[i] + f * (self.w[i + 1] - self.w[i])
    }

    /// Time where the interpolated table reaches `y`: bisection over the
    /// table entries, then the exact linear solve inside the bracket.
    pub fn inverse(&self, y: f64) -> Result<f64, WarpError> {
        let n = self.w.len();
        if !(y >= self.w[0] && y <= self.w[n - 1]) {
            return Err(WarpError::OutOfTable(y));
        }
        let (mut lo, mut hi) = (0usize, n - 1);
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if self.w[mid] <= y {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let span = self.w[hi] - self.w[lo];
        let f = if span > 0.0 { (y - self.w[lo]) / span } else { 0.0 };
        Ok(self.time(lo) + f * self.step)
    }
}

/// Default tabulation step, in pulse periods.
pub const TABLE_STEP: f64 = 1e-3;

/// Tabulated warp `w(t)` of the double-sigmoid derivative.
pub fn integrate_wdot(p: &WarpDerivativeParams, t_range: (f64, f64), step: f64) -> Result<WarpTable, WarpError> {
    p.validate()?;
    let q = *p;
    Ok(WarpTable::from_derivative(move |t| wdot_eval(&q, t), t_range.0, t_range.1, step))
}

/// Half-range of a table that reaches warped coordinate `edge` on both
/// sides, capped so that near-zero edge slopes stay cheap (such warps then
/// fail to invert and are rejected).
pub(crate) fn reach(p: &WarpDerivativeParams, edge: f64) -> f64 {
    (1.05 * edge.abs() / p.s_out + 2.0).min(400.0)
}

/// Span `|w^-1(edge) - w^-1(-edge)|` in pulse periods.
pub fn expansion_d(p: &WarpDerivativeParams, edge: f64) -> Result<f64, WarpError> {
    let r = reach(p, edge);
    let table = integrate_wdot(p, (-r, r), TABLE_STEP)?;
    expansion_from_table(&table, edge)
}

pub(crate) fn expansion_from_table(table: &WarpTable, edge: f64) -> Result<f64, WarpError> {
    Ok((table.inverse(edge)? - table.inverse(-edge)?).abs())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sym() -> WarpDerivativeParams {
        WarpDerivativeParams::symmetric(0.49, 0.98, 5.3, 1.8)
    }

    #[test]
    fn derivative_limits() {
        let p = sym();
        assert!((wdot_eval(&p, 1e3) - 0.49).abs() < 1e-12);
        assert!((wdot_eval(&p, -1e3) - 0.49).abs() < 1e-12);
        // 0.49 + 0.245 * 2 * tanh(5.3 / 1.8) = 0.97729
        assert!((wdot_eval(&p, 0.0) - 0.9775).abs() < 5e-4, "{}", wdot_eval(&p, 0.0));
        assert!((wdot_eval(&p, 0.0) - 0.97729).abs() < 1e-5);
        let wide = WarpDerivativeParams::symmetric(0.3, 0.9, 40.0, 1.0);
        assert!((wdot_eval(&wide, 0.0) - 0.9).abs() < 1e-3);
    }

    #[test]
    fn derivative_stays_between_slopes() {
        let p = sym();
        for i in -200..=200 {
            let d = wdot_eval(&p, i as f64 * 0.1);
            assert!((p.s_out..=p.s_in).contains(&d));
        }
    }

    #[test]
    fn constant_slope_integrates_exactly() {
        let p = WarpDerivativeParams::symmetric(0.7, 0.7, 3.0, 1.0);
        let t = integrate_wdot(&p, (-10.0, 10.0), 1e-3).unwrap();
        for x in [-9.5, -1.25, 0.0, 3.0, 9.999] {
            assert!((t.eval(x) - 0.7 * x).abs() < 1e-10);
        }
    }

    #[test]
    fn symmetric_warp_is_odd() {
        let t = integrate_wdot(&sym(), (-20.0, 20.0), 1e-3).unwrap();
        for x in [0.5, 3.3, 7.0, 15.2] {
            assert!((t.eval(x) + t.eval(-x)).abs() < 1e-9);
        }
    }

    #[test]
    fn identity_expansion_is_eleven() {
        let d = expansion_d(&WarpDerivativeParams::identity(), 5.5).unwrap();
        assert!((d - 11.0).abs() < 1e-9, "{d}");
    }

    #[test]
    fn expansion_falls_as_edge_slope_rises() {
        let mut last = f64::INFINITY;
        for s in [0.3, 0.4, 0.5, 0.6, 0.7, 0.8] {
            let d = expansion_d(&WarpDerivativeParams::symmetric(s, 0.98, 5.3, 1.8), 5.5).unwrap();
            assert!(d <= last);
            last = d;
        }
    }

    #[test]
    fn inverse_matches_eval() {
        let t = integrate_wdot(&sym(), (-30.0, 30.0), 1e-3).unwrap();
        for y in [-5.5, -1.0, 0.0, 2.0, 5.5] {
            let x = t.inverse(y).unwrap();
            assert!((t.eval(x) - y).abs() < 1e-12);
        }
        assert!(matches!(t.inverse(1e3), Err(WarpError::OutOfTable(_))));
    }
}
