//! Snapping the smooth warp onto the oversampled grid and fitting the
//! piecewise-cubic map through the snapped anchors.

use super::{integrate_wdot, reach, wdot_eval, WarpError, WarpTable, TABLE_STEP};
use crate::wavecore::spline::EndCondition;
use crate::wavecore::{CoreError, WarpDerivativeParams, WarpingMap};

/// Relaxation passes tried when the fitted map is not monotone.
const RELAX_PASSES: usize = 3;

struct Smooth {
    params: WarpDerivativeParams,
    table: WarpTable,
    v: f64,
    /// Half the slot span, added to the centred warp to get slot indices.
    half: f64,
}

impl Smooth {
    fn new(params: &WarpDerivativeParams, v: u32, slots: usize, extra_t: f64) -> Result<Self, WarpError> {
        let half = (slots as f64 - 1.0) / 2.0;
        let r = reach(params, half + 1.0).max(extra_t + 1.0);
        let table = integrate_wdot(params, (-r, r), TABLE_STEP)?;
        Ok(Self { params: *params, table, v: v as f64, half })
    }

    /// Real-valued sample positions of every slot, centred on 0.
    fn positions(&self, slots: usize) -> Result<Vec<f64>, WarpError> {
        (0..slots).map(|k| Ok(self.v * self.table.inverse(k as f64 - self.half)?)).collect()
    }

    /// Slot coordinate and its slope at centred sample position `x`.
    fn at(&self, x: f64) -> (f64, f64) {
        let t = x / self.v;
        (self.table.eval(t) + self.half, wdot_eval(&self.params, t) / self.v)
    }
}

fn snap(u: &[f64], offset: f64) -> Result<Vec<i64>, WarpError> {
    let a: Vec<i64> = u.iter().map(|x| (x + offset).round() as i64).collect();
    if let Some(k) = a.windows(2).position(|w| w[1] <= w[0]) {
        return Err(WarpError::OversamplingTooLow { first: k, second: k + 1, sample: a[k + 1] });
    }
    Ok(a)
}

/// Fits the map, moving one anchor of an offending segment to its other
/// rounding neighbour after each monotonicity failure.
fn fit_with_relaxation(
    smooth: &Smooth,
    u: &[f64],
    offset: f64,
    window: Option<usize>,
) -> Result<WarpingMap, WarpError> {
    let mut anchors = snap(u, offset)?;
    let mut last_err = None;
    for _ in 0..=RELAX_PASSES {
        match build(smooth, &anchors, offset, window) {
            Ok(m) => return Ok(m),
            Err(WarpError::Map(CoreError::NotMonotone { knot })) => {
                last_err = Some(knot);
                let candidates: Vec<usize> =
                    anchors.iter().enumerate().filter(|&(_, &a)| a >= knot).take(2).map(|(i, _)| i).collect();
                let worst = candidates
                    .into_iter()
                    .max_by(|&i, &j| {
                        let ri = (u[i] + offset - anchors[i] as f64).abs();
                        let rj = (u[j] + offset - anchors[j] as f64).abs();
                        ri.total_cmp(&rj)
                    })
                    .ok_or(WarpError::NotMonotone { knot })?;
                let residual = u[worst] + offset - anchors[worst] as f64;
                let moved = anchors[worst] + if residual >= 0.0 { 1 } else { -1 };
                let clash = (worst > 0 && moved <= anchors[worst - 1])
                    || (worst + 1 < anchors.len() && moved >= anchors[worst + 1]);
                if clash {
                    return Err(WarpError::NotMonotone { knot });
                }
                anchors[worst] = moved;
            }
            Err(e) => return Err(e),
        }
    }
    Err(WarpError::NotMonotone { knot: last_err.unwrap_or(0) })
}

fn build(smooth: &Smooth, anchors: &[i64], offset: f64, window: Option<usize>) -> Result<WarpingMap, WarpError> {
    let mut knots = Vec::with_capacity(anchors.len() + 2);
    let mut values = Vec::with_capacity(anchors.len() + 2);
    if let Some(win) = window {
        if anchors[0] <= 0 || *anchors.last().expect("anchors") >= win as i64 - 1 {
            return Err(WarpError::WindowTooShort { window: win });
        }
        knots.push(0);
        values.push(smooth.at(-offset).0);
    }
    knots.extend_from_slice(anchors);
    values.extend((0..anchors.len()).map(|k| k as f64));
    if let Some(win) = window {
        let end = win as i64 - 1;
        knots.push(end);
        values.push(smooth.at(end as f64 - offset).0);
    }
    let first = smooth.at(knots[0] as f64 - offset).1;
    let last = smooth.at(*knots.last().expect("knots") as f64 - offset).1;
    Ok(WarpingMap::from_knots(&knots, &values, anchors.to_vec(), 0, EndCondition::Clamped(first, last))?)
}

/// Map for `n_pulses` pulses with `z_h` head and `z_t` tail guard slots at
/// `v` samples per pulse period. Slot `k` (guards included, 0-based) lands
/// on an integer sample; the first slot sits at sample 0.
pub fn fit_spline(
    params: &WarpDerivativeParams,
    v: u32,
    n_pulses: usize,
    z_h: usize,
    z_t: usize,
) -> Result<WarpingMap, WarpError> {
    let slots = n_pulses + z_h + z_t;
    let smooth = Smooth::new(params, v, slots, 0.0)?;
    let u = smooth.positions(slots)?;
    let (u0, un) = (u[0], u[slots - 1]);
    let span = (un - u0).round();
    let offset = span / 2.0 - (u0 + un) / 2.0;
    fit_with_relaxation(&smooth, &u, offset, None)
}

/// As [`fit_spline`] but centred in a `window`-sample symbol whose first and
/// last samples become extra knots on the smooth warp.
pub fn fit_spline_windowed(
    params: &WarpDerivativeParams,
    v: u32,
    n_pulses: usize,
    z_h: usize,
    z_t: usize,
    window: usize,
) -> Result<WarpingMap, WarpError> {
    let slots = n_pulses + z_h + z_t;
    let offset = (window as f64 - 1.0) / 2.0;
    let smooth = Smooth::new(params, v, slots, offset / v as f64)?;
    let u = smooth.positions(slots)?;
    fit_with_relaxation(&smooth, &u, offset, Some(window))
}
