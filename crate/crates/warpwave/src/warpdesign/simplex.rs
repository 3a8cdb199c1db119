//! Derivative-free simplex search and the warp-compaction objective.

use super::leakage::leakage_with_table;
use super::{expansion_from_table, integrate_wdot, reach, LeakageGrid, WarpError, TABLE_STEP};
use crate::wavecore::{RolloffProfile, Validate, WarpDerivativeParams};

/// Fixed simplex coefficients and the evaluation budget.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimplexOptions {
    pub reflection: f64,
    pub expansion: f64,
    pub contraction: f64,
    pub shrink: f64,
    /// Relative perturbation of each coordinate in the initial simplex.
    pub initial_step: f64,
    pub max_evals: usize,
    /// Stop once the spread of objective values falls below this.
    pub f_tol: f64,
    /// ... and every vertex lies within this of the best one.
    pub x_tol: f64,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        Self {
            reflection: 1.0,
            expansion: 2.0,
            contraction: 0.5,
            shrink: 0.5,
            initial_step: 0.1,
            max_evals: 2000,
            f_tol: 1e-10,
            x_tol: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimplexResult {
    pub x: Vec<f64>,
    pub f: f64,
    pub evaluations: usize,
}

/// Minimizes `f` starting from `x0`.
pub fn nelder_mead(mut f: impl FnMut(&[f64]) -> f64, x0: &[f64], opts: &SimplexOptions) -> SimplexResult {
    let n = x0.len();
    let mut evals = 0usize;
    let mut eval = |x: &[f64], evals: &mut usize| {
        *evals += 1;
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    let mut pts: Vec<Vec<f64>> = vec![x0.to_vec()];
    for i in 0..n {
        let mut p = x0.to_vec();
        p[i] = if p[i] != 0.0 { p[i] * (1.0 + opts.initial_step) } else { opts.initial_step };
        pts.push(p);
    }
    let mut vals: Vec<f64> = pts.iter().map(|p| eval(p, &mut evals)).collect();

    while evals < opts.max_evals {
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
        pts = order.iter().map(|&i| pts[i].clone()).collect();
        vals = order.iter().map(|&i| vals[i]).collect();

        let spread = vals[n] - vals[0];
        let size = pts[1..].iter().flat_map(|p| p.iter().zip(&pts[0]).map(|(a, b)| (a - b).abs())).fold(0.0, f64::max);
        if spread.abs() <= opts.f_tol && size <= opts.x_tol {
            break;
        }

        let centroid: Vec<f64> = (0..n).map(|j| pts[..n].iter().map(|p| p[j]).sum::<f64>() / n as f64).collect();
        let along = |t: f64| -> Vec<f64> { centroid.iter().zip(&pts[n]).map(|(c, w)| c + t * (c - w)).collect() };

        let xr = along(opts.reflection);
        let fr = eval(&xr, &mut evals);
        if fr < vals[0] {
            let xe = along(opts.reflection * opts.expansion);
            let fe = eval(&xe, &mut evals);
            if fe < fr {
                pts[n] = xe;
                vals[n] = fe;
            } else {
                pts[n] = xr;
                vals[n] = fr;
            }
            continue;
        }
        if fr < vals[n - 1] {
            pts[n] = xr;
            vals[n] = fr;
            continue;
        }
        let (xc, fc) = if fr < vals[n] {
            let xc = along(opts.reflection * opts.contraction);
            let fc = eval(&xc, &mut evals);
            (xc, if fc <= fr { fc } else { f64::INFINITY })
        } else {
            let xc = along(-opts.contraction);
            let fc = eval(&xc, &mut evals);
            (xc, if fc < vals[n] { fc } else { f64::INFINITY })
        };
        if fc.is_finite() {
            pts[n] = xc;
            vals[n] = fc;
            continue;
        }
        for i in 1..=n {
            let p: Vec<f64> = pts[0].iter().zip(&pts[i]).map(|(b, x)| b + opts.shrink * (x - b)).collect();
            vals[i] = eval(&p, &mut evals);
            pts[i] = p;
        }
    }
    let best = (0..=n).min_by(|&a, &b| vals[a].total_cmp(&vals[b])).expect("non-empty simplex");
    SimplexResult { x: pts[best].clone(), f: vals[best], evaluations: evals }
}

/// Outcome of the warp search.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizedWarp {
    pub params: WarpDerivativeParams,
    /// Expansion over the pulse span, in pulse periods.
    pub d: f64,
    pub max_leakage: f64,
    pub leakages: Vec<f64>,
    pub evaluations: usize,
}

/// Weight of the leakage-bound violation in the search objective.
pub const PENALTY: f64 = 1e6;

/// Most compact warp (smallest expansion of the pulse span) whose per-pulse
/// leakage stays at or below `xi`.
pub fn optimize_warp(
    profile: &RolloffProfile,
    xi: f64,
    init: &WarpDerivativeParams,
    grid: &LeakageGrid,
    opts: &SimplexOptions,
) -> Result<OptimizedWarp, WarpError> {
    init.validate()?;
    let edge = profile.len() as f64 / 2.0 - 0.5;
    let mut best: Option<OptimizedWarp> = None;
    let mut best_any: Option<(WarpDerivativeParams, f64, f64)> = None;
    let result = nelder_mead(
        |x| {
            let p = WarpDerivativeParams::from_array(x.try_into().expect("five parameters"));
            if p.validate().is_err() {
                return PENALTY;
            }
            let r = reach(&p, edge).max(grid.t_max + 1.0);
            let Ok(table) = integrate_wdot(&p, (-r, r), TABLE_STEP) else {
                return PENALTY;
            };
            let Ok(d) = expansion_from_table(&table, edge) else {
                return PENALTY;
            };
            let leaks = leakage_with_table(profile, &table, grid);
            let max_leakage = leaks.iter().copied().fold(0.0, f64::max);
            if max_leakage <= xi && best.as_ref().is_none_or(|b| d < b.d) {
                best = Some(OptimizedWarp { params: p, d, max_leakage, leakages: leaks, evaluations: 0 });
            }
            if best_any.is_none_or(|b| max_leakage < b.2) {
                best_any = Some((p, d, max_leakage));
            }
            d + PENALTY * (max_leakage - xi).max(0.0)
        },
        &init.to_array(),
        opts,
    );
    match best {
        Some(mut b) => {
            b.evaluations = result.evaluations;
            Ok(b)
        }
        None => {
            let (best, d, max_leakage) = best_any.unwrap_or((*init, f64::NAN, f64::NAN));
            Err(WarpError::Infeasible { best, d, max_leakage })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_quadratic_minimum() {
        let r = nelder_mead(
            |x| (x[0] - 1.0).powi(2) + 3.0 * (x[1] + 2.0).powi(2) + 0.5,
            &[4.0, 4.0],
            &SimplexOptions::default(),
        );
        assert!((r.x[0] - 1.0).abs() < 1e-4 && (r.x[1] + 2.0).abs() < 1e-4, "{:?}", r.x);
        assert!((r.f - 0.5).abs() < 1e-8);
    }

    #[test]
    fn handles_rosenbrock() {
        let r = nelder_mead(
            |x| 100.0 * (x[1] - x[0] * x[0]).powi(2) + (1.0 - x[0]).powi(2),
            &[-1.2, 1.0],
            &SimplexOptions { max_evals: 4000, ..SimplexOptions::default() },
        );
        assert!((r.x[0] - 1.0).abs() < 1e-3 && (r.x[1] - 1.0).abs() < 1e-3, "{:?}", r.x);
    }

    #[test]
    fn respects_budget() {
        let opts = SimplexOptions { max_evals: 37, ..SimplexOptions::default() };
        let r = nelder_mead(|x| x.iter().map(|v| v.sin()).sum(), &[0.3, 0.2, 0.1], &opts);
        assert!(r.evaluations <= 37 + 3);
    }

    #[test]
    fn unreachable_bound_reports_infeasible() {
        let profile = RolloffProfile::reference_twelve(None);
        let opts = SimplexOptions { max_evals: 30, ..SimplexOptions::default() };
        let init = WarpDerivativeParams::symmetric(0.49, 0.98, 5.3, 1.8);
        let r = optimize_warp(&profile, 1e-9, &init, &LeakageGrid::default(), &opts);
        assert!(matches!(r, Err(WarpError::Infeasible { .. })));
    }
}
