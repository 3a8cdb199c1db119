//! C2 cubic interpolating splines in local-coefficient form.

/// Boundary condition for the outer knots.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EndCondition {
    /// Zero second derivative at both ends.
    Natural,
    /// Prescribed first derivatives at the first and last knot.
    Clamped(f64, f64),
}

/// Local coefficients `(a, b, c, d)` for each interval, so that on
/// `[x_i, x_{i+1}]` the value is `a + b dx + c dx^2 + d dx^3` with `dx = x - x_i`.
pub fn cubic_segments(xs: &[f64], ys: &[f64], end: EndCondition) -> Result<Vec<[f64; 4]>, String> {
    let n = xs.len();
    if n != ys.len() {
        return Err(format!("{} knots but {} values", n, ys.len()));
    }
    if n < 2 {
        return Err("a spline needs at least two knots".into());
    }
    if xs.windows(2).any(|w| w[1] <= w[0]) {
        return Err("knots must be strictly increasing".into());
    }
    let h: Vec<f64> = xs.windows(2).map(|w| w[1] - w[0]).collect();
    let slope: Vec<f64> = (0..n - 1).map(|i| (ys[i + 1] - ys[i]) / h[i]).collect();

    // tridiagonal system for second derivatives
    let mut sub = vec![0.0; n];
    let mut diag = vec![1.0; n];
    let mut sup = vec![0.0; n];
    let mut rhs = vec![0.0; n];
    for i in 1..n - 1 {
        sub[i] = h[i - 1];
        diag[i] = 2.0 * (h[i - 1] + h[i]);
        sup[i] = h[i];
        rhs[i] = 6.0 * (slope[i] - slope[i - 1]);
    }
    if let EndCondition::Clamped(s0, s1) = end {
        diag[0] = 2.0 * h[0];
        sup[0] = h[0];
        rhs[0] = 6.0 * (slope[0] - s0);
        sub[n - 1] = h[n - 2];
        diag[n - 1] = 2.0 * h[n - 2];
        rhs[n - 1] = 6.0 * (s1 - slope[n - 2]);
    }
    let m = thomas(&sub, &diag, &sup, &rhs);

    Ok((0..n - 1)
        .map(|i| [ys[i], slope[i] - h[i] * (2.0 * m[i] + m[i + 1]) / 6.0, m[i] / 2.0, (m[i + 1] - m[i]) / (6.0 * h[i])])
        .collect())
}

fn thomas(a: &[f64], b: &[f64], c: &[f64], d: &[f64]) -> Vec<f64> {
    let n = b.len();
    let mut cp = vec![0.0; n];
    let mut dp = vec![0.0; n];
    cp[0] = c[0] / b[0];
    dp[0] = d[0] / b[0];
    for i in 1..n {
        let den = b[i] - a[i] * cp[i - 1];
        cp[i] = c[i] / den;
        dp[i] = (d[i] - a[i] * dp[i - 1]) / den;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = dp[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = dp[i] - cp[i] * x[i + 1];
    }
    x
}

/// Minimum of `b + 2c t + 3d t^2` over `t in [0, h]`.
pub fn min_slope(seg: &[f64; 4], h: f64) -> f64 {
    let [_, b, c, d] = *seg;
    let f = |t: f64| b + 2.0 * c * t + 3.0 * d * t * t;
    let mut lo = f(0.0).min(f(h));
    if d.abs() > 0.0 {
        let t = -c / (3.0 * d);
        if t > 0.0 && t < h {
            lo = lo.min(f(t));
        }
    }
    lo
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eval(seg: &[f64; 4], dx: f64) -> [f64; 3] {
        let [a, b, c, d] = *seg;
        [a + dx * (b + dx * (c + dx * d)), b + dx * (2.0 * c + 3.0 * d * dx), 2.0 * c + 6.0 * d * dx]
    }

    #[test]
    fn reproduces_a_cubic_with_exact_end_slopes() {
        let f = |x: f64| 0.5 * x * x * x - x + 2.0;
        let df = |x: f64| 1.5 * x * x - 1.0;
        let xs = [0.0, 1.0, 2.5, 3.0, 5.0];
        let ys: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
        let seg = cubic_segments(&xs, &ys, EndCondition::Clamped(df(0.0), df(5.0))).unwrap();
        for (i, s) in seg.iter().enumerate() {
            let mid = xs[i] + 0.37 * (xs[i + 1] - xs[i]);
            assert!((eval(s, mid - xs[i])[0] - f(mid)).abs() < 1e-9);
        }
    }

    #[test]
    fn c2_at_interior_knots() {
        let xs = [0.0, 2.0, 3.0, 7.0, 8.0, 11.0];
        let ys = [0.0, 1.0, 1.5, 2.0, 4.0, 5.0];
        for end in [EndCondition::Natural, EndCondition::Clamped(0.3, 0.2)] {
            let seg = cubic_segments(&xs, &ys, end).unwrap();
            for i in 0..seg.len() - 1 {
                let l = eval(&seg[i], xs[i + 1] - xs[i]);
                let r = eval(&seg[i + 1], 0.0);
                for k in 0..3 {
                    assert!((l[k] - r[k]).abs() < 1e-9 * (1.0 + r[k].abs()), "knot {} order {}", i + 1, k);
                }
            }
        }
    }

    #[test]
    fn two_knots_natural_is_a_line() {
        let seg = cubic_segments(&[1.0, 4.0], &[0.0, 6.0], EndCondition::Natural).unwrap();
        assert_eq!(seg[0], [0.0, 2.0, 0.0, 0.0]);
    }

    #[test]
    fn rejects_unsorted_knots() {
        assert!(cubic_segments(&[0.0, 0.0], &[1.0, 2.0], EndCondition::Natural).is_err());
    }

    #[test]
    fn min_slope_finds_interior_dip() {
        // derivative 1 - 3t + 1.5 t^2 has minimum -0.5 at t = 1
        let seg = [0.0, 1.0, -1.5, 0.5];
        assert!((min_slope(&seg, 2.0) + 0.5).abs() < 1e-12);
    }
}
