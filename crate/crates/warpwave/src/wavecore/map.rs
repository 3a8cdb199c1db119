use super::spline::{cubic_segments, min_slope, EndCondition};
use super::CoreError;
use serde::{Deserialize, Serialize};

/// Piecewise-cubic warping function from oversampled sample positions to
/// pulse-index coordinates.
///
/// Knots sit on integer samples. Anchors are the knots that carry whole
/// pulse indices; evaluating the map at an anchor returns the stored index
/// exactly because each segment is kept in local form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WarpingMap {
    segments: Vec<[f64; 4]>,
    knots: Vec<i64>,
    anchors: Vec<i64>,
    /// Pulse index assigned to `anchors[0]`.
    first_index: i64,
    /// Map value at the last knot.
    end_value: f64,
}

impl WarpingMap {
    /// Spline through `(knots[i], values[i])`. Every anchor must be a knot
    /// whose value equals `first_index + position in anchors`.
    pub fn from_knots(
        knots: &[i64],
        values: &[f64],
        anchors: Vec<i64>,
        first_index: i64,
        end: EndCondition,
    ) -> Result<Self, CoreError> {
        let xs: Vec<f64> = knots.iter().map(|&k| k as f64).collect();
        let segments = cubic_segments(&xs, values, end).map_err(CoreError::Spline)?;
        for (i, a) in anchors.iter().enumerate() {
            let want = (first_index + i as i64) as f64;
            match knots.binary_search(a) {
                Ok(p) if values[p] == want => {}
                _ => return Err(CoreError::Spline(format!("anchor {a} is not a knot carrying index {want}"))),
            }
        }
        if anchors.windows(2).any(|w| w[1] <= w[0]) {
            return Err(CoreError::Spline("anchors must be strictly increasing".into()));
        }
        let map = Self {
            segments,
            knots: knots.to_vec(),
            anchors,
            first_index,
            end_value: *values.last().expect("non-empty"),
        };
        map.check_monotone()?;
        Ok(map)
    }

    /// Natural spline whose knots are exactly the anchors.
    pub fn from_anchors(anchors: &[i64], first_index: i64) -> Result<Self, CoreError> {
        let values: Vec<f64> = (0..anchors.len()).map(|i| (first_index + i as i64) as f64).collect();
        Self::from_knots(anchors, &values, anchors.to_vec(), first_index, EndCondition::Natural)
    }

    /// Unwarped grid: pulse `n` at sample `v * n`, `count` anchors.
    pub fn uniform(v: u32, count: usize) -> Result<Self, CoreError> {
        let anchors: Vec<i64> = (0..count as i64).map(|n| n * v as i64).collect();
        Self::from_anchors(&anchors, 0)
    }

    fn check_monotone(&self) -> Result<(), CoreError> {
        for (i, seg) in self.segments.iter().enumerate() {
            let h = (self.knots[i + 1] - self.knots[i]) as f64;
            if min_slope(seg, h) <= 0.0 {
                return Err(CoreError::NotMonotone { knot: self.knots[i] });
            }
        }
        Ok(())
    }

    pub fn segments(&self) -> &[[f64; 4]] {
        &self.segments
    }

    pub fn knots(&self) -> &[i64] {
        &self.knots
    }

    pub fn anchors(&self) -> &[i64] {
        &self.anchors
    }

    pub fn first_index(&self) -> i64 {
        self.first_index
    }

    /// Inclusive sample range covered by the map.
    pub fn domain(&self) -> (i64, i64) {
        (self.knots[0], *self.knots.last().expect("non-empty"))
    }

    /// Number of integer samples in the domain.
    pub fn len_samples(&self) -> usize {
        let (a, b) = self.domain();
        (b - a + 1) as usize
    }

    fn locate(&self, x: f64) -> Result<Option<(usize, f64)>, CoreError> {
        let (lo, hi) = self.domain();
        if !(x >= lo as f64 && x <= hi as f64) {
            return Err(CoreError::Domain { x, lo, hi });
        }
        if x == hi as f64 {
            return Ok(None);
        }
        // last knot <= x
        let i = match self.knots.binary_search_by(|k| (*k as f64).partial_cmp(&x).expect("finite")) {
            Ok(i) => i,
            Err(i) => i - 1,
        };
        Ok(Some((i, x - self.knots[i] as f64)))
    }

    /// Warped coordinate at sample position `x`.
    pub fn eval(&self, x: f64) -> Result<f64, CoreError> {
        Ok(match self.locate(x)? {
            None => self.end_value,
            Some((i, dx)) => {
                let [a, b, c, d] = self.segments[i];
                a + dx * (b + dx * (c + dx * d))
            }
        })
    }

    /// First derivative at `x`.
    pub fn deriv(&self, x: f64) -> Result<f64, CoreError> {
        let (i, dx) = match self.locate(x)? {
            None => {
                let i = self.segments.len() - 1;
                (i, (self.knots[i + 1] - self.knots[i]) as f64)
            }
            Some(p) => p,
        };
        let [_, b, c, d] = self.segments[i];
        Ok(b + dx * (2.0 * c + 3.0 * d * dx))
    }

    /// Sample position of pulse index `n`.
    pub fn anchor(&self, n: i64) -> Result<i64, CoreError> {
        let pos = n - self.first_index;
        if pos < 0 || pos as usize >= self.anchors.len() {
            return Err(CoreError::IndexOutOfRange { n, first: self.first_index, count: self.anchors.len() });
        }
        Ok(self.anchors[pos as usize])
    }

    /// Sample position where the map reaches `y`, by bisection to 1e-12.
    pub fn inverse(&self, y: f64) -> Result<f64, CoreError> {
        let (lo, hi) = self.domain();
        let (mut a, mut b) = (lo as f64, hi as f64);
        let (fa, fb) = (self.eval(a)?, self.eval(b)?);
        if !(y >= fa && y <= fb) {
            return Err(CoreError::Domain { x: y, lo, hi });
        }
        while b - a > 1e-12 {
            let m = 0.5 * (a + b);
            if self.eval(m)? < y {
                a = m;
            } else {
                b = m;
            }
        }
        Ok(0.5 * (a + b))
    }

    /// Smallest analytic first derivative over the whole domain.
    pub fn min_derivative(&self) -> f64 {
        self.segments
            .iter()
            .enumerate()
            .map(|(i, s)| min_slope(s, (self.knots[i + 1] - self.knots[i]) as f64))
            .fold(f64::INFINITY, f64::min)
    }
}

/// Free-function form of [`WarpingMap::eval`].
pub fn warp_eval(map: &WarpingMap, x_t: f64) -> Result<f64, CoreError> {
    map.eval(x_t)
}

/// Free-function form of [`WarpingMap::anchor`].
pub fn warp_anchor(map: &WarpingMap, n: i64) -> Result<i64, CoreError> {
    map.anchor(n)
}
