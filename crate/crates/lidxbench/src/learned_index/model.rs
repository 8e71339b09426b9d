//! Per-node linear models mapping keys to predicted positions.

use serde::{Deserialize, Serialize};

/// A linear approximation of the local key CDF: `position = slope * x + intercept`,
/// where `x` is a key offset from the owning node's range base.
///
/// The slope is clamped to be nonnegative: positions over sorted keys are
/// nondecreasing, so a negative fitted slope can only arise from degenerate
/// input and would misroute every prediction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub slope: f64,
    pub intercept: f64,
}

impl LinearModel {
    pub fn new(slope: f64, intercept: f64) -> Self {
        Self {
            slope: slope.max(0.0),
            intercept,
        }
    }

    /// Least-squares fit over `(x, y)` points.
    ///
    /// Degenerate inputs (a single point, or all x equal) fall back to a flat
    /// line through the mean of y.
    pub fn fit(points: impl Iterator<Item = (f64, f64)> + Clone) -> Self {
        let mut n = 0.0f64;
        let mut sx = 0.0f64;
        let mut sy = 0.0f64;
        for (x, y) in points.clone() {
            n += 1.0;
            sx += x;
            sy += y;
        }
        if n == 0.0 {
            return Self::new(0.0, 0.0);
        }
        let mx = sx / n;
        let my = sy / n;
        let mut sxx = 0.0f64;
        let mut sxy = 0.0f64;
        for (x, y) in points {
            let dx = x - mx;
            sxx += dx * dx;
            sxy += dx * (y - my);
        }
        if sxx <= f64::EPSILON * n {
            return Self::new(0.0, my);
        }
        let slope = (sxy / sxx).max(0.0);
        Self::new(slope, my - slope * mx)
    }

    /// Fit keys (offset by `base`) against slot positions scaled so that the
    /// ranks 0..n spread over `capacity` slots.
    pub fn fit_keys_to_slots(keys: impl Iterator<Item = u64> + Clone, base: u64, n: usize, capacity: usize) -> Self {
        debug_assert!(n >= 1);
        let scale = capacity as f64 / n as f64;
        Self::fit(
            keys.enumerate()
                .map(move |(i, k)| ((k.wrapping_sub(base)) as f64, i as f64 * scale)),
        )
    }

    #[inline]
    pub fn predict(&self, x: f64) -> f64 {
        self.slope * x + self.intercept
    }

    /// Predict a slot index for a key at offset `x`, clamped to `[0, capacity)`.
    #[inline]
    pub fn predict_slot(&self, x: f64, capacity: usize) -> usize {
        let p = self.predict(x);
        if !p.is_finite() || p <= 0.0 {
            0
        } else if p >= (capacity - 1) as f64 {
            capacity - 1
        } else {
            p.round() as usize
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line_recovered() {
        let pts = (0..100).map(|i| (i as f64, 3.0 + 2.0 * i as f64));
        let m = LinearModel::fit(pts);
        assert!((m.slope - 2.0).abs() < 1e-9);
        assert!((m.intercept - 3.0).abs() < 1e-9);
    }

    #[test]
    fn degenerate_inputs() {
        let m = LinearModel::fit(std::iter::once((5.0, 7.0)));
        assert_eq!(m.slope, 0.0);
        assert!((m.intercept - 7.0).abs() < 1e-12);

        // all-equal x: mean of y, flat
        let m = LinearModel::fit([(2.0, 1.0), (2.0, 3.0)].into_iter());
        assert_eq!(m.slope, 0.0);
        assert!((m.intercept - 2.0).abs() < 1e-12);
    }

    #[test]
    fn slope_never_negative() {
        let m = LinearModel::fit([(0.0, 10.0), (1.0, 5.0), (2.0, 0.0)].into_iter());
        assert!(m.slope >= 0.0);
    }

    #[test]
    fn predict_slot_clamps() {
        let m = LinearModel::new(1.0, -10.0);
        assert_eq!(m.predict_slot(0.0, 8), 0);
        let m = LinearModel::new(1.0, 100.0);
        assert_eq!(m.predict_slot(0.0, 8), 7);
    }
}
