use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
#[error("invalid frequency grid: {0}")]
pub struct GridError(pub String);

/// Uniform grid of angular frequencies, endpoints included.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, schemars::JsonSchema)]
#[serde(try_from = "RawGrid", into = "RawGrid")]
pub struct FrequencyGrid {
    start: f64,
    stop: f64,
    points: usize,
}

#[derive(Serialize, Deserialize, schemars::JsonSchema)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    /// rad/s
    #[serde(deserialize_with = "crate::units::de::rad_s")]
    #[schemars(with = "crate::units::QuantityInput")]
    start: f64,
    /// rad/s
    #[serde(deserialize_with = "crate::units::de::rad_s")]
    #[schemars(with = "crate::units::QuantityInput")]
    stop: f64,
    points: usize,
}

impl TryFrom<RawGrid> for FrequencyGrid {
    type Error = GridError;
    fn try_from(raw: RawGrid) -> Result<Self, GridError> {
        FrequencyGrid::new(raw.start, raw.stop, raw.points)
    }
}

impl From<FrequencyGrid> for RawGrid {
    fn from(g: FrequencyGrid) -> Self {
        RawGrid {
            start: g.start,
            stop: g.stop,
            points: g.points,
        }
    }
}

impl FrequencyGrid {
    pub fn new(start: f64, stop: f64, points: usize) -> Result<Self, GridError> {
        if points < 2 {
            return Err(GridError(format!("need at least 2 points, got {points}")));
        }
        if !start.is_finite() || !stop.is_finite() || stop <= start {
            return Err(GridError(format!("need finite start < stop, got [{start}, {stop}]")));
        }
        Ok(Self { start, stop, points })
    }

    /// Grid of `points` values centred on `center` with half-width `half_span`.
    pub fn centered(center: f64, half_span: f64, points: usize) -> Result<Self, GridError> {
        Self::new(center - half_span, center + half_span, points)
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn stop(&self) -> f64 {
        self.stop
    }

    pub fn len(&self) -> usize {
        self.points
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn step(&self) -> f64 {
        (self.stop - self.start) / (self.points - 1) as f64
    }

    pub fn value(&self, i: usize) -> f64 {
        if i + 1 == self.points {
            self.stop
        } else {
            self.start + i as f64 * self.step()
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.points).map(move |i| self.value(i))
    }

    pub fn values(&self) -> Vec<f64> {
        self.iter().collect()
    }

    /// Trapezoidal integral of samples taken on this grid.
    pub fn integrate(&self, samples: &[f64]) -> f64 {
        assert_eq!(samples.len(), self.points);
        let inner: f64 = samples[1..self.points - 1].iter().sum();
        self.step() * (inner + 0.5 * (samples[0] + samples[self.points - 1]))
    }

    /// Trapezoidal integral of the samples restricted to `[lo, hi]`, with the
    /// partial end intervals interpolated linearly.
    pub fn integrate_window(&self, samples: &[f64], lo: f64, hi: f64) -> f64 {
        assert_eq!(samples.len(), self.points);
        let lo = lo.max(self.start);
        let hi = hi.min(self.stop);
        if hi <= lo {
            return 0.0;
        }
        let h = self.step();
        let at = |x: f64| {
            let pos = ((x - self.start) / h).clamp(0.0, (self.points - 1) as f64);
            let i = (pos.floor() as usize).min(self.points - 2);
            let frac = pos - i as f64;
            samples[i] * (1.0 - frac) + samples[i + 1] * frac
        };
        let mut total = 0.0;
        let mut x = lo;
        let mut fx = at(lo);
        let first = ((lo - self.start) / h).floor() as usize + 1;
        for (i, &si) in samples.iter().enumerate().skip(first) {
            let xi = self.value(i);
            if xi >= hi {
                break;
            }
            total += 0.5 * (fx + si) * (xi - x);
            x = xi;
            fx = si;
        }
        total + 0.5 * (fx + at(hi)) * (hi - x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_degenerate_grids() {
        assert!(FrequencyGrid::new(0.0, 1.0, 1).is_err());
        assert!(FrequencyGrid::new(1.0, 1.0, 10).is_err());
        assert!(FrequencyGrid::new(2.0, 1.0, 10).is_err());
        assert!(FrequencyGrid::new(0.0, f64::NAN, 10).is_err());
    }

    #[test]
    fn uniform_and_increasing() {
        let g = FrequencyGrid::new(-1.0, 3.0, 5).unwrap();
        assert_eq!(g.values(), vec![-1.0, 0.0, 1.0, 2.0, 3.0]);
        assert_eq!(g.step(), 1.0);
    }

    #[test]
    fn trapezoid_is_exact_for_linear_samples() {
        let g = FrequencyGrid::new(0.0, 2.0, 21).unwrap();
        let s: Vec<f64> = g.iter().map(|x| 3.0 * x + 1.0).collect();
        assert!((g.integrate(&s) - 8.0).abs() < 1e-12);
        assert!(
            (g.integrate_window(&s, 0.55, 1.23) - (1.5 * (1.23f64.powi(2) - 0.55f64.powi(2)) + 0.68)).abs() < 1e-12
        );
    }

    #[test]
    fn deserialization_validates() {
        let bad: Result<FrequencyGrid, _> = serde_json::from_str(r#"{"start": 1.0, "stop": 0.0, "points": 4}"#);
        assert!(bad.is_err());
        let typo: Result<FrequencyGrid, _> = serde_json::from_str(r#"{"start": 0.0, "stop": 1.0, "pionts": 4}"#);
        assert!(typo.is_err());
    }
}
