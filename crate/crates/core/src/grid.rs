use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Evenly spaced samples `min, min + step, ..., max`.
///
/// When `min` is an integer multiple of `step` the samples are generated as
/// `k * step`, so a grid symmetric about zero holds exact negatives.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UniformGrid {
    pub min: f64,
    pub max: f64,
    pub step: f64,
}

impl UniformGrid {
    pub fn new(min: f64, max: f64, step: f64) -> Result<Self> {
        let g = Self { min, max, step };
        g.check()?;
        Ok(g)
    }

    pub fn check(&self) -> Result<()> {
        if !(self.step > 0.0) || !self.step.is_finite() {
            return Err(Error::invalid(format!("grid step must be positive, got {}", self.step)));
        }
        if !self.min.is_finite() || !self.max.is_finite() || self.max < self.min {
            return Err(Error::invalid(format!("grid bounds [{}, {}] are invalid", self.min, self.max)));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        ((self.max - self.min) / self.step + 1e-9).floor() as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn points(&self) -> Vec<f64> {
        let ratio = self.min / self.step;
        let anchor = ratio.round();
        let n = self.len();
        if (ratio - anchor).abs() < 1e-9 {
            (0..n).map(|i| (anchor + i as f64) * self.step).collect()
        } else {
            (0..n).map(|i| self.min + i as f64 * self.step).collect()
        }
    }
}

/// Ensures an axis is strictly increasing.
pub(crate) fn check_increasing(axis: &[f64], what: &str) -> Result<()> {
    if axis.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid(format!("{what} contains non-finite values")));
    }
    if axis.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid(format!("{what} must be strictly increasing")));
    }
    Ok(())
}

/// Step of a uniformly sampled axis, or an error if the spacing varies.
pub fn uniform_step(axis: &[f64], what: &str) -> Result<f64> {
    if axis.len() < 2 {
        return Err(Error::invalid(format!("{what} needs at least two samples")));
    }
    let step = (axis[axis.len() - 1] - axis[0]) / (axis.len() - 1) as f64;
    let tolerance = 1e-6 * step.abs();
    if axis.windows(2).any(|w| ((w[1] - w[0]) - step).abs() > tolerance) {
        return Err(Error::invalid(format!("{what} is not uniformly sampled")));
    }
    Ok(step)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_signal_grid_has_5001_points() {
        let g = UniformGrid::new(0.60, 0.70, 2e-5).unwrap();
        assert_eq!(g.len(), 5001);
        let p = g.points();
        assert!((p[0] - 0.6).abs() < 1e-15 && (p[5000] - 0.7).abs() < 1e-12);
    }

    #[test]
    fn symmetric_grid_is_exactly_symmetric() {
        let p = UniformGrid::new(-2.2, 2.2, 0.01).unwrap().points();
        assert_eq!(p.len(), 441);
        for i in 0..p.len() {
            assert_eq!(p[i], -p[p.len() - 1 - i]);
        }
        assert_eq!(p[220], 0.0);
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(UniformGrid::new(0.7, 0.6, 1e-3).is_err());
        assert!(UniformGrid::new(0.6, 0.7, 0.0).is_err());
        assert!(uniform_step(&[0.0, 1.0, 3.0], "axis").is_err());
        assert!(check_increasing(&[0.0, 1.0, 1.0], "axis").is_err());
    }
}
