//! Error and oscillation metrics.
//!
//! `D`, `D₀` and `D₁` are all [`rmse`] over different pairs of columns:
//! fit against data, truth against data and truth against fit.
//! [`oscillation_measure`] is the RMS of a derivative over a grid.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::RationalModel;

/// Root mean square of `pred - target`.
pub fn rmse(pred: &[f64], target: &[f64]) -> Result<f64> {
    if pred.len() != target.len() {
        return Err(Error::LengthMismatch {
            left: pred.len(),
            right: target.len(),
        });
    }
    if pred.is_empty() {
        return Err(Error::EmptyInput);
    }
    let sum: f64 = pred
        .iter()
        .zip(target)
        .map(|(p, t)| (p - t) * (p - t))
        .sum();
    Ok((sum / pred.len() as f64).sqrt())
}

/// Where the `N` derivative samples sit inside `[a, b]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum GridPlacement {
    /// `a + i·(b - a)/N`, `i = 1..N`.
    #[default]
    RightEndpoint,
    /// `a + (i - ½)·(b - a)/N`.
    Midpoint,
    /// `a + i·(b - a)/(N + 1)`.
    OpenUniform,
    /// `a + (i - 1)·(b - a)/(N - 1)`, both ends included.
    ClosedUniform,
}

/// Sampling grid for the oscillation measure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivativeGrid {
    pub interval: (f64, f64),
    pub count: usize,
    #[serde(default)]
    pub placement: GridPlacement,
}

impl DerivativeGrid {
    pub fn new(a: f64, b: f64, count: usize) -> Result<Self> {
        if count == 0 || !(b > a) || !a.is_finite() || !b.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "derivative grid needs N >= 1 and a < b, got N = {count} on [{a}, {b}]"
            )));
        }
        Ok(DerivativeGrid {
            interval: (a, b),
            count,
            placement: GridPlacement::default(),
        })
    }

    pub fn with_placement(mut self, placement: GridPlacement) -> Self {
        self.placement = placement;
        self
    }

    pub fn points(&self) -> Vec<f64> {
        let (a, b) = self.interval;
        let n = self.count as f64;
        (1..=self.count)
            .map(|i| {
                let i = i as f64;
                match self.placement {
                    GridPlacement::RightEndpoint => a + i * (b - a) / n,
                    GridPlacement::Midpoint => a + (i - 0.5) * (b - a) / n,
                    GridPlacement::OpenUniform => a + i * (b - a) / (n + 1.0),
                    GridPlacement::ClosedUniform if self.count == 1 => 0.5 * (a + b),
                    GridPlacement::ClosedUniform => a + (i - 1.0) * (b - a) / (n - 1.0),
                }
            })
            .collect()
    }
}

/// `sqrt(Σ f'(xᵢ)² / N)` for any derivative function.
pub fn oscillation_measure<F>(derivative: F, grid: &DerivativeGrid) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let points = grid.points();
    let mut sum = 0.0;
    for &x in &points {
        let d = derivative(x)?;
        sum += d * d;
    }
    Ok((sum / points.len() as f64).sqrt())
}

/// Oscillation measure of a fitted model, using its analytic derivative.
pub fn model_oscillation(model: &RationalModel, grid: &DerivativeGrid) -> Result<f64> {
    oscillation_measure(|x| model.derivative(x), grid)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rmse_examples() {
        assert_eq!(rmse(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert_eq!(rmse(&[1.0], &[0.0]).unwrap(), 1.0);
        assert!(
            (rmse(&[1.0, 2.0, 3.0], &[0.0; 3]).unwrap() - (14.0f64 / 3.0).sqrt()).abs() < 1e-15
        );
    }

    #[test]
    fn rmse_errors() {
        assert_eq!(
            rmse(&[1.0], &[1.0, 2.0]),
            Err(Error::LengthMismatch { left: 1, right: 2 })
        );
        assert_eq!(rmse(&[], &[]), Err(Error::EmptyInput));
    }

    #[test]
    fn grid_placements() {
        let g = DerivativeGrid::new(0.0, 2.0, 4).unwrap();
        assert_eq!(g.points(), vec![0.5, 1.0, 1.5, 2.0]);
        assert_eq!(
            g.with_placement(GridPlacement::Midpoint).points(),
            vec![0.25, 0.75, 1.25, 1.75]
        );
        assert_eq!(
            g.with_placement(GridPlacement::ClosedUniform).points(),
            vec![0.0, 2.0 / 3.0, 4.0 / 3.0, 2.0]
        );
        assert_eq!(
            g.with_placement(GridPlacement::OpenUniform).points(),
            vec![0.4, 0.8, 1.2, 1.6]
        );
        assert!(DerivativeGrid::new(1.0, 1.0, 3).is_err());
        assert!(DerivativeGrid::new(0.0, 1.0, 0).is_err());
    }

    #[test]
    fn constant_has_no_oscillation() {
        let g = DerivativeGrid::new(0.0, 2.0, 40).unwrap();
        let c = RationalModel::constant(3.0).unwrap();
        assert_eq!(model_oscillation(&c, &g).unwrap(), 0.0);
    }

    #[test]
    fn pole_on_grid_is_an_error() {
        let g = DerivativeGrid::new(0.0, 2.0, 4).unwrap();
        let m = RationalModel::new(vec![1.0], vec![-1.0]).unwrap();
        assert_eq!(
            model_oscillation(&m, &g),
            Err(Error::DenominatorZero { x: 1.0 })
        );
    }

    #[test]
    fn linear_function_has_its_slope() {
        let g = DerivativeGrid::new(-1.0, 3.0, 17).unwrap();
        let line = RationalModel::polynomial(vec![4.0, -2.5]).unwrap();
        assert!((model_oscillation(&line, &g).unwrap() - 2.5).abs() < 1e-15);
    }
}
