use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::Grid;
use crate::error::{Error, Result};

/// Pump and signal envelopes sampled on the grid at time `time`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldState {
    pub alpha0: Vec<Complex64>,
    pub alpha1: Vec<Complex64>,
    pub time: f64,
}

impl FieldState {
    pub fn zeros(grid: &Grid) -> Self {
        let n = grid.n_points();
        FieldState {
            alpha0: vec![Complex64::new(0.0, 0.0); n],
            alpha1: vec![Complex64::new(0.0, 0.0); n],
            time: 0.0,
        }
    }

    pub fn uniform(grid: &Grid, alpha0: Complex64, alpha1: Complex64) -> Self {
        let n = grid.n_points();
        FieldState {
            alpha0: vec![alpha0; n],
            alpha1: vec![alpha1; n],
            time: 0.0,
        }
    }

    pub fn len(&self) -> usize {
        self.alpha0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alpha0.is_empty()
    }

    pub fn check_grid(&self, grid: &Grid) -> Result<()> {
        if self.alpha0.len() != grid.n_points() || self.alpha1.len() != grid.n_points() {
            return Err(Error::InvalidParameter(format!(
                "field arrays of length {}/{} on a grid of {} points",
                self.alpha0.len(),
                self.alpha1.len(),
                grid.n_points()
            )));
        }
        Ok(())
    }

    pub fn is_finite(&self) -> bool {
        self.alpha0
            .iter()
            .chain(&self.alpha1)
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn max_pump_abs(&self) -> f64 {
        self.alpha0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest modulus over both fields.
    pub fn max_abs(&self) -> f64 {
        self.alpha0
            .iter()
            .chain(&self.alpha1)
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }
}
