use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Periodic one-dimensional transverse domain.
///
/// Collocation points sit at `x_j = j·dx`, `j = 0..n`. Wavenumbers are
/// `k_m = 2πm/L` for `m ∈ [−n/2, n/2)`; the signed index `m` is the
/// canonical handle for a far-field mode throughout the crate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GridSpec", into = "GridSpec")]
pub struct Grid {
    n_points: usize,
    length: f64,
    dx: f64,
    k_unit: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
struct GridSpec {
    n: usize,
    length: f64,
}

impl TryFrom<GridSpec> for Grid {
    type Error = Error;
    fn try_from(s: GridSpec) -> Result<Self> {
        Grid::new(s.n, s.length)
    }
}

impl From<Grid> for GridSpec {
    fn from(g: Grid) -> Self {
        GridSpec {
            n: g.n_points,
            length: g.length,
        }
    }
}

impl Grid {
    pub fn new(n_points: usize, length: f64) -> Result<Self> {
        if n_points < 8 || !n_points.is_multiple_of(2) {
            return Err(Error::InvalidGrid(format!(
                "n_points must be even and at least 8, got {n_points}"
            )));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "length must be positive, got {length}"
            )));
        }
        Ok(Grid {
            n_points,
            length,
            dx: length / n_points as f64,
            k_unit: 2.0 * PI / length,
        })
    }

    /// Grid holding `periods` wavelengths of `k` exactly.
    pub fn with_periods(n_points: usize, k: f64, periods: usize) -> Result<Self> {
        if !(k > 0.0) || periods == 0 {
            return Err(Error::InvalidGrid(format!(
                "cannot fit {periods} periods of wavenumber {k}"
            )));
        }
        Grid::new(n_points, periods as f64 * 2.0 * PI / k)
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    /// Wavenumber spacing 2π/L.
    pub fn k_unit(&self) -> f64 {
        self.k_unit
    }

    pub fn x(&self, j: usize) -> f64 {
        j as f64 * self.dx
    }

    pub fn positions(&self) -> Vec<f64> {
        (0..self.n_points).map(|j| self.x(j)).collect()
    }

    pub fn min_mode(&self) -> i64 {
        -(self.n_points as i64 / 2)
    }

    pub fn max_mode(&self) -> i64 {
        self.n_points as i64 / 2 - 1
    }

    /// Signed mode indices in ascending wavenumber order.
    pub fn modes(&self) -> impl Iterator<Item = i64> {
        self.min_mode()..=self.max_mode()
    }

    /// Ascending list of represented wavenumbers.
    pub fn wavenumbers(&self) -> Vec<f64> {
        self.modes().map(|m| self.wavenumber(m)).collect()
    }

    pub fn wavenumber(&self, mode: i64) -> f64 {
        mode as f64 * self.k_unit
    }

    /// Wavenumber of FFT bin `bin` (standard FFT ordering).
    pub fn bin_wavenumber(&self, bin: usize) -> f64 {
        self.wavenumber(self.bin_mode(bin))
    }

    pub fn bin_mode(&self, bin: usize) -> i64 {
        let n = self.n_points as i64;
        let b = bin as i64;
        if b >= n / 2 {
            b - n
        } else {
            b
        }
    }

    /// FFT bin holding signed mode `mode`; wraps aliases onto the grid.
    pub fn mode_bin(&self, mode: i64) -> usize {
        mode.rem_euclid(self.n_points as i64) as usize
    }

    pub fn contains_mode(&self, mode: i64) -> bool {
        mode >= self.min_mode() && mode <= self.max_mode()
    }

    /// Signed mode index of `k` if it lies on the wavenumber lattice.
    pub fn commensurate_mode(&self, k: f64) -> Option<i64> {
        let ratio = k / self.k_unit;
        let m = ratio.round();
        if (ratio - m).abs() <= 1e-9 * ratio.abs().max(1.0) {
            Some(m as i64)
        } else {
            None
        }
    }

    /// Nearest signed mode index to `k`.
    pub fn nearest_mode(&self, k: f64) -> i64 {
        (k / self.k_unit).round() as i64
    }

    /// Spectral multiplier −k² (the Laplacian symbol) in FFT order.
    pub fn laplacian_symbol(&self) -> Vec<f64> {
        (0..self.n_points)
            .map(|b| {
                let k = self.bin_wavenumber(b);
                -k * k
            })
            .collect()
    }
}
