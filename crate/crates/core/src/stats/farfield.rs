use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fft::FftPair;
use crate::model::{FieldState, Grid, ModelParams};

/// Far-field signal amplitudes a_k = (dx/√(Lε)) Σ_j α1(x_j) e^{−ik x_j},
/// normalized so that the vacuum has ⟨a a†⟩ = 1 in the Q representation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FarFieldModes {
    /// Signed mode indices in ascending order.
    pub modes: Vec<i64>,
    pub wavenumbers: Vec<f64>,
    pub amplitudes: Vec<Complex64>,
}

impl FarFieldModes {
    pub fn at_mode(&self, m: i64) -> Option<Complex64> {
        let first = *self.modes.first()?;
        self.amplitudes.get((m - first) as usize).copied()
    }

    /// |a_k|² in ascending k.
    pub fn intensities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|z| z.norm_sqr()).collect()
    }
}

/// Normalization factor dx/√(Lε).
pub fn far_field_scale(grid: &Grid, params: &ModelParams) -> f64 {
    grid.dx() / (grid.length() * params.noise.epsilon).sqrt()
}

pub fn far_field(state: &FieldState, params: &ModelParams, grid: &Grid) -> Result<FarFieldModes> {
    state.check_grid(grid)?;
    if !state.is_finite() {
        return Err(Error::NonFinite(state.time));
    }
    let mut data = state.alpha1.clone();
    FftPair::new(grid.n_points()).forward(&mut data);
    let scale = far_field_scale(grid, params);
    let modes: Vec<i64> = grid.modes().collect();
    Ok(FarFieldModes {
        wavenumbers: modes.iter().map(|&m| grid.wavenumber(m)).collect(),
        amplitudes: modes.iter().map(|&m| data[grid.mode_bin(m)] * scale).collect(),
        modes,
    })
}

/// Single far-field amplitude by direct summation.
pub fn mode_amplitude(alpha1: &[Complex64], grid: &Grid, mode: i64, scale: f64) -> Complex64 {
    let k = grid.wavenumber(mode);
    let step = Complex64::from_polar(1.0, -k * grid.dx());
    let mut w = Complex64::new(1.0, 0.0);
    let mut acc = Complex64::new(0.0, 0.0);
    for z in alpha1 {
        acc += z * w;
        w *= step;
    }
    acc * scale
}

/// Precomputed twiddles for the pair (a(k), a(−k)).
#[derive(Debug, Clone)]
pub struct PairProjector {
    pub mode: i64,
    twiddle: Vec<Complex64>,
    scale: f64,
}

impl PairProjector {
    pub fn new(grid: &Grid, params: &ModelParams, mode: i64) -> Self {
        let k = grid.wavenumber(mode);
        PairProjector {
            mode,
            twiddle: (0..grid.n_points())
                .map(|j| Complex64::from_polar(1.0, -k * grid.x(j)))
                .collect(),
            scale: far_field_scale(grid, params),
        }
    }

    /// (a(k), a(−k))
    pub fn project(&self, alpha1: &[Complex64]) -> (Complex64, Complex64) {
        let mut p = Complex64::new(0.0, 0.0);
        let mut m = Complex64::new(0.0, 0.0);
        for (z, w) in alpha1.iter().zip(&self.twiddle) {
            p += z * w;
            m += z * w.conj();
        }
        (p * self.scale, m * self.scale)
    }
}

/// Position of a stripe pattern built from a(±k), modulo half its period:
/// for α1 ∝ cos(k(x − δ)), arg(a(−k) a*(k)) = 2kδ.
pub fn pattern_position(a_plus: Complex64, a_minus: Complex64, k: f64) -> f64 {
    (a_minus * a_plus.conj()).arg() / (2.0 * k)
}
