use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::model::{Grid, ModelParams};

/// How the coupled-harmonic expansion is cut off.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Truncation {
    /// Continuum harmonics n·k_pc with |n| ≤ N_h for the signal and
    /// |n| ≤ 2N_h for the pump.
    Harmonics(usize),
    /// Every grid harmonic of k_pc, with the cyclic wrap-around of the
    /// discrete Fourier transform. This is the exact linearization of the
    /// spatially discretized equations.
    Grid,
}

pub const DEFAULT_TRUNCATION: Truncation = Truncation::Harmonics(8);

/// Reciprocal lattice generated by the detuning modulations: the Fourier
/// content of Δ0 − Δ̄0 and Δ1 − Δ̄1 in units of the lattice wavenumber.
#[derive(Debug, Clone, PartialEq)]
pub struct Lattice {
    /// Grid-mode step of the lattice; zero when nothing is modulated.
    pub step: i64,
    pub k_pc: f64,
    pub delta0: Vec<(i64, Complex64)>,
    pub delta1: Vec<(i64, Complex64)>,
    n_points: i64,
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

impl Lattice {
    pub fn new(params: &ModelParams, grid: &Grid) -> Result<Self> {
        let h0 = params.delta0.harmonics(grid)?;
        let h1 = params.delta1.harmonics(grid)?;
        let step = h0.iter().chain(&h1).fold(0, |g, (m, _)| gcd(g, *m));
        let scale = |h: Vec<(i64, Complex64)>| h.into_iter().map(|(m, c)| (m / step, c)).collect();
        Ok(Lattice {
            step,
            k_pc: step as f64 * grid.k_unit(),
            delta0: if step == 0 { Vec::new() } else { scale(h0) },
            delta1: if step == 0 { Vec::new() } else { scale(h1) },
            n_points: grid.n_points() as i64,
        })
    }

    pub fn is_trivial(&self) -> bool {
        self.step == 0
    }

    /// Number of distinct lattice harmonics on the grid.
    pub fn grid_period(&self) -> usize {
        if self.step == 0 {
            1
        } else {
            (self.n_points / self.step) as usize
        }
    }

    /// Harmonic numbers of the signal (or, with `pump`, the pump) basis.
    pub fn harmonics(&self, truncation: Truncation, pump: bool) -> Vec<i64> {
        match truncation {
            _ if self.is_trivial() => vec![0],
            Truncation::Harmonics(nh) => {
                let n = if pump { 2 * nh } else { nh } as i64;
                (-n..=n).collect()
            }
            Truncation::Grid => (0..self.grid_period() as i64).collect(),
        }
    }

    /// Coefficient of harmonic `h` in a list, folded cyclically for the
    /// grid truncation.
    pub fn lookup(&self, list: &[(i64, Complex64)], h: i64, truncation: Truncation) -> Complex64 {
        match truncation {
            Truncation::Grid => {
                let p = self.grid_period() as i64;
                list.iter()
                    .filter(|(n, _)| (n - h).rem_euclid(p) == 0)
                    .map(|(_, c)| *c)
                    .sum()
            }
            Truncation::Harmonics(_) => list
                .iter()
                .filter(|(n, _)| *n == h)
                .map(|(_, c)| *c)
                .sum(),
        }
    }

    /// Wavenumber of harmonic `n` above `base_k`. Under the grid truncation
    /// the result is folded back into the grid's wavenumber range.
    pub fn wavenumber(&self, grid: &Grid, base_k: f64, n: i64, truncation: Truncation) -> f64 {
        match truncation {
            Truncation::Harmonics(_) => base_k + n as f64 * self.k_pc,
            Truncation::Grid => {
                let m = grid.nearest_mode(base_k) + n * self.step;
                grid.wavenumber(grid.bin_mode(grid.mode_bin(m)))
            }
        }
    }
}
