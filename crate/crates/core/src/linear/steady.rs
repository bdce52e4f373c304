use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::lattice::{Lattice, Truncation};
use crate::error::{Error, Result};
use crate::model::{Grid, ModelParams};

/// Pump profile of the trivial (signal-free) stationary state.
#[derive(Debug, Clone, PartialEq)]
pub struct PumpSteadyState {
    pub alpha0_ss: Vec<Complex64>,
    /// Amplitudes at harmonics n·k_pc as `(n, c_n)`.
    pub harmonic_coefficients: Vec<(i64, Complex64)>,
    /// Largest defect of the steady-state equation over the retained
    /// harmonics and the first harmonics beyond the cut.
    pub residual: f64,
    pub truncation: Truncation,
    pub lattice: Lattice,
}

impl PumpSteadyState {
    pub fn coefficient(&self, n: i64) -> Complex64 {
        self.lattice
            .lookup(&self.harmonic_coefficients, n, self.truncation)
    }

    /// The steady state is linear in E; rescale instead of re-solving.
    pub fn scaled(&self, factor: f64) -> Self {
        PumpSteadyState {
            alpha0_ss: self.alpha0_ss.iter().map(|z| z * factor).collect(),
            harmonic_coefficients: self
                .harmonic_coefficients
                .iter()
                .map(|&(n, c)| (n, c * factor))
                .collect(),
            residual: self.residual * factor,
            truncation: self.truncation,
            lattice: self.lattice.clone(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.alpha0_ss.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

/// Solve (1 + iΔ0(x))α0 − i∂xx α0 = E in the harmonic basis of the
/// modulation lattice.
pub fn pump_steady_state(
    params: &ModelParams,
    grid: &Grid,
    truncation: Truncation,
) -> Result<PumpSteadyState> {
    if params.pump < 0.0 {
        return Err(Error::InvalidParameter(format!("negative pump {}", params.pump)));
    }
    let lattice = Lattice::new(params, grid)?;
    let ns = lattice.harmonics(truncation, true);
    let dim = ns.len();
    let mean = params.delta0.mean();
    let i = Complex64::i();
    let diag = |n: i64| {
        let q = lattice.wavenumber(grid, 0.0, n, truncation);
        Complex64::new(1.0, mean + q * q)
    };
    let coupling = |n: i64, m: i64| i * lattice.lookup(&lattice.delta0, n - m, truncation);
    let mut a = DMatrix::<Complex64>::zeros(dim, dim);
    for (r, &n) in ns.iter().enumerate() {
        for (c, &m) in ns.iter().enumerate() {
            a[(r, c)] = coupling(n, m);
        }
        a[(r, r)] += diag(n);
    }
    let mut rhs = DVector::<Complex64>::zeros(dim);
    let centre = ns.iter().position(|&n| n == 0).expect("zero harmonic present");
    rhs[centre] = Complex64::new(params.pump, 0.0);
    let lu = a.clone().lu();
    let sol = lu.solve(&rhs).ok_or_else(|| {
        Error::Numerical(format!(
            "singular pump steady-state system (condition estimate {:.3e})",
            condition_estimate(&a)
        ))
    })?;
    let coeffs: Vec<(i64, Complex64)> = ns.iter().copied().zip(sol.iter().copied()).collect();

    // Defect over the retained harmonics plus the spill just beyond the cut.
    let mut probe = ns.clone();
    if let Truncation::Harmonics(_) = truncation {
        let reach = lattice.delta0.iter().map(|(n, _)| n.abs()).max().unwrap_or(0);
        let edge = *ns.last().unwrap_or(&0);
        for n in edge + 1..=edge + reach {
            probe.push(n);
            probe.push(-n);
        }
    }
    let residual = probe
        .iter()
        .map(|&n| {
            let mut v: Complex64 = coeffs.iter().map(|&(m, c)| coupling(n, m) * c).sum();
            if let Some(&(_, c)) = coeffs.iter().find(|(m, _)| *m == n) {
                v += diag(n) * c;
            }
            if n == 0 {
                v -= params.pump;
            }
            v.norm()
        })
        .fold(0.0, f64::max);

    let alpha0_ss = (0..grid.n_points())
        .map(|j| {
            let x = grid.x(j);
            coeffs
                .iter()
                .map(|&(n, c)| c * Complex64::from_polar(1.0, n as f64 * lattice.k_pc * x))
                .sum()
        })
        .collect();
    Ok(PumpSteadyState {
        alpha0_ss,
        harmonic_coefficients: coeffs,
        residual,
        truncation,
        lattice,
    })
}

fn condition_estimate(a: &DMatrix<Complex64>) -> f64 {
    let s = a.clone().svd(false, false).singular_values;
    let max = s.iter().copied().fold(0.0, f64::max);
    let min = s.iter().copied().fold(f64::INFINITY, f64::min);
    max / min
}
