use nalgebra::{DMatrix, DVector, Schur};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::lattice::Truncation;
use super::steady::{pump_steady_state, PumpSteadyState};
use crate::error::{Error, Result};
use crate::model::{Grid, ModelParams};

/// Linearized signal dynamics dz = A z dt + dW around a signal-free state,
/// restricted to one Bloch class. The doubled vector is
/// z = (u, v) with u_n = a(k + n·k_pc) and v_n = a*(−k − n·k_pc).
#[derive(Debug, Clone, PartialEq)]
pub struct BlochOperator {
    pub base_k: f64,
    pub truncation: Truncation,
    pub harmonics: Vec<i64>,
    /// Wavenumber of each u component.
    pub wavenumbers: Vec<f64>,
    pub matrix: DMatrix<Complex64>,
    /// Diffusion matrix ⟨dW dW†⟩/dt of the far-field amplitudes.
    pub diffusion: DMatrix<Complex64>,
}

impl BlochOperator {
    pub fn new(
        base_k: f64,
        steady: &PumpSteadyState,
        params: &ModelParams,
        grid: &Grid,
    ) -> Self {
        let lattice = &steady.lattice;
        let truncation = steady.truncation;
        let harmonics = lattice.harmonics(truncation, false);
        let h = harmonics.len();
        let wavenumbers: Vec<f64> = harmonics
            .iter()
            .map(|&n| lattice.wavenumber(grid, base_k, n, truncation))
            .collect();
        let mean = params.delta1.mean();
        let g = if params.parametric { 1.0 } else { 0.0 };
        let i = Complex64::i();
        let noise = &params.noise;
        let mut a = DMatrix::<Complex64>::zeros(2 * h, 2 * h);
        let mut d = DMatrix::<Complex64>::zeros(2 * h, 2 * h);
        for (r, &n) in harmonics.iter().enumerate() {
            let q2 = wavenumbers[r] * wavenumbers[r];
            for (c, &m) in harmonics.iter().enumerate() {
                let dn = lattice.lookup(&lattice.delta1, n - m, truncation);
                let dm = lattice.lookup(&lattice.delta1, m - n, truncation);
                let pump = steady.coefficient(n - m);
                a[(r, c)] = -i * dn;
                a[(h + r, h + c)] = i * dm.conj();
                a[(r, h + c)] = g * pump;
                a[(h + c, r)] = g * pump.conj();
                d[(r, h + c)] = noise.anomalous * pump;
                d[(h + c, r)] = (noise.anomalous * pump).conj();
            }
            a[(r, r)] -= Complex64::new(1.0, mean + 2.0 * q2);
            a[(h + r, h + r)] -= Complex64::new(1.0, -(mean + 2.0 * q2));
            d[(r, r)] = Complex64::new(noise.normal, 0.0);
            d[(h + r, h + r)] = Complex64::new(noise.normal, 0.0);
        }
        BlochOperator {
            base_k,
            truncation,
            harmonics,
            wavenumbers,
            matrix: a,
            diffusion: d,
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn eigenvalues(&self) -> Result<Vec<Complex64>> {
        let schur = Schur::try_new(self.matrix.clone(), f64::EPSILON, 100_000)
            .ok_or_else(|| Error::Numerical("Bloch eigensolve did not converge".into()))?;
        let (_, t) = schur.unpack();
        Ok((0..t.nrows()).map(|j| t[(j, j)]).collect())
    }

    pub fn growth_rate(&self) -> Result<f64> {
        Ok(self
            .eigenvalues()?
            .iter()
            .map(|z| z.re)
            .fold(f64::NEG_INFINITY, f64::max))
    }

    /// Leading eigenvalue with its eigenvector, found by inverse iteration.
    pub fn leading_mode(&self) -> Result<(Complex64, DVector<Complex64>)> {
        let lambda = self
            .eigenvalues()?
            .into_iter()
            .max_by(|a, b| a.re.total_cmp(&b.re))
            .unwrap_or_default();
        let n = self.dim();
        let shift = lambda + Complex64::new(1e-10, 1e-10);
        let m = &self.matrix - DMatrix::<Complex64>::identity(n, n) * shift;
        let lu = m.lu();
        let mut v = DVector::<Complex64>::from_element(n, Complex64::new(1.0, 0.3));
        for _ in 0..4 {
            v = lu
                .solve(&v)
                .ok_or_else(|| Error::Numerical("singular inverse iteration".into()))?;
            let norm = v.norm();
            v /= Complex64::new(norm, 0.0);
        }
        Ok((lambda, v))
    }

    /// Fraction of the leading eigenvector's norm carried by the outermost
    /// retained harmonics.
    pub fn boundary_weight(&self) -> Result<f64> {
        let Truncation::Harmonics(nh) = self.truncation else {
            return Ok(0.0);
        };
        if self.harmonics.len() == 1 {
            return Ok(0.0);
        }
        let (_, v) = self.leading_mode()?;
        let h = self.harmonics.len();
        let edge: f64 = self
            .harmonics
            .iter()
            .enumerate()
            .filter(|(_, &n)| n.unsigned_abs() as usize == nh)
            .map(|(r, _)| v[r].norm_sqr() + v[h + r].norm_sqr())
            .sum();
        Ok(edge.sqrt())
    }
}

/// Largest real part of the Bloch spectrum at `base_k`.
pub fn growth_rate(
    base_k: f64,
    steady: &PumpSteadyState,
    params: &ModelParams,
    grid: &Grid,
) -> Result<f64> {
    BlochOperator::new(base_k, steady, params, grid).growth_rate()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Threshold {
    pub pump: f64,
    /// Bloch wavenumber of the first unstable mode.
    pub wavenumber: f64,
    /// Outermost harmonics carry more than 10⁻⁶ of the critical mode.
    pub truncation_warning: bool,
}

pub const THRESHOLD_SCAN_POINTS: usize = 64;
pub const THRESHOLD_TOLERANCE: f64 = 1e-4;

/// Base wavenumbers scanned for the most unstable mode.
pub fn scan_wavenumbers(steady: &PumpSteadyState, grid: &Grid) -> Vec<f64> {
    let lattice = &steady.lattice;
    match steady.truncation {
        Truncation::Grid => {
            let top = if lattice.is_trivial() {
                grid.max_mode()
            } else {
                lattice.step - 1
            };
            (0..=top).map(|m| grid.wavenumber(m)).collect()
        }
        Truncation::Harmonics(_) => {
            let (span, n) = if lattice.is_trivial() {
                (grid.wavenumber(grid.max_mode()), THRESHOLD_SCAN_POINTS + 1)
            } else {
                (lattice.k_pc, THRESHOLD_SCAN_POINTS)
            };
            let n_div = if lattice.is_trivial() { n - 1 } else { n };
            (0..n).map(|j| span * j as f64 / n_div as f64).collect()
        }
    }
}

/// Maximum growth rate over base wavenumbers and its location.
pub fn max_growth(steady: &PumpSteadyState, params: &ModelParams, grid: &Grid) -> Result<(f64, f64)> {
    let ks = scan_wavenumbers(steady, grid);
    let rate = |k: f64| growth_rate(k, steady, params, grid);
    let mut best = (f64::NEG_INFINITY, 0.0, 0usize);
    for (j, &k) in ks.iter().enumerate() {
        let r = rate(k)?;
        if r > best.0 {
            best = (r, k, j);
        }
    }
    if steady.truncation == Truncation::Grid || ks.len() < 3 {
        return Ok((best.0, best.1));
    }
    let j = best.2;
    let lo = if j == 0 { ks[0] } else { ks[j - 1] };
    let hi = if j + 1 == ks.len() {
        ks[j] + (ks[1] - ks[0])
    } else {
        ks[j + 1]
    };
    let (k, r) = golden_max(lo, hi, rate)?;
    Ok(if r > best.0 { (r, k) } else { (best.0, best.1) })
}

fn golden_max(
    mut a: f64,
    mut b: f64,
    mut f: impl FnMut(f64) -> Result<f64>,
) -> Result<(f64, f64)> {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c)?, f(d)?);
    while (b - a).abs() > 1e-9 * (1.0 + a.abs()) {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d)?;
        }
    }
    Ok(if fc > fd { (c, fc) } else { (d, fd) })
}

/// Pump amplitude at which the signal-free state first becomes unstable,
/// by bisection on E ∈ [0, 2].
pub fn find_threshold(params: &ModelParams, grid: &Grid, truncation: Truncation) -> Result<Threshold> {
    crate::model::critical_wavenumber(params.delta1.mean())?;
    let unit = pump_steady_state(&params.with_pump(1.0), grid, truncation)?;
    let at = |e: f64| -> Result<(f64, f64, PumpSteadyState)> {
        let ss = unit.scaled(e);
        let (r, k) = max_growth(&ss, params, grid)?;
        Ok((r, k, ss))
    };
    let (mut lo, mut hi) = (0.0, 2.0);
    let (r_hi, mut k_hi, mut ss_hi) = at(hi)?;
    if r_hi <= 0.0 {
        return Err(Error::NoThreshold(hi));
    }
    while hi - lo > 0.01 * THRESHOLD_TOLERANCE {
        let mid = 0.5 * (lo + hi);
        let (r, k, ss) = at(mid)?;
        if r > 0.0 {
            hi = mid;
            k_hi = k;
            ss_hi = ss;
        } else {
            lo = mid;
        }
    }
    let op = BlochOperator::new(k_hi, &ss_hi, params, grid);
    Ok(Threshold {
        pump: 0.5 * (lo + hi),
        wavenumber: k_hi,
        truncation_warning: op.boundary_weight()? > 1e-6,
    })
}
