use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::bloch::BlochOperator;
use super::lyapunov::{resolvent, solve_lyapunov, spectral_matrix};
use super::steady::PumpSteadyState;
use crate::error::{Error, Result};
use crate::model::{Grid, ModelParams};
use crate::stats::QuadratureCovariance;

type CMat = DMatrix<Complex64>;

/// Stationary second moments of one Bloch class, antinormally ordered
/// (Q representation), in far-field units where the vacuum gives
/// ⟨a a†⟩ = 1.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceSolution {
    pub base_k: f64,
    /// Wavenumber of each u component; v_n is the conjugate amplitude at
    /// −wavenumbers[n].
    pub wavenumbers: Vec<f64>,
    /// ⟨z z†⟩ for z = (u, v).
    pub second_moments: CMat,
    /// Spectral matrices S(ω) at the requested frequencies.
    pub spectra: Vec<(f64, CMat)>,
    pub drift: CMat,
    pub diffusion: CMat,
}

fn same_k(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * (1.0 + a.abs())
}

impl CovarianceSolution {
    fn u_index(&self, k: f64) -> Option<usize> {
        self.wavenumbers.iter().position(|&q| same_k(q, k))
    }

    fn v_index(&self, k: f64) -> Option<usize> {
        self.u_index(-k).map(|i| i + self.wavenumbers.len())
    }

    /// Normally ordered moments ⟨z z†⟩ − 1.
    pub fn normal_moments(&self) -> CMat {
        let n = self.second_moments.nrows();
        &self.second_moments - CMat::identity(n, n)
    }

    /// Normally and time-ordered spectrum: the antinormal spectrum minus the
    /// commutator response −(A + iω)⁻¹ − h.c.
    pub fn normal_spectrum(&self, omega: f64) -> Result<CMat> {
        let m = resolvent(&self.drift, omega)?;
        Ok(spectral_matrix(&self.drift, &self.diffusion, omega)? + &m + m.adjoint())
    }

    /// ⟨a†(k) a(k)⟩, normally ordered, for a mode of this class.
    pub fn intensity(&self, k: f64) -> Option<f64> {
        self.u_index(k).map(|i| self.second_moments[(i, i)].re - 1.0)
    }

    /// (k, ⟨a†(k)a(k)⟩) for every mode of the class.
    pub fn intensities(&self) -> Vec<(f64, f64)> {
        self.wavenumbers
            .iter()
            .enumerate()
            .map(|(i, &k)| (k, self.second_moments[(i, i)].re - 1.0))
            .collect()
    }

    /// ⟨a(k) a(k)⟩; zero unless 2k lies on the modulation lattice.
    pub fn anomalous(&self, k: f64) -> Complex64 {
        match (self.u_index(k), self.v_index(k)) {
            (Some(i), Some(j)) => self.second_moments[(i, j)],
            _ => Complex64::new(0.0, 0.0),
        }
    }

    /// ⟨a(k) a(−k)⟩
    pub fn pair_anomalous(&self, k: f64) -> Complex64 {
        match (self.u_index(k), self.v_index(-k)) {
            (Some(i), Some(j)) => self.second_moments[(i, j)],
            _ => Complex64::new(0.0, 0.0),
        }
    }
}

/// Solve the stationary Lyapunov equation of the Bloch class of `base_k`
/// and evaluate its spectral matrix at each of `omegas`.
pub fn stationary_covariance(
    base_k: f64,
    steady: &PumpSteadyState,
    params: &ModelParams,
    grid: &Grid,
    omegas: &[f64],
) -> Result<CovarianceSolution> {
    let op = BlochOperator::new(base_k, steady, params, grid);
    let second_moments = solve_lyapunov(&op.matrix, &op.diffusion)?;
    let spectra = omegas
        .iter()
        .map(|&w| Ok((w, spectral_matrix(&op.matrix, &op.diffusion, w)?)))
        .collect::<Result<_>>()?;
    Ok(CovarianceSolution {
        base_k: op.base_k,
        wavenumbers: op.wavenumbers,
        second_moments,
        spectra,
        drift: op.matrix,
        diffusion: op.diffusion,
    })
}

/// Normally ordered intensity ⟨a†(k)a(k)⟩ at every wavenumber of the grid,
/// in ascending k.
pub fn intensity_spectrum(
    steady: &PumpSteadyState,
    params: &ModelParams,
    grid: &Grid,
) -> Result<Vec<(f64, f64)>> {
    let mut out = Vec::with_capacity(grid.n_points());
    for m in grid.modes() {
        let k = grid.wavenumber(m);
        let sol = stationary_covariance(k, steady, params, grid, &[])?;
        let i = sol.intensity(k).ok_or_else(|| Error::Numerical(format!("mode {k} missing")))?;
        out.push((k, i));
    }
    Ok(out)
}

/// Linear-theory statistics of the far-field pair (a(k), a(−k)).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairCovariance {
    pub k: f64,
    /// ⟨a†a⟩ at +k and −k, normally ordered.
    pub intensity: [f64; 2],
    /// ⟨a(k)²⟩
    pub anomalous: Complex64,
    /// ⟨a(k)a(−k)⟩
    pub pair_anomalous: Complex64,
    /// Equal-time intracavity quadrature covariance.
    pub equal_time: QuadratureCovariance,
    /// Zero-frequency output-field spectral covariance.
    pub zero_frequency: QuadratureCovariance,
}

/// Blocks holding a(±k) and the linear map z ↦ (X₊, Y₊, X₋, Y₋).
struct PairMap {
    drift: CMat,
    diffusion: CMat,
    map: CMat,
    /// Stacked indices of a(k), a*(k), a(−k), a*(−k).
    index: [usize; 4],
}

fn pair_map(k: f64, steady: &PumpSteadyState, params: &ModelParams, grid: &Grid) -> Result<PairMap> {
    let first = BlochOperator::new(k, steady, params, grid);
    let mut blocks = vec![first];
    if !blocks[0].wavenumbers.iter().any(|&q| same_k(q, -k)) {
        blocks.push(BlochOperator::new(-k, steady, params, grid));
    }
    let total: usize = blocks.iter().map(|b| b.dim()).sum();
    let mut drift = CMat::zeros(total, total);
    let mut diffusion = CMat::zeros(total, total);
    let mut offset = 0;
    for b in &blocks {
        let n = b.dim();
        drift.view_mut((offset, offset), (n, n)).copy_from(&b.matrix);
        diffusion.view_mut((offset, offset), (n, n)).copy_from(&b.diffusion);
        offset += n;
    }
    // Index of a(q) (conjugate = false) or a*(q) in the stacked vector.
    let find = |q: f64, conjugate: bool| -> Result<usize> {
        let mut offset = 0;
        for b in &blocks {
            let h = b.wavenumbers.len();
            let target = if conjugate { -q } else { q };
            if let Some(i) = b.wavenumbers.iter().position(|&w| same_k(w, target)) {
                return Ok(offset + i + if conjugate { h } else { 0 });
            }
            offset += b.dim();
        }
        Err(Error::Numerical(format!("mode {q} not represented")))
    };
    let index = [find(k, false)?, find(k, true)?, find(-k, false)?, find(-k, true)?];
    let i = Complex64::i();
    let mut map = CMat::zeros(4, total);
    for (row, a, ac) in [(0, index[0], index[1]), (2, index[2], index[3])] {
        map[(row, a)] += Complex64::new(1.0, 0.0);
        map[(row, ac)] += Complex64::new(1.0, 0.0);
        map[(row + 1, a)] += -i;
        map[(row + 1, ac)] += i;
    }
    Ok(PairMap {
        drift,
        diffusion,
        map,
        index,
    })
}

fn real4(m: &CMat) -> QuadratureCovariance {
    let mut out = [[0.0; 4]; 4];
    for (r, row) in out.iter_mut().enumerate() {
        for (c, v) in row.iter_mut().enumerate() {
            *v = 0.5 * (m[(r, c)].re + m[(c, r)].re);
        }
    }
    QuadratureCovariance::from_rows(out)
}

pub fn pair_covariance(
    k: f64,
    steady: &PumpSteadyState,
    params: &ModelParams,
    grid: &Grid,
) -> Result<PairCovariance> {
    let pm = pair_map(k, steady, params, grid)?;
    let sigma = solve_lyapunov(&pm.drift, &pm.diffusion)?;
    let t = &pm.map;
    let q_cov = real4(&(t * &sigma * t.adjoint()));
    let m = resolvent(&pm.drift, 0.0)?;
    let s_n = spectral_matrix(&pm.drift, &pm.diffusion, 0.0)? + &m + m.adjoint();
    let out = real4(&(t * s_n * t.adjoint()));
    let [p, pc, m_, mc] = pm.index;
    Ok(PairCovariance {
        k,
        intensity: [sigma[(p, p)].re - 1.0, sigma[(m_, m_)].re - 1.0],
        anomalous: sigma[(p, pc)],
        pair_anomalous: sigma[(p, mc)],
        equal_time: q_cov.minus_identity(),
        zero_frequency: out.scaled(2.0).plus_identity(),
    })
}

/// Output-field quadrature spectral covariance of the pair at frequency ω.
pub fn output_spectrum(
    k: f64,
    omega: f64,
    steady: &PumpSteadyState,
    params: &ModelParams,
    grid: &Grid,
) -> Result<QuadratureCovariance> {
    let pm = pair_map(k, steady, params, grid)?;
    let m = resolvent(&pm.drift, omega)?;
    let s_n = spectral_matrix(&pm.drift, &pm.diffusion, omega)? + &m + m.adjoint();
    Ok(real4(&(&pm.map * s_n * pm.map.adjoint())).scaled(2.0).plus_identity())
}
