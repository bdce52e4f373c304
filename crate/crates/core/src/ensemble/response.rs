use nalgebra::Matrix4;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dynamics::{Integrator, IntegratorSettings};
use crate::error::Result;
use crate::model::{FieldState, Grid, ModelParams};
use crate::stats::PairProjector;

/// Displacement used for the central differences, in quadrature units.
const PROBE: f64 = 1e-3;

/// Commutator kernel of the pair quadratures x = (X₊, Y₊, X₋, Y₋) at lags
/// d·stride·dt for d = 0..lags: K_d = 2 R_d, where R_d is the response of x
/// to a small displacement of x about `reference`. The response comes from
/// central differences of the noise-free integrator, so it is the linear
/// propagator of the discretized dynamics about a deterministic state.
pub fn pair_response_kernel(
    reference: &FieldState,
    params: &ModelParams,
    grid: &Grid,
    settings: IntegratorSettings,
    mode: i64,
    stride: usize,
    lags: usize,
) -> Result<Vec<Matrix4<f64>>> {
    let mut quiet = params.clone();
    quiet.noise.enabled = false;
    let projector = PairProjector::new(grid, params, mode);
    let k = grid.wavenumber(mode);
    let unit = (params.noise.epsilon / grid.length()).sqrt();
    let plane: Vec<Complex64> = (0..grid.n_points())
        .map(|j| Complex64::from_polar(unit, k * grid.x(j)))
        .collect();
    let mut kernel = vec![Matrix4::identity() * 2.0; lags.max(1)];
    // The noise-free integrator never draws from this stream.
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    for j in 0..4 {
        let delta = match j {
            0 => Complex64::new(0.5 * PROBE, 0.0),
            1 => Complex64::new(0.0, 0.5 * PROBE),
            2 => Complex64::new(0.5 * PROBE, 0.0),
            _ => Complex64::new(0.0, 0.5 * PROBE),
        };
        let mut tracks = Vec::with_capacity(2);
        for sign in [1.0, -1.0] {
            let mut state = reference.clone();
            for (z, p) in state.alpha1.iter_mut().zip(&plane) {
                // a(k) multiplies e^{ikx}, a(−k) multiplies e^{−ikx}
                *z += if j < 2 { p * delta * sign } else { p.conj() * delta * sign };
            }
            let mut integrator = Integrator::new(&quiet, grid, settings)?;
            let mut xs = Vec::with_capacity(lags);
            for _ in 1..lags {
                integrator.advance(&mut state, stride, &mut rng)?;
                let (p, m) = projector.project(&state.alpha1);
                xs.push([2.0 * p.re, 2.0 * p.im, 2.0 * m.re, 2.0 * m.im]);
            }
            tracks.push(xs);
        }
        for d in 1..lags {
            for i in 0..4 {
                kernel[d][(i, j)] = (tracks[0][d - 1][i] - tracks[1][d - 1][i]) / PROBE;
            }
        }
    }
    Ok(kernel)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linear::{pump_steady_state, Truncation};
    use crate::model::{critical_wavenumber, Preset};

    // Oracle: T e^{As} T† from the matrix exponential of the exact
    // semi-discrete linearization about the signal-free state.
    #[test]
    fn matches_linearized_propagator() {
        let grid = Grid::with_periods(64, critical_wavenumber(-1.0).unwrap(), 8).unwrap();
        let p = Preset::PcPump.params(0.8);
        let ss = pump_steady_state(&p, &grid, Truncation::Grid).unwrap();
        let mut reference = FieldState::zeros(&grid);
        reference.alpha0 = ss.alpha0_ss.clone();
        let mode = grid.nearest_mode(critical_wavenumber(-1.0).unwrap());
        let settings = IntegratorSettings::with_dt(0.01);
        let kernel = pair_response_kernel(&reference, &p, &grid, settings, mode, 50, 4).unwrap();
        assert_eq!(kernel[0], Matrix4::identity() * 2.0);

        // Same kernel from the Bloch drift of the ±k class.
        let k = grid.wavenumber(mode);
        let op = crate::linear::BlochOperator::new(k, &ss, &p, &grid);
        let n = op.wavenumbers.len();
        let find = |q: f64| op.wavenumbers.iter().position(|&w| (w - q).abs() < 1e-9).unwrap();
        let (ip, im) = (find(k), find(-k));
        let i = Complex64::i();
        let one = Complex64::new(1.0, 0.0);
        // rows: X₊, Y₊, X₋, Y₋ in terms of (u, v) = (a(q), a*(−q))
        let mut t = nalgebra::DMatrix::<Complex64>::zeros(4, 2 * n);
        for (row, a, ac) in [(0, ip, n + im), (2, im, n + ip)] {
            t[(row, a)] = one;
            t[(row, ac)] = one;
            t[(row + 1, a)] = -i;
            t[(row + 1, ac)] = i;
        }
        for (d, kd) in kernel.iter().enumerate().skip(1) {
            let s = 0.5 * d as f64;
            let prop = (op.matrix.clone() * Complex64::new(s, 0.0)).exp();
            let exact = &t * prop * t.adjoint();
            for r in 0..4 {
                for c in 0..4 {
                    assert!((kd[(r, c)] - exact[(r, c)].re).abs() < 1e-5, "{d} {r} {c}: {} {}", kd[(r, c)], exact[(r, c)]);
                    assert!(exact[(r, c)].im.abs() < 1e-12);
                }
            }
        }
    }
}
