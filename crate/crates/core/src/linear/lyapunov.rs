use nalgebra::{DMatrix, Schur};
use num_complex::Complex64;

use crate::error::{Error, Result};

type CMat = DMatrix<Complex64>;

/// Solve A X + X A† + D = 0 by the Bartels–Stewart method on the complex
/// Schur form of A.
pub fn solve_lyapunov(a: &CMat, d: &CMat) -> Result<CMat> {
    let n = a.nrows();
    let schur = Schur::try_new(a.clone(), f64::EPSILON, 100_000)
        .ok_or_else(|| Error::Numerical("Schur decomposition did not converge".into()))?;
    let (q, t) = schur.unpack();
    let max_re = (0..n).map(|j| t[(j, j)].re).fold(f64::NEG_INFINITY, f64::max);
    if max_re >= 0.0 {
        return Err(Error::NotHurwitz(max_re));
    }
    // T Y + Y T† = F with F = −Q† D Q, solved column by column from the right.
    let f = -(q.adjoint() * d * &q);
    let mut y = CMat::zeros(n, n);
    for j in (0..n).rev() {
        let mut rhs = f.column(j).into_owned();
        for l in j + 1..n {
            let c = t[(j, l)].conj();
            for i in 0..n {
                rhs[i] -= c * y[(i, l)];
            }
        }
        let shift = t[(j, j)].conj();
        for i in (0..n).rev() {
            let mut s = rhs[i];
            for l in i + 1..n {
                s -= t[(i, l)] * y[(l, j)];
            }
            y[(i, j)] = s / (t[(i, i)] + shift);
        }
    }
    let x = &q * y * q.adjoint();
    Ok((&x + x.adjoint()) * Complex64::new(0.5, 0.0))
}

/// S(ω) = (A + iω)⁻¹ D (A† − iω)⁻¹.
pub fn spectral_matrix(a: &CMat, d: &CMat, omega: f64) -> Result<CMat> {
    let m = resolvent(a, omega)?;
    Ok(&m * d * m.adjoint())
}

/// (A + iω)⁻¹
pub fn resolvent(a: &CMat, omega: f64) -> Result<CMat> {
    let n = a.nrows();
    (a + CMat::identity(n, n) * Complex64::new(0.0, omega))
        .try_inverse()
        .ok_or_else(|| Error::Numerical(format!("A + iω singular at ω = {omega}")))
}
