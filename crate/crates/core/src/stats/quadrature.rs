use std::f64::consts::PI;

use nalgebra::Matrix4;
use serde::{Deserialize, Serialize};

use super::moments::jackknife_error;
use crate::error::{Error, Result};

/// Symmetrized covariance of x = (X₊, Y₊, X₋, Y₋), the amplitude and phase
/// quadratures X = a + a†, Y = −i(a − a†) of the far-field pair
/// (a(k), a(−k)). In these units the vacuum is the identity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureCovariance {
    pub rows: [[f64; 4]; 4],
}

impl QuadratureCovariance {
    pub fn from_rows(rows: [[f64; 4]; 4]) -> Self {
        QuadratureCovariance { rows }
    }

    pub fn vacuum() -> Self {
        Self::from_matrix(&Matrix4::identity())
    }

    pub fn from_matrix(m: &Matrix4<f64>) -> Self {
        let mut rows = [[0.0; 4]; 4];
        for (r, row) in rows.iter_mut().enumerate() {
            for (c, v) in row.iter_mut().enumerate() {
                *v = m[(r, c)];
            }
        }
        QuadratureCovariance { rows }
    }

    pub fn matrix(&self) -> Matrix4<f64> {
        Matrix4::from_fn(|r, c| self.rows[r][c])
    }

    pub fn scaled(&self, f: f64) -> Self {
        Self::from_matrix(&(self.matrix() * f))
    }

    pub fn plus_identity(&self) -> Self {
        Self::from_matrix(&(self.matrix() + Matrix4::identity()))
    }

    pub fn minus_identity(&self) -> Self {
        Self::from_matrix(&(self.matrix() - Matrix4::identity()))
    }

    /// Exchange the roles of +k and −k.
    pub fn swapped(&self) -> Self {
        let p = [2, 3, 0, 1];
        Self::from_matrix(&Matrix4::from_fn(|r, c| self.rows[p[r]][p[c]]))
    }

    /// wᵀ Γ w
    pub fn variance(&self, w: &[f64; 4]) -> f64 {
        let mut v = 0.0;
        for r in 0..4 {
            for c in 0..4 {
                v += w[r] * self.rows[r][c] * w[c];
            }
        }
        v
    }

    pub fn covariance(&self, a: &[f64; 4], b: &[f64; 4]) -> f64 {
        let mut v = 0.0;
        for r in 0..4 {
            for c in 0..4 {
                v += a[r] * self.rows[r][c] * b[c];
            }
        }
        v
    }

    pub fn max_asymmetry(&self) -> f64 {
        let mut m: f64 = 0.0;
        for r in 0..4 {
            for c in 0..4 {
                m = m.max((self.rows[r][c] - self.rows[c][r]).abs());
            }
        }
        m
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let m = self.matrix();
        let sym = (m + m.transpose()) * 0.5;
        sym.symmetric_eigenvalues().min()
    }

    /// Heisenberg-physical: Γ + iΩ ⪰ 0 for the symplectic form Ω of two
    /// modes, equivalently every symplectic eigenvalue ≥ 1.
    pub fn is_physical(&self, tol: f64) -> bool {
        let m = self.matrix();
        let omega = Matrix4::new(
            0.0, 1.0, 0.0, 0.0, //
            -1.0, 0.0, 0.0, 0.0, //
            0.0, 0.0, 0.0, 1.0, //
            0.0, 0.0, -1.0, 0.0,
        );
        let h = nalgebra::Matrix4::<num_complex::Complex64>::from_fn(|r, c| {
            num_complex::Complex64::new(m[(r, c)], omega[(r, c)])
        });
        // Hermitian 4×4 ↦ real symmetric 8×8 with the same spectrum (doubled).
        let big = nalgebra::SMatrix::<f64, 8, 8>::from_fn(|r, c| {
            let z = h[(r % 4, c % 4)];
            match (r < 4, c < 4) {
                (true, true) | (false, false) => z.re,
                (true, false) => -z.im,
                (false, true) => z.im,
            }
        });
        big.symmetric_eigenvalues().min() >= -tol
    }
}

/// Weights of Σ_{θφ} = (a(k) + λ a(−k) e^{iφ}) e^{iθ} + h.c. on x.
pub fn joint_weights(theta: f64, phi: f64, lambda: f64) -> [f64; 4] {
    [
        theta.cos(),
        -theta.sin(),
        lambda * (theta + phi).cos(),
        -lambda * (theta + phi).sin(),
    ]
}

/// Var Σ_{θφ}; the vacuum gives 1 + λ².
pub fn joint_quadrature_variance(g: &QuadratureCovariance, theta: f64, phi: f64, lambda: f64) -> f64 {
    g.variance(&joint_weights(theta, phi, lambda))
}

/// Shot-noise level of Σ_{θφ} at weight λ.
pub fn shot_noise(lambda: f64) -> f64 {
    1.0 + lambda * lambda
}

fn split_weights(theta: f64, phi: f64) -> ([f64; 4], [f64; 4]) {
    let w = joint_weights(theta, phi, 1.0);
    ([w[0], w[1], 0.0, 0.0], [0.0, 0.0, w[2], w[3]])
}

/// λ* = −Cov(X_A, X_B)/Var(X_B), minimizing Var Σ_{θφ} over λ.
pub fn optimal_lambda(g: &QuadratureCovariance, theta: f64, phi: f64) -> Result<f64> {
    let (a, b) = split_weights(theta, phi);
    let vb = g.variance(&b);
    if !(vb > 0.0) {
        return Err(Error::Numerical(format!("degenerate quadrature variance {vb}")));
    }
    Ok(-g.covariance(&a, &b) / vb)
}

/// Var Σ_{θφ} at λ*: Var X_A − Cov²/Var X_B.
pub fn conditional_variance(g: &QuadratureCovariance, theta: f64, phi: f64) -> Result<f64> {
    let (a, b) = split_weights(theta, phi);
    let vb = g.variance(&b);
    if !(vb > 0.0) {
        return Err(Error::Numerical(format!("degenerate quadrature variance {vb}")));
    }
    let c = g.covariance(&a, &b);
    Ok(g.variance(&a) - c * c / vb)
}

/// Reid product ℰ = Δ²Σ_{θ0,φ0} Δ²Σ_{θ0+π/2,φ0+π}, each factor at its own λ*.
/// ℰ < 1 demonstrates the EPR paradox.
pub fn epr_product(g: &QuadratureCovariance, theta0: f64, phi0: f64) -> Result<f64> {
    Ok(conditional_variance(g, theta0, phi0)?
        * conditional_variance(g, theta0 + 0.5 * PI, phi0 + PI)?)
}

/// Same product with a fixed weight λ for both factors.
pub fn epr_product_fixed(g: &QuadratureCovariance, theta0: f64, phi0: f64, lambda: f64) -> f64 {
    joint_quadrature_variance(g, theta0, phi0, lambda)
        * joint_quadrature_variance(g, theta0 + 0.5 * PI, phi0 + PI, lambda)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Inseparability {
    /// Δ²Σ̃_{θ0,φ0} + Δ²Σ̃_{θ0+π/2,φ0+π}
    pub sum: f64,
    /// sum / 2(a² + a⁻²); below 1 certifies inseparability.
    pub ratio: f64,
}

pub fn inseparability(g: &QuadratureCovariance, theta0: f64, phi0: f64, a: f64) -> Result<Inseparability> {
    if !(a > 0.0) {
        return Err(Error::InvalidParameter(format!("weight a = {a} must be positive")));
    }
    let w = |t: f64, p: f64| {
        let j = joint_weights(t, p, 1.0);
        [a * j[0], a * j[1], j[2] / a, j[3] / a]
    };
    let sum = g.variance(&w(theta0, phi0)) + g.variance(&w(theta0 + 0.5 * PI, phi0 + PI));
    Ok(Inseparability {
        sum,
        ratio: sum / (2.0 * (a * a + 1.0 / (a * a))),
    })
}

/// Inseparability ratio minimized over a by golden section on ln a ∈ [−3, 3].
pub fn inseparability_best_a(g: &QuadratureCovariance, theta0: f64, phi0: f64) -> Result<(f64, Inseparability)> {
    let f = |s: f64| inseparability(g, theta0, phi0, s.exp()).map(|i| i.ratio);
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let (mut lo, mut hi) = (-3.0f64, 3.0f64);
    let mut c = hi - r * (hi - lo);
    let mut d = lo + r * (hi - lo);
    let (mut fc, mut fd) = (f(c)?, f(d)?);
    for _ in 0..80 {
        if fc < fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - r * (hi - lo);
            fc = f(c)?;
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + r * (hi - lo);
            fd = f(d)?;
        }
    }
    let s = if fc < fd { c } else { d };
    let one = inseparability(g, theta0, phi0, 1.0)?;
    let best = inseparability(g, theta0, phi0, s.exp())?;
    Ok(if one.ratio <= best.ratio { (1.0, one) } else { (s.exp(), best) })
}

pub const DEFAULT_ANGLE_POINTS: usize = 64;

/// `n` points over [0, span).
pub fn angle_grid(n: usize, span: f64) -> Vec<f64> {
    (0..n).map(|j| span * j as f64 / n as f64).collect()
}

pub fn default_theta_grid() -> Vec<f64> {
    angle_grid(DEFAULT_ANGLE_POINTS, PI)
}

pub fn default_phi_grid() -> Vec<f64> {
    angle_grid(DEFAULT_ANGLE_POINTS, 2.0 * PI)
}

/// Smallest Var Σ_{θφ} over the grids, with its (θ, φ).
pub fn min_joint_variance(g: &QuadratureCovariance, thetas: &[f64], phis: &[f64], lambda: f64) -> Result<(f64, f64, f64)> {
    if thetas.is_empty() || phis.is_empty() {
        return Err(Error::InvalidParameter("empty angle grid".into()));
    }
    let mut best = (f64::INFINITY, thetas[0], phis[0]);
    for &p in phis {
        for &t in thetas {
            let v = joint_quadrature_variance(g, t, p, lambda);
            if v < best.0 {
                best = (v, t, p);
            }
        }
    }
    Ok(best)
}

/// φ minimizing min_θ Var Σ_{θφ}; ties go to the smallest φ.
pub fn best_phi(g: &QuadratureCovariance, thetas: &[f64], phis: &[f64], lambda: f64) -> Result<f64> {
    if thetas.is_empty() || phis.is_empty() {
        return Err(Error::InvalidParameter("empty angle grid".into()));
    }
    let mut best = (f64::INFINITY, phis[0]);
    for &p in phis {
        let v = thetas
            .iter()
            .map(|&t| joint_quadrature_variance(g, t, p, lambda))
            .fold(f64::INFINITY, f64::min);
        if best.0.is_infinite() || v < best.0 - 1e-12 * best.0.abs() {
            best = (v, p);
        }
    }
    Ok(best.1)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Criterion {
    /// Var Σ_{θφ} at fixed λ.
    Variance { lambda: f64 },
    /// Reid product with optimized λ.
    Epr,
    /// Normalized inseparability ratio at weight a.
    Insep { a: f64 },
}

impl Criterion {
    /// Value separating classical from nonclassical.
    pub fn boundary(&self) -> f64 {
        match self {
            Criterion::Variance { lambda } => shot_noise(*lambda),
            Criterion::Epr | Criterion::Insep { .. } => 1.0,
        }
    }

    pub fn evaluate(&self, g: &QuadratureCovariance, theta: f64, phi: f64) -> Result<f64> {
        match self {
            Criterion::Variance { lambda } => Ok(joint_quadrature_variance(g, theta, phi, *lambda)),
            Criterion::Epr => epr_product(g, theta, phi),
            Criterion::Insep { a } => Ok(inseparability(g, theta, phi, *a)?.ratio),
        }
    }
}

/// Criterion values on a θ × φ grid; `values[i][j]` is at (thetas[i], phis[j]).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AngleMap {
    pub criterion: Criterion,
    pub thetas: Vec<f64>,
    pub phis: Vec<f64>,
    pub values: Vec<Vec<f64>>,
    pub min_value: f64,
    pub argmin: (f64, f64),
    pub max_value: f64,
    pub argmax: (f64, f64),
    /// Fraction of grid cells strictly below the boundary.
    pub below_fraction: f64,
}

impl AngleMap {
    pub fn below_mask(&self) -> Vec<Vec<bool>> {
        let b = self.criterion.boundary();
        self.values
            .iter()
            .map(|row| row.iter().map(|&v| is_below(v, b)).collect())
            .collect()
    }

    /// Values along θ at the φ column nearest `phi`.
    pub fn theta_curve(&self, phi: f64) -> Vec<f64> {
        let j = nearest(&self.phis, phi);
        self.values.iter().map(|row| row[j]).collect()
    }
}

/// Jackknife standard error of every cell of an angle map, from the
/// covariances estimated with one trajectory left out each.
pub fn angle_scan_errors(
    leave_out: &[QuadratureCovariance],
    thetas: &[f64],
    phis: &[f64],
    criterion: Criterion,
) -> Result<Vec<Vec<f64>>> {
    let maps = leave_out
        .iter()
        .map(|g| angle_scan(g, thetas, phis, criterion))
        .collect::<Result<Vec<_>>>()?;
    Ok((0..thetas.len())
        .map(|i| {
            (0..phis.len())
                .map(|j| {
                    let parts: Vec<f64> = maps.iter().map(|m| m.values[i][j]).collect();
                    jackknife_error(&parts)
                })
                .collect()
        })
        .collect())
}

impl AngleMap {
    /// Cells whose value lies below `level` by more than `z` standard errors.
    pub fn significantly_below(&self, errors: &[Vec<f64>], level: f64, z: f64) -> Vec<(f64, f64)> {
        let mut out = Vec::new();
        for (i, row) in self.values.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                let e = errors[i][j];
                if e.is_finite() && v + z * e < level {
                    out.push((self.thetas[i], self.phis[j]));
                }
            }
        }
        out
    }
}

/// Strictly below a boundary, ignoring rounding at the boundary itself.
fn is_below(v: f64, boundary: f64) -> bool {
    v < boundary * (1.0 - 1e-12)
}

fn nearest(xs: &[f64], x: f64) -> usize {
    xs.iter()
        .enumerate()
        .min_by(|a, b| (a.1 - x).abs().total_cmp(&(b.1 - x).abs()))
        .map(|(i, _)| i)
        .unwrap_or(0)
}

pub fn angle_scan(
    g: &QuadratureCovariance,
    thetas: &[f64],
    phis: &[f64],
    criterion: Criterion,
) -> Result<AngleMap> {
    if thetas.is_empty() || phis.is_empty() {
        return Err(Error::InvalidParameter("empty angle grid".into()));
    }
    let mut values = Vec::with_capacity(thetas.len());
    let (mut lo, mut hi) = ((f64::INFINITY, (0.0, 0.0)), (f64::NEG_INFINITY, (0.0, 0.0)));
    let mut below = 0usize;
    let b = criterion.boundary();
    for &t in thetas {
        let mut row = Vec::with_capacity(phis.len());
        for &p in phis {
            let v = criterion.evaluate(g, t, p)?;
            if v < lo.0 {
                lo = (v, (t, p));
            }
            if v > hi.0 {
                hi = (v, (t, p));
            }
            if is_below(v, b) {
                below += 1;
            }
            row.push(v);
        }
        values.push(row);
    }
    Ok(AngleMap {
        criterion,
        thetas: thetas.to_vec(),
        phis: phis.to_vec(),
        values,
        min_value: lo.0,
        argmin: lo.1,
        max_value: hi.0,
        argmax: hi.1,
        below_fraction: below as f64 / (thetas.len() * phis.len()) as f64,
    })
}

/// Variance of Σ_{θ,φ} along θ at fixed φ, with the measure (in radians) of
/// the set of θ whose variance is below shot noise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThetaScan {
    pub phi: f64,
    pub lambda: f64,
    pub thetas: Vec<f64>,
    pub variances: Vec<f64>,
    pub min_variance: f64,
    pub max_variance: f64,
    pub squeezed_measure: f64,
}

pub fn theta_scan(g: &QuadratureCovariance, thetas: &[f64], phi: f64, lambda: f64) -> ThetaScan {
    let variances: Vec<f64> = thetas
        .iter()
        .map(|&t| joint_quadrature_variance(g, t, phi, lambda))
        .collect();
    let step = PI / thetas.len().max(1) as f64;
    let sn = shot_noise(lambda);
    ThetaScan {
        phi,
        lambda,
        thetas: thetas.to_vec(),
        min_variance: variances.iter().copied().fold(f64::INFINITY, f64::min),
        max_variance: variances.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        squeezed_measure: variances.iter().filter(|&&v| is_below(v, sn)).count() as f64 * step,
        variances,
    }
}
