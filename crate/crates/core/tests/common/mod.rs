//! Operator-expansion oracle for two-mode Gaussian statistics.

use std::f64::consts::PI;

use nalgebra::Matrix2;
use num_complex::Complex64 as C;
use pcopo::stats::QuadratureCovariance;

/// Two-mode Gaussian moments N_ij = ⟨a_i† a_j⟩ and M_ij = ⟨a_i a_j⟩.
#[derive(Debug, Clone)]
pub struct Moments {
    pub n: Matrix2<C>,
    pub m: Matrix2<C>,
}

/// ½⟨{A, B}⟩ for A = Σ u_i a_i + h.c., B = Σ v_i a_i + h.c., expanded over
/// the mode operators with [a_i, a_j†] = δ_ij.
pub fn sym(g: &Moments, u: [C; 2], v: [C; 2]) -> f64 {
    let mut s = C::new(0.0, 0.0);
    for i in 0..2 {
        for j in 0..2 {
            let delta = if i == j { 1.0 } else { 0.0 };
            // ⟨a_i a_j⟩, ⟨a_i† a_j†⟩, ⟨a_i a_j†⟩, ⟨a_i† a_j⟩
            let aa = g.m[(i, j)];
            let adad = g.m[(i, j)].conj();
            let a_ad = g.n[(j, i)] + delta;
            let ad_a = g.n[(i, j)];
            let ab = u[i] * v[j] * aa + u[i].conj() * v[j].conj() * adad + u[i] * v[j].conj() * a_ad
                + u[i].conj() * v[j] * ad_a;
            let ba = v[i] * u[j] * aa + v[i].conj() * u[j].conj() * adad + v[i] * u[j].conj() * a_ad
                + v[i].conj() * u[j] * ad_a;
            s += 0.5 * (ab + ba);
        }
    }
    s.re
}

pub fn zero() -> C {
    C::new(0.0, 0.0)
}

/// Quadrature covariance of x = (X₊, Y₊, X₋, Y₋) with X = a + a†, Y = −i(a − a†).
pub fn gamma(g: &Moments) -> QuadratureCovariance {
    let one = C::new(1.0, 0.0);
    let mi = C::new(0.0, -1.0);
    let forms = [[one, zero()], [mi, zero()], [zero(), one], [zero(), mi]];
    let mut rows = [[0.0; 4]; 4];
    for r in 0..4 {
        for c in 0..4 {
            rows[r][c] = sym(g, forms[r], forms[c]);
        }
    }
    QuadratureCovariance::from_rows(rows)
}

pub fn sigma(theta: f64, phi: f64, lambda: f64) -> [C; 2] {
    [C::from_polar(1.0, theta), C::from_polar(lambda, theta + phi)]
}

pub fn var(g: &Moments, u: [C; 2]) -> f64 {
    sym(g, u, u)
}

type Bogoliubov = (Matrix2<C>, Matrix2<C>);

/// a ↦ U a + V a† composed as `second` after `first`.
fn compose(second: &Bogoliubov, first: &Bogoliubov) -> Bogoliubov {
    let conj = |m: &Matrix2<C>| m.map(|z| z.conj());
    (
        second.0 * first.0 + second.1 * conj(&first.1),
        second.0 * first.1 + second.1 * conj(&first.0),
    )
}

/// Thermal inputs through local squeezers, a beam splitter and a two-mode
/// squeezer: always a physical two-mode Gaussian state. `v` holds nine
/// numbers in [0, 1).
pub fn gaussian_state(v: &[f64]) -> Moments {
    let tau = 2.0 * PI;
    let diag = |a: C, b: C| Matrix2::new(a, zero(), zero(), b);
    let local = (
        diag(C::new(v[0].cosh(), 0.0), C::new(v[1].cosh(), 0.0)),
        diag(C::from_polar(v[0].sinh(), tau * v[2]), C::from_polar(v[1].sinh(), tau * v[3])),
    );
    let (c, s) = ((PI * v[4]).cos(), (PI * v[4]).sin());
    let e = C::from_polar(1.0, tau * v[5]);
    let splitter = (Matrix2::new(C::new(c, 0.0), -s * e.conj(), s * e, C::new(c, 0.0)), Matrix2::zeros());
    let r = v[6];
    let two_mode = (
        diag(C::new(r.cosh(), 0.0), C::new(r.cosh(), 0.0)),
        Matrix2::new(zero(), C::new(r.sinh(), 0.0), C::new(r.sinh(), 0.0), zero()),
    );
    let (u, w) = compose(&two_mode, &compose(&splitter, &local));
    let nth = [v[7], v[8]];
    let mut n = Matrix2::zeros();
    let mut m = Matrix2::zeros();
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                n[(i, j)] += u[(i, k)].conj() * u[(j, k)] * nth[k] + w[(i, k)].conj() * w[(j, k)] * (nth[k] + 1.0);
                m[(i, j)] += u[(i, k)] * w[(j, k)] * (nth[k] + 1.0) + w[(i, k)] * u[(j, k)] * nth[k];
            }
        }
    }
    Moments { n, m }
}

