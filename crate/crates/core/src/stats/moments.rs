use nalgebra::Matrix4;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::quadrature::QuadratureCovariance;
use crate::error::{Error, Result};

/// Running mean and scatter matrix of a real 4-vector (Welford), mergeable
/// with the pairwise update of Chan et al.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Moments4 {
    pub count: u64,
    pub mean: [f64; 4],
    /// Σ (x − mean)(x − mean)ᵀ
    pub scatter: [[f64; 4]; 4],
}

impl Moments4 {
    pub fn push(&mut self, x: [f64; 4]) {
        self.count += 1;
        let n = self.count as f64;
        let mut d = [0.0; 4];
        for i in 0..4 {
            d[i] = x[i] - self.mean[i];
            self.mean[i] += d[i] / n;
        }
        for i in 0..4 {
            let e = x[i] - self.mean[i];
            for j in 0..4 {
                self.scatter[j][i] += d[j] * e;
            }
        }
    }

    pub fn merge(&mut self, other: &Moments4) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = *other;
            return;
        }
        let (na, nb) = (self.count as f64, other.count as f64);
        let n = na + nb;
        let mut d = [0.0; 4];
        for i in 0..4 {
            d[i] = other.mean[i] - self.mean[i];
        }
        for i in 0..4 {
            for j in 0..4 {
                self.scatter[i][j] += other.scatter[i][j] + d[i] * d[j] * na * nb / n;
            }
            self.mean[i] += d[i] * nb / n;
        }
        self.count += other.count;
    }

    /// Unbiased covariance.
    pub fn covariance(&self) -> Result<Matrix4<f64>> {
        if self.count < 2 {
            return Err(Error::InsufficientStatistics(format!(
                "{} samples, at least 2 required",
                self.count
            )));
        }
        Ok(Matrix4::from_fn(|i, j| self.scatter[i][j]) / (self.count - 1) as f64)
    }

    /// ⟨x xᵀ⟩ without mean subtraction.
    pub fn raw_second(&self) -> Result<Matrix4<f64>> {
        if self.count == 0 {
            return Err(Error::InsufficientStatistics("no samples".into()));
        }
        let n = self.count as f64;
        Ok(Matrix4::from_fn(|i, j| {
            self.scatter[i][j] / n + self.mean[i] * self.mean[j]
        }))
    }
}

/// How fluctuations are measured about the mean.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Pooling {
    /// About the grand mean of all samples.
    Global,
    /// About each trajectory's own mean, pooled with N − G degrees of freedom.
    WithinTrajectory,
}

fn quadratures(a_plus: Complex64, a_minus: Complex64) -> [f64; 4] {
    [
        2.0 * a_plus.re,
        2.0 * a_plus.im,
        2.0 * a_minus.re,
        2.0 * a_minus.im,
    ]
}

/// Pooled covariance of per-trajectory accumulators, optionally leaving
/// one trajectory out.
fn pooled_excluding(groups: &[Moments4], pooling: Pooling, skip: Option<usize>) -> Result<Matrix4<f64>> {
    let kept = || groups.iter().enumerate().filter(move |(i, _)| Some(*i) != skip).map(|(_, g)| g);
    match pooling {
        Pooling::Global => {
            let mut t = Moments4::default();
            kept().for_each(|g| t.merge(g));
            t.covariance()
        }
        Pooling::WithinTrajectory => {
            let n: u64 = kept().map(|g| g.count).sum();
            let g = kept().filter(|g| g.count > 0).count() as u64;
            if n <= g {
                return Err(Error::InsufficientStatistics(format!(
                    "{n} samples in {g} trajectories"
                )));
            }
            let mut s = Matrix4::zeros();
            for m in kept() {
                s += Matrix4::from_fn(|i, j| m.scatter[i][j]);
            }
            Ok(s / (n - g) as f64)
        }
    }
}

fn total(groups: &[Moments4]) -> Moments4 {
    let mut t = Moments4::default();
    for g in groups {
        t.merge(g);
    }
    t
}

/// Mean and standard error of a per-trajectory statistic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub standard_error: f64,
}

impl Estimate {
    /// Combine per-trajectory values; the standard error is the spread
    /// across trajectories over √G, so temporal correlations within a
    /// trajectory are accounted for.
    pub fn from_samples(values: &[f64]) -> Result<Self> {
        let g = values.len();
        if g == 0 {
            return Err(Error::InsufficientStatistics("no trajectories".into()));
        }
        let mean = values.iter().sum::<f64>() / g as f64;
        let standard_error = if g > 1 {
            let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (g - 1) as f64;
            (var / g as f64).sqrt()
        } else {
            f64::NAN
        };
        Ok(Estimate {
            value: mean,
            standard_error,
        })
    }

    /// |value − reference| in units of the standard error.
    pub fn deviation(&self, reference: f64) -> f64 {
        (self.value - reference).abs() / self.standard_error
    }
}

/// Equal-time moments of the far-field pair (a(k), a(−k)), kept per
/// trajectory as quadrature vectors x = (X₊, Y₊, X₋, Y₋) with X = a + a*,
/// Y = −i(a − a*). Samples are Q-representation amplitudes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModePairMoments {
    pub mode: i64,
    pub k: f64,
    pub trajectories: Vec<Moments4>,
}

impl ModePairMoments {
    pub fn new(mode: i64, k: f64) -> Self {
        ModePairMoments {
            mode,
            k,
            trajectories: Vec::new(),
        }
    }

    pub fn start_trajectory(&mut self) {
        self.trajectories.push(Moments4::default());
    }

    pub fn push(&mut self, a_plus: Complex64, a_minus: Complex64) {
        if self.trajectories.is_empty() {
            self.start_trajectory();
        }
        let last = self.trajectories.len() - 1;
        self.trajectories[last].push(quadratures(a_plus, a_minus));
    }

    /// Append the trajectories of `other`; merging in a fixed order makes
    /// the result independent of how trajectories were distributed.
    pub fn merge(&mut self, other: &ModePairMoments) {
        self.trajectories.extend_from_slice(&other.trajectories);
    }

    pub fn count(&self) -> u64 {
        self.trajectories.iter().map(|t| t.count).sum()
    }

    pub fn total(&self) -> Moments4 {
        total(&self.trajectories)
    }

    /// Q-ordered quadrature covariance.
    pub fn q_covariance(&self, pooling: Pooling) -> Result<QuadratureCovariance> {
        Ok(QuadratureCovariance::from_matrix(&pooled_excluding(
            &self.trajectories,
            pooling,
            None,
        )?))
    }

    /// Statistic of the equal-time covariance with a jackknife standard error.
    pub fn jackknife<F>(&self, pooling: Pooling, f: F) -> Result<Estimate>
    where
        F: Fn(&QuadratureCovariance) -> Result<f64>,
    {
        let cov = |skip| -> Result<QuadratureCovariance> {
            Ok(QuadratureCovariance::from_matrix(&pooled_excluding(&self.trajectories, pooling, skip)?).minus_identity())
        };
        let value = f(&cov(None)?)?;
        jackknife(self.trajectories.len(), value, |i| f(&cov(Some(i))?))
    }

    /// Equal-time covariances with each trajectory left out in turn.
    pub fn leave_one_out(&self, pooling: Pooling) -> Result<Vec<QuadratureCovariance>> {
        (0..self.trajectories.len())
            .map(|i| {
                Ok(QuadratureCovariance::from_matrix(&pooled_excluding(&self.trajectories, pooling, Some(i))?)
                    .minus_identity())
            })
            .collect()
    }

    /// Symmetrically ordered fluctuation covariance: one vacuum unit per
    /// quadrature is removed from the Q moments, so the vacuum gives I.
    pub fn equal_time(&self, pooling: Pooling) -> Result<QuadratureCovariance> {
        Ok(self.q_covariance(pooling)?.minus_identity())
    }

    /// Mean amplitudes (⟨a₊⟩, ⟨a₋⟩).
    pub fn mean_field(&self) -> Result<(Complex64, Complex64)> {
        let t = self.total();
        if t.count == 0 {
            return Err(Error::InsufficientStatistics("no samples".into()));
        }
        let m = t.mean;
        Ok((
            Complex64::new(m[0], m[1]) * 0.5,
            Complex64::new(m[2], m[3]) * 0.5,
        ))
    }

    /// Normally ordered ⟨a₊†a₊⟩ and ⟨a₋†a₋⟩ (no mean subtraction).
    pub fn intensity(&self) -> Result<[f64; 2]> {
        intensity_of(&self.total())
    }

    /// Intensities averaged over ±k with the across-trajectory standard error.
    pub fn intensity_estimate(&self) -> Result<Estimate> {
        let per: Vec<f64> = self
            .trajectories
            .iter()
            .filter(|t| t.count > 0)
            .map(|t| intensity_of(t).map(|i| 0.5 * (i[0] + i[1])))
            .collect::<Result<_>>()?;
        let mut e = Estimate::from_samples(&per)?;
        // Weight by sample counts for the central value.
        let i = self.intensity()?;
        e.value = 0.5 * (i[0] + i[1]);
        Ok(e)
    }

    /// ⟨a₊²⟩ and ⟨a₋²⟩ (no mean subtraction).
    pub fn anomalous(&self) -> Result<[Complex64; 2]> {
        anomalous_of(&self.total())
    }

    /// Real and imaginary parts of ⟨a₊²⟩ and ⟨a₋²⟩ with across-trajectory
    /// standard errors, as `[mode][re, im]`.
    pub fn anomalous_estimate(&self) -> Result<[[Estimate; 2]; 2]> {
        let per: Vec<[Complex64; 2]> = self
            .trajectories
            .iter()
            .filter(|t| t.count > 0)
            .map(anomalous_of)
            .collect::<Result<_>>()?;
        let total = self.anomalous()?;
        let part = |m: usize, imag: bool| -> Result<Estimate> {
            let pick = |z: Complex64| if imag { z.im } else { z.re };
            let mut e = Estimate::from_samples(&per.iter().map(|a| pick(a[m])).collect::<Vec<_>>())?;
            e.value = pick(total[m]);
            Ok(e)
        };
        Ok([[part(0, false)?, part(0, true)?], [part(1, false)?, part(1, true)?]])
    }

    /// ⟨a₊ a₋⟩ (no mean subtraction).
    pub fn pair_anomalous(&self) -> Result<Complex64> {
        let r = self.total().raw_second()?;
        Ok(Complex64::new(r[(0, 2)] - r[(1, 3)], r[(0, 3)] + r[(1, 2)]) * 0.25)
    }
}

fn anomalous_of(m: &Moments4) -> Result<[Complex64; 2]> {
    let r = m.raw_second()?;
    let f = |x: usize, y: usize| Complex64::new(r[(x, x)] - r[(y, y)], 2.0 * r[(x, y)]) * 0.25;
    Ok([f(0, 1), f(2, 3)])
}

fn intensity_of(m: &Moments4) -> Result<[f64; 2]> {
    let r = m.raw_second()?;
    Ok([
        0.25 * (r[(0, 0)] + r[(1, 1)]) - 1.0,
        0.25 * (r[(2, 2)] + r[(3, 3)]) - 1.0,
    ])
}

/// Zero-frequency spectral covariance of the pair quadratures from sums
/// over consecutive windows of `window` samples spaced `interval` apart:
/// P = (τ/W) Cov(Σ_window x). Each trajectory carries the ordering
/// correction C of its own commutator kernel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowedSpectrum {
    pub window: usize,
    pub interval: f64,
    pub trajectories: Vec<Moments4>,
    pub corrections: Vec<[[f64; 4]; 4]>,
    #[serde(skip)]
    partial: ([f64; 4], usize),
}

impl WindowedSpectrum {
    pub fn new(window: usize, interval: f64) -> Self {
        WindowedSpectrum {
            window: window.max(1),
            interval,
            trajectories: Vec::new(),
            corrections: Vec::new(),
            partial: ([0.0; 4], 0),
        }
    }

    /// Begin a trajectory whose commutator kernel is `kernel` (see
    /// [`WindowedSpectrum::correction`]); an unfinished window is discarded.
    pub fn start_trajectory(&mut self, kernel: &[Matrix4<f64>]) -> Result<()> {
        let c = self.correction(kernel)?;
        self.trajectories.push(Moments4::default());
        self.corrections.push(std::array::from_fn(|i| std::array::from_fn(|j| c[(i, j)])));
        self.partial = ([0.0; 4], 0);
        Ok(())
    }

    pub fn push(&mut self, a_plus: Complex64, a_minus: Complex64) {
        let Some(last) = self.trajectories.last_mut() else {
            return;
        };
        let x = quadratures(a_plus, a_minus);
        for (s, v) in self.partial.0.iter_mut().zip(x) {
            *s += v;
        }
        self.partial.1 += 1;
        if self.partial.1 == self.window {
            last.push(self.partial.0);
            self.partial = ([0.0; 4], 0);
        }
    }

    pub fn merge(&mut self, other: &WindowedSpectrum) {
        self.trajectories.extend_from_slice(&other.trajectories);
        self.corrections.extend_from_slice(&other.corrections);
    }

    pub fn windows(&self) -> u64 {
        self.trajectories.iter().map(|t| t.count).sum()
    }

    pub fn duration(&self) -> f64 {
        self.window as f64 * self.interval
    }

    /// Ordering correction C = (τ/W)[W K₀ + Σ_{d=1}^{W−1} (W−d)(K_d + K_dᵀ)]
    /// for the commutator kernel K_d at lag d·τ (`kernel[0]` is the
    /// equal-time value, 2I for quadratures).
    pub fn correction(&self, kernel: &[Matrix4<f64>]) -> Result<Matrix4<f64>> {
        let w = self.window;
        if kernel.len() < w {
            return Err(Error::InvalidParameter(format!(
                "{} kernel lags for a window of {w}",
                kernel.len()
            )));
        }
        let mut c = kernel[0] * w as f64;
        for (d, k) in kernel.iter().enumerate().take(w).skip(1) {
            c += (k + k.transpose()) * (w - d) as f64;
        }
        Ok(c * (self.interval / w as f64))
    }

    fn output(&self, pooling: Pooling, skip: Option<usize>) -> Result<QuadratureCovariance> {
        let p = pooled_excluding(&self.trajectories, pooling, skip)? * (self.interval / self.window as f64);
        let mut c = Matrix4::zeros();
        let mut n = 0.0;
        for (i, (t, corr)) in self.trajectories.iter().zip(&self.corrections).enumerate() {
            if Some(i) != skip {
                c += Matrix4::from_fn(|r, s| corr[r][s]) * t.count as f64;
                n += t.count as f64;
            }
        }
        Ok(QuadratureCovariance::from_matrix(&(p - c / n)).scaled(2.0).plus_identity())
    }

    /// Q-ordered spectral covariance P at zero frequency.
    pub fn q_spectrum(&self, pooling: Pooling) -> Result<Matrix4<f64>> {
        Ok(pooled_excluding(&self.trajectories, pooling, None)? * (self.interval / self.window as f64))
    }

    /// Output-field spectral covariance in shot-noise units, I + 2(P − C);
    /// the vacuum gives I.
    pub fn output_covariance(&self, pooling: Pooling) -> Result<QuadratureCovariance> {
        self.output(pooling, None)
    }

    /// Output covariances with each trajectory left out in turn.
    pub fn leave_one_out(&self, pooling: Pooling) -> Result<Vec<QuadratureCovariance>> {
        (0..self.trajectories.len()).map(|i| self.output(pooling, Some(i))).collect()
    }

    /// Statistic of the output covariance with a leave-one-trajectory-out
    /// jackknife standard error.
    pub fn jackknife<F>(&self, pooling: Pooling, f: F) -> Result<Estimate>
    where
        F: Fn(&QuadratureCovariance) -> Result<f64>,
    {
        let value = f(&self.output(pooling, None)?)?;
        jackknife(self.trajectories.len(), value, |i| f(&self.output(pooling, Some(i))?))
    }
}

fn jackknife<F: Fn(usize) -> Result<f64>>(g: usize, value: f64, leave_out: F) -> Result<Estimate> {
    if g < 2 {
        return Ok(Estimate {
            value,
            standard_error: f64::NAN,
        });
    }
    let parts: Vec<f64> = (0..g).map(leave_out).collect::<Result<_>>()?;
    Ok(Estimate {
        value,
        standard_error: jackknife_error(&parts),
    })
}

/// Jackknife standard error from leave-one-out values.
pub fn jackknife_error(parts: &[f64]) -> f64 {
    let g = parts.len();
    if g < 2 {
        return f64::NAN;
    }
    let mean = parts.iter().sum::<f64>() / g as f64;
    let var = parts.iter().map(|v| (v - mean).powi(2)).sum::<f64>() * (g - 1) as f64 / g as f64;
    var.sqrt()
}
