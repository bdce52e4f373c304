use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::noise::CellNoise;
use crate::error::{Error, Result};
use crate::fft::FftPair;
use crate::model::{FieldState, Grid, ModelParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    /// Exact linear propagation in Fourier space around a pointwise
    /// fourth-order Runge–Kutta substep, noise injected at mid-step.
    StrangSplitting,
    /// First-order explicit reference scheme.
    EulerMaruyama,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IntegratorSettings {
    pub dt: f64,
    pub scheme: Scheme,
    pub max_field_norm: f64,
    /// Upper bound accepted for `dt`.
    pub dt_limit: f64,
}

impl Default for IntegratorSettings {
    fn default() -> Self {
        IntegratorSettings {
            dt: 0.05,
            scheme: Scheme::StrangSplitting,
            max_field_norm: 1e3,
            dt_limit: 0.05,
        }
    }
}

impl IntegratorSettings {
    pub fn with_dt(dt: f64) -> Self {
        IntegratorSettings {
            dt,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt <= self.dt_limit) {
            return Err(Error::InvalidParameter(format!(
                "time step {} outside (0, {}]",
                self.dt, self.dt_limit
            )));
        }
        if !(self.max_field_norm > 0.0) {
            return Err(Error::InvalidParameter("max_field_norm must be positive".into()));
        }
        Ok(())
    }
}

/// Callback invoked on the state every `stride` steps.
pub trait Observer {
    fn observe(&mut self, state: &FieldState) -> Result<()>;
}

impl<F: FnMut(&FieldState) -> Result<()>> Observer for F {
    fn observe(&mut self, state: &FieldState) -> Result<()> {
        self(state)
    }
}

/// Deterministic right-hand side of the field equations,
/// ∂t α0 = −(1+iΔ0)α0 + i∂xx α0 + E − α1²/2 and
/// ∂t α1 = −(1+iΔ1)α1 + 2i∂xx α1 + α0 α1*,
/// with the Laplacian evaluated spectrally.
pub fn drift(
    state: &FieldState,
    params: &ModelParams,
    grid: &Grid,
) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
    state.check_grid(grid)?;
    if !state.is_finite() {
        return Err(Error::NonFinite(state.time));
    }
    let mut fft = FftPair::new(grid.n_points());
    let lap: Vec<Complex64> = grid
        .laplacian_symbol()
        .into_iter()
        .map(|s| Complex64::new(s, 0.0))
        .collect();
    let mut lap0 = state.alpha0.clone();
    let mut lap1 = state.alpha1.clone();
    fft.apply_symbol(&mut lap0, &lap);
    fft.apply_symbol(&mut lap1, &lap);
    let d0 = params.delta0.sample(grid);
    let d1 = params.delta1.sample(grid);
    let i = Complex64::i();
    let e = Complex64::new(params.pump, 0.0);
    let g = if params.parametric { 1.0 } else { 0.0 };
    let mut f0 = Vec::with_capacity(grid.n_points());
    let mut f1 = Vec::with_capacity(grid.n_points());
    for j in 0..grid.n_points() {
        let a0 = state.alpha0[j];
        let a1 = state.alpha1[j];
        f0.push(-(1.0 + i * d0[j]) * a0 + i * lap0[j] + e - g * 0.5 * a1 * a1);
        f1.push(-(1.0 + i * d1[j]) * a1 + 2.0 * i * lap1[j] + g * a0 * a1.conj());
    }
    Ok((f0, f1))
}

/// Time stepper for one trajectory. Holds precomputed propagators and
/// scratch space; the configuration is fixed at construction.
pub struct Integrator {
    grid: Grid,
    params: ModelParams,
    settings: IntegratorSettings,
    fft: FftPair,
    half0: Vec<Complex64>,
    half1: Vec<Complex64>,
    full0: Vec<Complex64>,
    full1: Vec<Complex64>,
    source_half: Complex64,
    source_full: Complex64,
    lap: Vec<Complex64>,
    mod0: Vec<f64>,
    mod1: Vec<f64>,
    noise: CellNoise,
    max_pump_abs: f64,
}

impl Integrator {
    pub fn new(params: &ModelParams, grid: &Grid, settings: IntegratorSettings) -> Result<Self> {
        settings.validate()?;
        let n = grid.n_points();
        let dt = settings.dt;
        let (mean0, mean1) = (params.delta0.mean(), params.delta1.mean());
        let factor = |mean: f64, diffraction: f64, h: f64| -> Vec<Complex64> {
            (0..n)
                .map(|b| {
                    let k = grid.bin_wavenumber(b);
                    (Complex64::new(-1.0, -(mean + diffraction * k * k)) * h).exp()
                })
                .collect()
        };
        let half0 = factor(mean0, 1.0, 0.5 * dt);
        let full0 = factor(mean0, 1.0, dt);
        // The drive only feeds the k = 0 pump mode and is integrated exactly
        // with the linear part, so homogeneous fixed points are preserved.
        let gamma0 = Complex64::new(1.0, mean0);
        let source = |f: Complex64| params.pump * n as f64 * (1.0 - f) / gamma0;
        Ok(Integrator {
            grid: grid.clone(),
            params: params.clone(),
            settings,
            fft: FftPair::new(n),
            source_half: source(half0[0]),
            source_full: source(full0[0]),
            half0,
            half1: factor(mean1, 2.0, 0.5 * dt),
            full0,
            full1: factor(mean1, 2.0, dt),
            lap: grid
                .laplacian_symbol()
                .into_iter()
                .map(|s| Complex64::new(s, 0.0))
                .collect(),
            mod0: params.delta0.modulation(grid),
            mod1: params.delta1.modulation(grid),
            noise: CellNoise::new(&params.noise, dt, grid.dx()),
            max_pump_abs: 0.0,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn settings(&self) -> &IntegratorSettings {
        &self.settings
    }

    /// Largest |α0| met by the integrator so far.
    pub fn max_pump_abs(&self) -> f64 {
        self.max_pump_abs
    }

    /// Whether the realized pump ever left the domain |α0| < 2.
    pub fn out_of_validity(&self) -> bool {
        self.max_pump_abs >= 2.0
    }

    pub fn reset_monitor(&mut self) {
        self.max_pump_abs = 0.0;
    }

    pub fn step<R: Rng + ?Sized>(&mut self, state: &mut FieldState, rng: &mut R) -> Result<()> {
        self.advance(state, 1, rng)
    }

    /// Advance `steps` steps. Consecutive Strang half-steps are fused, so the
    /// result differs in rounding (only) from `steps` calls to [`step`].
    ///
    /// [`step`]: Integrator::step
    pub fn advance<R: Rng + ?Sized>(
        &mut self,
        state: &mut FieldState,
        steps: usize,
        rng: &mut R,
    ) -> Result<()> {
        if steps == 0 {
            return Ok(());
        }
        state.check_grid(&self.grid)?;
        match self.settings.scheme {
            Scheme::StrangSplitting => self.advance_strang(state, steps, rng),
            Scheme::EulerMaruyama => {
                for _ in 0..steps {
                    self.euler_step(state, rng)?;
                }
                Ok(())
            }
        }
    }

    /// Run for `duration` (rounded to whole steps), calling every observer
    /// after each block of `stride` steps.
    pub fn integrate<R: Rng + ?Sized>(
        &mut self,
        state: &mut FieldState,
        duration: f64,
        stride: usize,
        rng: &mut R,
        observers: &mut [&mut dyn Observer],
    ) -> Result<()> {
        if duration < 0.0 {
            return Err(Error::InvalidParameter(format!("negative duration {duration}")));
        }
        let stride = stride.max(1);
        let mut remaining = (duration / self.settings.dt).round() as usize;
        while remaining > 0 {
            let block = stride.min(remaining);
            self.advance(state, block, rng)?;
            remaining -= block;
            if block == stride {
                for o in observers.iter_mut() {
                    o.observe(state)?;
                }
            }
        }
        Ok(())
    }

    fn linear(&mut self, state: &mut FieldState, full: bool) {
        let (f0, f1, src) = if full {
            (&self.full0, &self.full1, self.source_full)
        } else {
            (&self.half0, &self.half1, self.source_half)
        };
        self.fft.forward(&mut state.alpha0);
        for (z, f) in state.alpha0.iter_mut().zip(f0) {
            *z *= f;
        }
        state.alpha0[0] += src;
        self.fft.inverse(&mut state.alpha0);
        self.fft.apply_symbol(&mut state.alpha1, f1);
    }

    fn advance_strang<R: Rng + ?Sized>(
        &mut self,
        state: &mut FieldState,
        steps: usize,
        rng: &mut R,
    ) -> Result<()> {
        let dt = self.settings.dt;
        self.linear(state, false);
        for s in 0..steps {
            self.pointwise(state, dt, rng)?;
            state.time += dt;
            self.linear(state, s + 1 < steps);
        }
        let norm = state.max_abs();
        if !norm.is_finite() {
            return Err(Error::NonFinite(state.time));
        }
        if norm > self.settings.max_field_norm {
            return Err(Error::BlowUp {
                time: state.time,
                norm,
            });
        }
        Ok(())
    }

    /// Real-space part of the Strang step: RK4 over dt/2, noise kick,
    /// RK4 over dt/2. Every grid point evolves independently here.
    fn pointwise<R: Rng + ?Sized>(
        &mut self,
        state: &mut FieldState,
        dt: f64,
        rng: &mut R,
    ) -> Result<()> {
        let h = 0.5 * dt;
        let g = if self.params.parametric { 1.0 } else { 0.0 };
        let noisy = self.params.noise.enabled;
        let mid_time = state.time + h;
        let mut max_pump = self.max_pump_abs;
        for j in 0..state.alpha0.len() {
            let (m0, m1) = (self.mod0[j], self.mod1[j]);
            let (mut a0, mut a1) = (state.alpha0[j], state.alpha1[j]);
            (a0, a1) = rk4_local(a0, a1, m0, m1, g, h);
            max_pump = max_pump.max(a0.norm());
            if noisy {
                let (x0, x1) = self.noise.draw(a0, mid_time, rng)?;
                a0 += x0;
                a1 += x1;
            }
            (a0, a1) = rk4_local(a0, a1, m0, m1, g, h);
            state.alpha0[j] = a0;
            state.alpha1[j] = a1;
        }
        self.max_pump_abs = max_pump;
        Ok(())
    }

    fn euler_step<R: Rng + ?Sized>(&mut self, state: &mut FieldState, rng: &mut R) -> Result<()> {
        let dt = self.settings.dt;
        let mut lap0 = state.alpha0.clone();
        let mut lap1 = state.alpha1.clone();
        self.fft.apply_symbol(&mut lap0, &self.lap);
        self.fft.apply_symbol(&mut lap1, &self.lap);
        let d0 = self.params.delta0.mean();
        let d1 = self.params.delta1.mean();
        let e = self.params.pump;
        let g = if self.params.parametric { 1.0 } else { 0.0 };
        let i = Complex64::i();
        let mut max_pump = self.max_pump_abs;
        let mut norm: f64 = 0.0;
        for j in 0..state.alpha0.len() {
            let a0 = state.alpha0[j];
            let a1 = state.alpha1[j];
            max_pump = max_pump.max(a0.norm());
            let f0 = -(1.0 + i * (d0 + self.mod0[j])) * a0 + i * lap0[j] + e - g * 0.5 * a1 * a1;
            let f1 = -(1.0 + i * (d1 + self.mod1[j])) * a1 + 2.0 * i * lap1[j] + g * a0 * a1.conj();
            let (mut n0, mut n1) = (a0 + f0 * dt, a1 + f1 * dt);
            if self.params.noise.enabled {
                let (x0, x1) = self.noise.draw(a0, state.time, rng)?;
                n0 += x0;
                n1 += x1;
            }
            state.alpha0[j] = n0;
            state.alpha1[j] = n1;
            norm = norm.max(n0.norm()).max(n1.norm());
        }
        self.max_pump_abs = max_pump;
        state.time += dt;
        if !norm.is_finite() {
            return Err(Error::NonFinite(state.time));
        }
        if norm > self.settings.max_field_norm {
            return Err(Error::BlowUp {
                time: state.time,
                norm,
            });
        }
        Ok(())
    }
}

#[inline(always)]
fn local_rhs(
    a0: Complex64,
    a1: Complex64,
    m0: f64,
    m1: f64,
    g: f64,
) -> (Complex64, Complex64) {
    let f0 = Complex64::new(m0 * a0.im, -m0 * a0.re) - g * 0.5 * a1 * a1;
    let f1 = Complex64::new(m1 * a1.im, -m1 * a1.re) + g * a0 * a1.conj();
    (f0, f1)
}

#[inline(always)]
fn rk4_local(
    a0: Complex64,
    a1: Complex64,
    m0: f64,
    m1: f64,
    g: f64,
    h: f64,
) -> (Complex64, Complex64) {
    let (k10, k11) = local_rhs(a0, a1, m0, m1, g);
    let (k20, k21) = local_rhs(a0 + 0.5 * h * k10, a1 + 0.5 * h * k11, m0, m1, g);
    let (k30, k31) = local_rhs(a0 + 0.5 * h * k20, a1 + 0.5 * h * k21, m0, m1, g);
    let (k40, k41) = local_rhs(a0 + h * k30, a1 + h * k31, m0, m1, g);
    (
        a0 + h / 6.0 * (k10 + 2.0 * k20 + 2.0 * k30 + k40),
        a1 + h / 6.0 * (k11 + 2.0 * k21 + 2.0 * k31 + k41),
    )
}
