use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// Forward/inverse transform pair of one length with its scratch space.
/// The inverse is normalized so that `inverse(forward(x)) == x`.
pub(crate) struct FftPair {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    scratch: Vec<Complex64>,
    scale: f64,
}

impl FftPair {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        let len = forward
            .get_inplace_scratch_len()
            .max(inverse.get_inplace_scratch_len());
        FftPair {
            forward,
            inverse,
            scratch: vec![Complex64::new(0.0, 0.0); len],
            scale: 1.0 / n as f64,
        }
    }

    /// Σ_j x_j e^{−2πi jm/n}
    pub fn forward(&mut self, data: &mut [Complex64]) {
        self.forward.process_with_scratch(data, &mut self.scratch);
    }

    pub fn inverse(&mut self, data: &mut [Complex64]) {
        self.inverse.process_with_scratch(data, &mut self.scratch);
        for z in data.iter_mut() {
            *z *= self.scale;
        }
    }

    /// Multiply the spectrum of `data` by `symbol` (FFT order) in place.
    pub fn apply_symbol(&mut self, data: &mut [Complex64], symbol: &[Complex64]) {
        self.forward(data);
        for (z, s) in data.iter_mut().zip(symbol) {
            *z *= s;
        }
        self.inverse(data);
    }
}
