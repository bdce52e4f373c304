//! Far-field modes, moment accumulators and quadrature statistics.

mod farfield;
mod moments;
mod quadrature;

pub use farfield::{
    far_field, far_field_scale, mode_amplitude, pattern_position, FarFieldModes, PairProjector,
};
pub use moments::{jackknife_error, Estimate, ModePairMoments, Moments4, Pooling, WindowedSpectrum};
pub use quadrature::*;
