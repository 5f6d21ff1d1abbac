//! Periodic-grid spectral representation: transforms, Fourier-multiplier
//! differential operators, Leray projection and dealiased products.

pub mod checkpoint;
mod fft;
mod field;
mod grid;
mod norms;
pub mod random;
mod vector;

pub use field::{Axis, SpectralField};
pub use grid::Grid3;
pub use norms::{
    check_exponent, lp_norm_oversampled, lp_norm_physical, lp_norm_values, sobolev_norm,
    sobolev_norm_sq, Components,
};
pub(crate) use norms::pointwise_magnitude;
pub use vector::{
    nonlinear_product, nonlinear_product_with, scalar_product, ProductKind, ProductRule,
    VectorField, SOLENOIDAL_TOL,
};
pub(crate) use vector::{advect_physical, finish_product, physical_cross};
