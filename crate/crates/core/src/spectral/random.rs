use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::field::SpectralField;
use super::grid::Grid3;
use super::vector::VectorField;

/// Seeded generator used for every random field in the crate.
pub type FieldRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> FieldRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Spectral support and amplitude law of a Gaussian random field.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectralBand {
    /// Inclusive lower bound on |k|.
    pub k_lo: f64,
    /// Exclusive upper bound on |k|.
    pub k_hi: f64,
    /// Coefficient amplitude scales as |k|^slope.
    pub slope: f64,
}

impl SpectralBand {
    pub fn new(k_lo: f64, k_hi: f64, slope: f64) -> Self {
        Self { k_lo, k_hi, slope }
    }

    fn contains(&self, k_abs: f64) -> bool {
        k_abs > 0.0 && k_abs >= self.k_lo && k_abs < self.k_hi
    }
}

/// Real Gaussian field supported in the band; Nyquist modes are never populated.
pub fn random_scalar(grid: Grid3, band: SpectralBand, rng: &mut FieldRng) -> SpectralField {
    let t = grid.tables();
    let half = (grid.n() / 2) as i64;
    let mut f = SpectralField::zeros(grid);
    for idx in 0..grid.len() {
        let k = grid.wavevector(idx);
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        if k.contains(&half) || !band.contains(t.k_abs[idx]) {
            continue;
        }
        let amp = t.k_abs[idx].powf(band.slope);
        f.coeffs_mut()[idx] = Complex64::new(re, im) * amp;
    }
    f.enforce_hermitian();
    f
}

/// Leray-projected Gaussian vector field supported in the band.
pub fn random_solenoidal(grid: Grid3, band: SpectralBand, rng: &mut FieldRng) -> VectorField {
    let x = random_scalar(grid, band, rng);
    let y = random_scalar(grid, band, rng);
    let z = random_scalar(grid, band, rng);
    VectorField::new(x, y, z)
        .expect("components share a grid")
        .project_leray()
}
