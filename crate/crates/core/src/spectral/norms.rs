use super::field::SpectralField;
use super::grid::Grid3;
use super::vector::VectorField;
use crate::error::{Error, Result};

/// Anything made of spectral components on one grid (scalar or vector).
pub trait Components {
    fn components(&self) -> &[SpectralField];

    fn grid(&self) -> Grid3 {
        self.components()[0].grid()
    }
}

impl Components for SpectralField {
    fn components(&self) -> &[SpectralField] {
        std::slice::from_ref(self)
    }
}

impl Components for VectorField {
    fn components(&self) -> &[SpectralField] {
        VectorField::components(self)
    }
}

impl Components for [SpectralField] {
    fn components(&self) -> &[SpectralField] {
        self
    }
}

impl Components for Vec<SpectralField> {
    fn components(&self) -> &[SpectralField] {
        self
    }
}

/// Sobolev norm through Plancherel.
///
/// Homogeneous: `(2π)^{3/2} (Σ_{k≠0} |k|^{2s} |f̂(k)|²)^{1/2}`; inhomogeneous uses
/// the weight `(1+|k|²)^s` and keeps the mean. For vector fields the component
/// sums are added before the square root.
pub fn sobolev_norm<F: Components + ?Sized>(f: &F, s: f64, homogeneous: bool) -> f64 {
    sobolev_norm_sq(f, s, homogeneous).sqrt()
}

pub fn sobolev_norm_sq<F: Components + ?Sized>(f: &F, s: f64, homogeneous: bool) -> f64 {
    let grid = f.grid();
    let t = grid.tables();
    let mut total = 0.0;
    for comp in f.components() {
        for (c, &k2) in comp.coeffs().iter().zip(&t.k2) {
            let weight = if homogeneous {
                if k2 == 0.0 {
                    continue;
                }
                if s == 0.0 {
                    1.0
                } else {
                    k2.powf(s)
                }
            } else if s == 0.0 {
                1.0
            } else {
                (1.0 + k2).powf(s)
            };
            total += weight * c.norm_sqr();
        }
    }
    total * grid.volume()
}

/// Validates an L^p exponent (`f64::INFINITY` for p = ∞).
pub fn check_exponent(p: f64) -> Result<()> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::param(format!("L^p exponent must satisfy p >= 1, got {p}")));
    }
    Ok(())
}

/// Quadrature L^p norm of physical samples with the given cell volume.
pub fn lp_norm_values(values: &[f64], p: f64, cell_volume: f64) -> f64 {
    if p.is_infinite() {
        return values.iter().map(|v| v.abs()).fold(0.0, f64::max);
    }
    if p == 1.0 {
        return values.iter().map(|v| v.abs()).sum::<f64>() * cell_volume;
    }
    if p == 2.0 {
        return (values.iter().map(|v| v * v).sum::<f64>() * cell_volume).sqrt();
    }
    // scale by the max to keep |v|^p in range
    let m = values.iter().map(|v| v.abs()).fold(0.0, f64::max);
    if m == 0.0 {
        return 0.0;
    }
    let s: f64 = values.iter().map(|v| (v.abs() / m).powf(p)).sum();
    m * (s * cell_volume).powf(1.0 / p)
}

/// Quadrature L^p norm over the grid, cell volume (2π/n)³; p = ∞ is the max.
pub fn lp_norm_physical(f: &SpectralField, p: f64) -> Result<f64> {
    check_exponent(p)?;
    let grid = f.grid();
    Ok(lp_norm_values(&f.transform_inverse(), p, grid.cell_volume()))
}

/// L^p norm evaluated on a grid refined by `oversample` (1 = native grid).
pub fn lp_norm_oversampled(f: &SpectralField, p: f64, oversample: usize) -> Result<f64> {
    check_exponent(p)?;
    let (fine, values) = f.to_physical_oversampled(oversample)?;
    Ok(lp_norm_values(&values, p, fine.cell_volume()))
}

/// Pointwise Euclidean magnitude of several physical component arrays.
pub(crate) fn pointwise_magnitude(comps: &[Vec<f64>]) -> Vec<f64> {
    let len = comps[0].len();
    (0..len)
        .map(|p| comps.iter().map(|c| c[p] * c[p]).sum::<f64>().sqrt())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use std::f64::consts::PI;

    #[test]
    fn single_mode_weight() {
        let g = Grid3::new(16).unwrap();
        let mut f = SpectralField::zeros(g);
        f.set_mode([2, 0, 0], Complex64::new(0.5, 0.0));
        let l2 = f.l2_norm();
        assert!((sobolev_norm(&f, 1.0, true) - 2.0 * l2).abs() < 1e-12 * l2);
        assert!((sobolev_norm(&f, 0.0, true) - l2).abs() < 1e-12 * l2);
    }

    #[test]
    fn homogeneous_excludes_mean() {
        let g = Grid3::new(8).unwrap();
        let f = SpectralField::constant(g, 2.0);
        assert_eq!(sobolev_norm(&f, 0.0, true), 0.0);
        let expected = 2.0 * (8.0 * PI.powi(3)).sqrt();
        assert!((sobolev_norm(&f, 2.0, false) - expected).abs() < 1e-12);
    }

    #[test]
    fn lp_of_constant_and_cosine() {
        let g = Grid3::new(16).unwrap();
        let one = SpectralField::constant(g, 1.0);
        for p in [1.0, 2.0, 3.5, 6.0] {
            let expect = (2.0 * PI).powf(3.0 / p);
            assert!((lp_norm_physical(&one, p).unwrap() - expect).abs() < 1e-10 * expect);
        }
        assert!((lp_norm_physical(&one, f64::INFINITY).unwrap() - 1.0).abs() < 1e-14);

        let c = SpectralField::from_fn(g, |x, _, _| x.cos());
        assert!((lp_norm_physical(&c, f64::INFINITY).unwrap() - 1.0).abs() < 1e-14);
        let expect = (4.0 * PI.powi(3)).sqrt();
        assert!((lp_norm_physical(&c, 2.0).unwrap() - expect).abs() < 1e-10);
    }

    #[test]
    fn lp_rejects_small_exponent() {
        let g = Grid3::new(8).unwrap();
        assert!(lp_norm_physical(&SpectralField::zeros(g), 0.5).is_err());
    }

    #[test]
    fn h1_equals_gradient_l2() {
        let g = Grid3::new(16).unwrap();
        let f = SpectralField::from_fn(g, |x, y, z| (x + 2.0 * y).sin() + (3.0 * z - y).cos() * x.cos());
        let grad = crate::spectral::VectorField::gradient(&f);
        assert!((sobolev_norm(&f, 1.0, true) - grad.l2_norm()).abs() < 1e-12 * grad.l2_norm());
    }
}
