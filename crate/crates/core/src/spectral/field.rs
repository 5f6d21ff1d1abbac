use std::ops::{Add, AddAssign, Neg, Sub, SubAssign};

use num_complex::Complex64;

use super::fft;
use super::grid::Grid3;
use crate::error::{Error, Result};

/// Coordinate axis for differentiation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    /// Axis from a 1-based index (1 = x, 2 = y, 3 = z).
    pub fn from_index(i: usize) -> Result<Self> {
        match i {
            1 => Ok(Axis::X),
            2 => Ok(Axis::Y),
            3 => Ok(Axis::Z),
            _ => Err(Error::param(format!("axis must be 1, 2 or 3, got {i}"))),
        }
    }

    #[inline]
    pub fn offset(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
            Axis::Z => 2,
        }
    }
}

/// Fourier coefficients of a scalar field on the periodic grid.
///
/// Coefficients are stored in FFT order and normalised so that
/// `f(x) = Σ_k f̂(k) e^{ik·x}`. Fields produced from real physical data
/// are kept Hermitian: `f̂(−k) = conj f̂(k)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralField {
    grid: Grid3,
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn zeros(grid: Grid3) -> Self {
        Self {
            grid,
            coeffs: vec![Complex64::default(); grid.len()],
        }
    }

    pub fn constant(grid: Grid3, value: f64) -> Self {
        let mut f = Self::zeros(grid);
        f.coeffs[0] = Complex64::new(value, 0.0);
        f
    }

    pub fn from_coeffs(grid: Grid3, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(Error::Shape {
                expected: grid.len(),
                got: coeffs.len(),
            });
        }
        Ok(Self { grid, coeffs })
    }

    /// Forward transform of real physical samples.
    pub fn transform_forward(values: &[f64], grid: Grid3) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Shape {
                expected: grid.len(),
                got: values.len(),
            });
        }
        let mut f = Self {
            grid,
            coeffs: fft::forward_real(grid, values),
        };
        f.enforce_hermitian();
        Ok(f)
    }

    /// Samples `func(x, y, z)` on the grid and transforms.
    pub fn from_fn(grid: Grid3, func: impl Fn(f64, f64, f64) -> f64) -> Self {
        let n = grid.n();
        let mut values = Vec::with_capacity(grid.len());
        for i in 0..n {
            let x = grid.coordinate(i);
            for j in 0..n {
                let y = grid.coordinate(j);
                for l in 0..n {
                    values.push(func(x, y, grid.coordinate(l)));
                }
            }
        }
        Self::transform_forward(&values, grid).expect("sampled values match grid")
    }

    /// Inverse transform to physical samples.
    pub fn transform_inverse(&self) -> Vec<f64> {
        fft::inverse_real(self.grid, &self.coeffs)
    }

    /// Physical samples on a grid refined by `factor` (spectral zero padding).
    pub fn to_physical_oversampled(&self, factor: usize) -> Result<(Grid3, Vec<f64>)> {
        if factor == 0 {
            return Err(Error::param("oversampling factor must be >= 1"));
        }
        if factor == 1 {
            return Ok((self.grid, self.transform_inverse()));
        }
        let fine = Grid3::new(self.grid.n() * factor)?;
        let half = (self.grid.n() / 2) as i64;
        let mut padded = vec![Complex64::default(); fine.len()];
        for (idx, &c) in self.coeffs.iter().enumerate() {
            if c == Complex64::default() {
                continue;
            }
            let k = self.grid.wavevector(idx);
            // Nyquist content is split evenly between ±n/2 on the fine grid.
            let options: Vec<Vec<i64>> = k
                .iter()
                .map(|&c| if c == half { vec![half, -half] } else { vec![c] })
                .collect();
            let weight = 1.0 / (options.iter().map(Vec::len).product::<usize>() as f64);
            for &a in &options[0] {
                for &b in &options[1] {
                    for &d in &options[2] {
                        padded[fine.index_of([a, b, d])] += c * weight;
                    }
                }
            }
        }
        Ok((fine, fft::inverse_real(fine, &padded)))
    }

    #[inline]
    pub fn grid(&self) -> Grid3 {
        self.grid
    }

    #[inline]
    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    #[inline]
    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    pub fn coeff(&self, k: [i64; 3]) -> Complex64 {
        self.coeffs[self.grid.index_of(k)]
    }

    /// Sets `f̂(k)` and its Hermitian partner `f̂(−k)`.
    pub fn set_mode(&mut self, k: [i64; 3], value: Complex64) {
        let idx = self.grid.index_of(k);
        let mirror = self.grid.index_of([-k[0], -k[1], -k[2]]);
        if idx == mirror {
            self.coeffs[idx] = Complex64::new(value.re, 0.0);
        } else {
            self.coeffs[idx] = value;
            self.coeffs[mirror] = value.conj();
        }
    }

    pub fn mean(&self) -> f64 {
        self.coeffs[0].re
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn check_same_grid(&self, other: &SpectralField) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch {
                left: self.grid.n(),
                right: other.grid.n(),
            });
        }
        Ok(())
    }

    /// Pointwise multiplication by a real per-mode multiplier.
    pub fn apply_multiplier(&self, multiplier: &[f64]) -> Self {
        debug_assert_eq!(multiplier.len(), self.coeffs.len());
        let coeffs = self
            .coeffs
            .iter()
            .zip(multiplier)
            .map(|(c, &m)| c * m)
            .collect();
        Self {
            grid: self.grid,
            coeffs,
        }
    }

    /// Multiplication by a multiplier given as a function of `|k|²`.
    pub fn apply_radial(&self, m: impl Fn(f64) -> f64) -> Self {
        let t = self.grid.tables();
        let coeffs = self
            .coeffs
            .iter()
            .zip(&t.k2)
            .map(|(c, &k2)| c * m(k2))
            .collect();
        Self {
            grid: self.grid,
            coeffs,
        }
    }

    /// ∂/∂axis: multiplies by `i k_axis`; the Nyquist plane of that axis is zeroed.
    pub fn derivative(&self, axis: Axis) -> Self {
        let t = self.grid.tables();
        let a = axis.offset();
        let coeffs = self
            .coeffs
            .iter()
            .zip(&t.k_odd)
            .map(|(c, k)| Complex64::new(-c.im * k[a], c.re * k[a]))
            .collect();
        Self {
            grid: self.grid,
            coeffs,
        }
    }

    pub fn laplacian(&self) -> Self {
        self.apply_radial(|k2| -k2)
    }

    /// Zeroes every mode with some |k_i| ≥ (2/3)·k_max.
    pub fn dealias(&mut self) {
        let t = self.grid.tables();
        for (c, &keep) in self.coeffs.iter_mut().zip(&t.keep) {
            if !keep {
                *c = Complex64::default();
            }
        }
    }

    /// Symmetrises the coefficients so the physical field is real.
    pub fn enforce_hermitian(&mut self) {
        let t = self.grid.tables();
        for idx in 0..self.coeffs.len() {
            let m = t.mirror[idx];
            if m < idx {
                continue;
            }
            if m == idx {
                self.coeffs[idx].im = 0.0;
            } else {
                let avg = (self.coeffs[idx] + self.coeffs[m].conj()) * 0.5;
                self.coeffs[idx] = avg;
                self.coeffs[m] = avg.conj();
            }
        }
    }

    /// max_k |f̂(−k) − conj f̂(k)|.
    pub fn hermitian_defect(&self) -> f64 {
        let t = self.grid.tables();
        self.coeffs
            .iter()
            .enumerate()
            .map(|(idx, c)| (self.coeffs[t.mirror[idx]] - c.conj()).norm())
            .fold(0.0, f64::max)
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self {
            grid: self.grid,
            coeffs: self.coeffs.iter().map(|c| c * factor).collect(),
        }
    }

    /// `self += factor · other` on a shared grid.
    pub fn axpy(&mut self, factor: f64, other: &SpectralField) {
        debug_assert_eq!(self.grid, other.grid);
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += b * factor;
        }
    }

    /// L² inner product over the torus, `∫ f g dx = (2π)³ Σ_k Re f̂(k) conj ĝ(k)`.
    pub fn inner(&self, other: &SpectralField) -> f64 {
        debug_assert_eq!(self.grid, other.grid);
        let s: f64 = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a.re * b.re + a.im * b.im)
            .sum();
        s * self.grid.volume()
    }

    pub fn l2_norm(&self) -> f64 {
        self.inner(self).max(0.0).sqrt()
    }
}

impl Add<&SpectralField> for &SpectralField {
    type Output = SpectralField;
    fn add(self, rhs: &SpectralField) -> SpectralField {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Sub<&SpectralField> for &SpectralField {
    type Output = SpectralField;
    fn sub(self, rhs: &SpectralField) -> SpectralField {
        let mut out = self.clone();
        out -= rhs;
        out
    }
}

impl AddAssign<&SpectralField> for SpectralField {
    fn add_assign(&mut self, rhs: &SpectralField) {
        debug_assert_eq!(self.grid, rhs.grid);
        for (a, b) in self.coeffs.iter_mut().zip(&rhs.coeffs) {
            *a += b;
        }
    }
}

impl SubAssign<&SpectralField> for SpectralField {
    fn sub_assign(&mut self, rhs: &SpectralField) {
        debug_assert_eq!(self.grid, rhs.grid);
        for (a, b) in self.coeffs.iter_mut().zip(&rhs.coeffs) {
            *a -= b;
        }
    }
}

impl Neg for &SpectralField {
    type Output = SpectralField;
    fn neg(self) -> SpectralField {
        self.scale(-1.0)
    }
}

/// Pointwise product of physical samples, transformed back. No dealiasing.
pub(crate) fn product_raw(grid: Grid3, a: &[f64], b: &[f64]) -> SpectralField {
    let values: Vec<f64> = a.iter().zip(b).map(|(x, y)| x * y).collect();
    SpectralField::transform_forward(&values, grid).expect("product matches grid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn grid(n: usize) -> Grid3 {
        Grid3::new(n).unwrap()
    }

    #[test]
    fn constant_field_has_only_dc() {
        let g = grid(8);
        let f = SpectralField::transform_forward(&vec![1.0; g.len()], g).unwrap();
        assert!((f.coeffs()[0].re - 1.0).abs() < 1e-15);
        assert!(f.coeffs()[1..].iter().all(|c| c.norm() < 1e-15));
    }

    #[test]
    fn cosine_splits_into_two_half_modes() {
        let g = grid(16);
        let f = SpectralField::from_fn(g, |x, _, _| x.cos());
        for (idx, c) in f.coeffs().iter().enumerate() {
            let k = g.wavevector(idx);
            let expected = if k == [1, 0, 0] || k == [-1, 0, 0] { 0.5 } else { 0.0 };
            assert!((c.re - expected).abs() < 1e-14 && c.im.abs() < 1e-14, "{k:?}");
        }
    }

    #[test]
    fn shape_mismatch_is_reported() {
        let g = grid(8);
        assert!(matches!(
            SpectralField::transform_forward(&[0.0; 10], g),
            Err(Error::Shape { expected: 512, got: 10 })
        ));
    }

    #[test]
    fn derivative_of_sine_and_constant() {
        let g = grid(16);
        let f = SpectralField::from_fn(g, |x, _, _| x.sin());
        let d = f.derivative(Axis::X).transform_inverse();
        let expect = SpectralField::from_fn(g, |x, _, _| x.cos()).transform_inverse();
        let err = d.iter().zip(&expect).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err < 1e-12);

        let c = SpectralField::constant(g, 3.0).derivative(Axis::Y);
        assert_eq!(c.max_abs_coeff(), 0.0);
    }

    #[test]
    fn derivative_of_mixed_product() {
        let g = grid(16);
        let f = SpectralField::from_fn(g, |x, y, _| (3.0 * x).sin() * (2.0 * y).cos());
        let d = f.derivative(Axis::X).transform_inverse();
        let n = g.n();
        let mut err: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                for l in 0..n {
                    let (x, y) = (g.coordinate(i), g.coordinate(j));
                    let exact = 3.0 * (3.0 * x).cos() * (2.0 * y).cos();
                    err = err.max((d[g.flat_index(i, j, l)] - exact).abs());
                }
            }
        }
        assert!(err < 1e-12, "{err}");
    }

    #[test]
    fn derivative_zeroes_nyquist_plane() {
        let g = grid(8);
        let f = SpectralField::from_fn(g, |x, _, _| (4.0 * x).cos());
        assert!(f.coeff([4, 0, 0]).norm() > 0.5);
        assert_eq!(f.derivative(Axis::X).max_abs_coeff(), 0.0);
    }

    #[test]
    fn oversampled_samples_interpolate_trig_polynomial() {
        let g = grid(8);
        let f = SpectralField::from_fn(g, |x, y, z| x.cos() + (2.0 * y).sin() * z.cos());
        let (fine, vals) = f.to_physical_oversampled(2).unwrap();
        let n = fine.n();
        for i in (0..n).step_by(3) {
            for j in (0..n).step_by(5) {
                for l in 0..n {
                    let (x, y, z) = (fine.coordinate(i), fine.coordinate(j), fine.coordinate(l));
                    let exact = x.cos() + (2.0 * y).sin() * z.cos();
                    assert!((vals[fine.flat_index(i, j, l)] - exact).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn oversampling_preserves_nyquist_cosine() {
        let g = grid(8);
        let f = SpectralField::from_fn(g, |x, _, _| (4.0 * x).cos());
        let (fine, vals) = f.to_physical_oversampled(2).unwrap();
        let x = fine.coordinate(1);
        assert!((vals[fine.flat_index(1, 0, 0)] - (4.0 * x).cos()).abs() < 1e-12);
    }

    #[test]
    fn l2_norm_of_cosine() {
        let g = grid(16);
        let f = SpectralField::from_fn(g, |x, _, _| x.cos());
        assert!((f.l2_norm() - (4.0 * PI.powi(3)).sqrt()).abs() < 1e-10);
    }
}
