use num_complex::Complex64;

use super::field::{product_raw, Axis, SpectralField};
use super::grid::Grid3;
use crate::error::{Error, Result};

/// Relative divergence tolerance for the solenoidal flag.
pub const SOLENOIDAL_TOL: f64 = 1e-12;

/// Three spectral components on a shared grid.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorField {
    comps: [SpectralField; 3],
    solenoidal: bool,
}

/// Quadratic nonlinearity formed in physical space.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProductKind {
    /// a × b
    Cross,
    /// (a·∇) b
    Advective,
}

/// How a quadratic product is finished after the pointwise multiply.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProductRule {
    /// 2/3-rule truncation.
    Dealiased,
    /// No truncation; exact only when the factors' combined bandwidth is below n/2.
    Raw,
}

impl VectorField {
    pub fn new(x: SpectralField, y: SpectralField, z: SpectralField) -> Result<Self> {
        x.check_same_grid(&y)?;
        x.check_same_grid(&z)?;
        Ok(Self {
            comps: [x, y, z],
            solenoidal: false,
        })
    }

    pub fn zeros(grid: Grid3) -> Self {
        Self {
            comps: [
                SpectralField::zeros(grid),
                SpectralField::zeros(grid),
                SpectralField::zeros(grid),
            ],
            solenoidal: true,
        }
    }

    pub fn from_fn(grid: Grid3, func: impl Fn(f64, f64, f64) -> [f64; 3]) -> Self {
        let x = SpectralField::from_fn(grid, |a, b, c| func(a, b, c)[0]);
        let y = SpectralField::from_fn(grid, |a, b, c| func(a, b, c)[1]);
        let z = SpectralField::from_fn(grid, |a, b, c| func(a, b, c)[2]);
        Self {
            comps: [x, y, z],
            solenoidal: false,
        }
    }

    /// Gradient of a scalar field.
    pub fn gradient(f: &SpectralField) -> Self {
        Self {
            comps: Axis::ALL.map(|a| f.derivative(a)),
            solenoidal: false,
        }
    }

    #[inline]
    pub fn grid(&self) -> Grid3 {
        self.comps[0].grid()
    }

    #[inline]
    pub fn x(&self) -> &SpectralField {
        &self.comps[0]
    }

    #[inline]
    pub fn y(&self) -> &SpectralField {
        &self.comps[1]
    }

    #[inline]
    pub fn z(&self) -> &SpectralField {
        &self.comps[2]
    }

    #[inline]
    pub fn components(&self) -> &[SpectralField; 3] {
        &self.comps
    }

    pub fn component(&self, axis: Axis) -> &SpectralField {
        &self.comps[axis.offset()]
    }

    pub fn into_components(self) -> [SpectralField; 3] {
        self.comps
    }

    pub fn is_solenoidal(&self) -> bool {
        self.solenoidal
    }

    /// Sets the flag after checking the divergence tolerance.
    pub fn mark_solenoidal(mut self) -> Result<Self> {
        let defect = self.divergence_defect();
        if defect > SOLENOIDAL_TOL {
            return Err(Error::Contract(format!(
                "field is not solenoidal: relative divergence {defect:e}"
            )));
        }
        self.solenoidal = true;
        Ok(self)
    }

    pub(crate) fn with_flag(mut self, solenoidal: bool) -> Self {
        self.solenoidal = solenoidal;
        self
    }

    pub fn check_same_grid(&self, other: &VectorField) -> Result<()> {
        self.comps[0].check_same_grid(&other.comps[0])
    }

    pub fn map(&self, f: impl Fn(&SpectralField) -> SpectralField) -> Self {
        Self {
            comps: [f(&self.comps[0]), f(&self.comps[1]), f(&self.comps[2])],
            solenoidal: self.solenoidal,
        }
    }

    pub fn divergence(&self) -> SpectralField {
        let mut d = self.comps[0].derivative(Axis::X);
        d += &self.comps[1].derivative(Axis::Y);
        d += &self.comps[2].derivative(Axis::Z);
        d
    }

    /// max_k |k·v̂(k)| / max_k |v̂(k)| (0 for the zero field).
    pub fn divergence_defect(&self) -> f64 {
        let t = self.grid().tables();
        let mut div_max: f64 = 0.0;
        let mut amp_max: f64 = 0.0;
        for idx in 0..self.grid().len() {
            let k = t.k_odd[idx];
            let mut dot = Complex64::default();
            for a in 0..3 {
                let c = self.comps[a].coeffs()[idx];
                dot += c * k[a];
                amp_max = amp_max.max(c.norm());
            }
            div_max = div_max.max(dot.norm());
        }
        if amp_max == 0.0 {
            0.0
        } else {
            div_max / amp_max
        }
    }

    pub fn curl(&self) -> Self {
        let [vx, vy, vz] = &self.comps;
        let cx = &vz.derivative(Axis::Y) - &vy.derivative(Axis::Z);
        let cy = &vx.derivative(Axis::Z) - &vz.derivative(Axis::X);
        let cz = &vy.derivative(Axis::X) - &vx.derivative(Axis::Y);
        Self {
            comps: [cx, cy, cz],
            solenoidal: true,
        }
    }

    /// Leray projection `v̂ − k(k·v̂)/|k|²`, mode by mode.
    ///
    /// Uses the same Nyquist-zeroed wavevector as `derivative`, so the result is
    /// divergence free under the discrete divergence. Modes whose odd wavevector
    /// vanishes (k = 0 and pure Nyquist modes) pass unchanged.
    pub fn project_leray(&self) -> Self {
        let grid = self.grid();
        let t = grid.tables();
        let mut out = self.comps.clone();
        for idx in 0..grid.len() {
            let k = t.k_odd[idx];
            let kk = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
            if kk == 0.0 {
                continue;
            }
            let v = [
                self.comps[0].coeffs()[idx],
                self.comps[1].coeffs()[idx],
                self.comps[2].coeffs()[idx],
            ];
            let dot = (v[0] * k[0] + v[1] * k[1] + v[2] * k[2]) / kk;
            for a in 0..3 {
                out[a].coeffs_mut()[idx] = v[a] - dot * k[a];
            }
        }
        Self {
            comps: out,
            solenoidal: true,
        }
    }

    pub fn dealias(&mut self) {
        for c in &mut self.comps {
            c.dealias();
        }
    }

    pub fn enforce_hermitian(&mut self) {
        for c in &mut self.comps {
            c.enforce_hermitian();
        }
    }

    pub fn scale(&self, factor: f64) -> Self {
        self.map(|c| c.scale(factor))
    }

    pub fn add(&self, other: &VectorField) -> Self {
        Self {
            comps: [
                &self.comps[0] + &other.comps[0],
                &self.comps[1] + &other.comps[1],
                &self.comps[2] + &other.comps[2],
            ],
            solenoidal: self.solenoidal && other.solenoidal,
        }
    }

    pub fn sub(&self, other: &VectorField) -> Self {
        Self {
            comps: [
                &self.comps[0] - &other.comps[0],
                &self.comps[1] - &other.comps[1],
                &self.comps[2] - &other.comps[2],
            ],
            solenoidal: self.solenoidal && other.solenoidal,
        }
    }

    /// `self += factor · other`; the solenoidal flag survives if both carry it.
    pub fn axpy(&mut self, factor: f64, other: &VectorField) {
        for (a, b) in self.comps.iter_mut().zip(&other.comps) {
            a.axpy(factor, b);
        }
        self.solenoidal = self.solenoidal && other.solenoidal;
    }

    /// Σ_i ⟨a_i, b_i⟩ over the torus.
    pub fn inner(&self, other: &VectorField) -> f64 {
        self.comps
            .iter()
            .zip(&other.comps)
            .map(|(a, b)| a.inner(b))
            .sum()
    }

    pub fn l2_norm(&self) -> f64 {
        self.inner(self).max(0.0).sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.comps.iter().all(SpectralField::is_finite)
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.comps
            .iter()
            .map(SpectralField::max_abs_coeff)
            .fold(0.0, f64::max)
    }

    /// Physical samples of each component.
    pub fn to_physical(&self) -> [Vec<f64>; 3] {
        [
            self.comps[0].transform_inverse(),
            self.comps[1].transform_inverse(),
            self.comps[2].transform_inverse(),
        ]
    }

    /// max_x |v(x)| on the grid.
    pub fn max_magnitude(&self) -> f64 {
        let [a, b, c] = self.to_physical();
        a.iter()
            .zip(&b)
            .zip(&c)
            .map(|((x, y), z)| (x * x + y * y + z * z).sqrt())
            .fold(0.0, f64::max)
    }
}

pub(crate) fn physical_cross(a: &[Vec<f64>; 3], b: &[Vec<f64>; 3]) -> [Vec<f64>; 3] {
    let len = a[0].len();
    let mut out = [vec![0.0; len], vec![0.0; len], vec![0.0; len]];
    for p in 0..len {
        out[0][p] = a[1][p] * b[2][p] - a[2][p] * b[1][p];
        out[1][p] = a[2][p] * b[0][p] - a[0][p] * b[2][p];
        out[2][p] = a[0][p] * b[1][p] - a[1][p] * b[0][p];
    }
    out
}

pub(crate) fn finish_product(
    grid: Grid3,
    values: [Vec<f64>; 3],
    rule: ProductRule,
) -> VectorField {
    let comps = values.map(|v| {
        let mut f = SpectralField::transform_forward(&v, grid).expect("product matches grid");
        if rule == ProductRule::Dealiased {
            f.dealias();
        }
        f
    });
    VectorField {
        comps,
        solenoidal: false,
    }
}

/// `a × b` or `(a·∇) b`, formed pointwise and transformed back, then
/// 2/3-rule dealiased.
pub fn nonlinear_product(a: &VectorField, b: &VectorField, kind: ProductKind) -> Result<VectorField> {
    nonlinear_product_with(a, b, kind, ProductRule::Dealiased)
}

pub fn nonlinear_product_with(
    a: &VectorField,
    b: &VectorField,
    kind: ProductKind,
    rule: ProductRule,
) -> Result<VectorField> {
    a.check_same_grid(b)?;
    let grid = a.grid();
    let pa = a.to_physical();
    let values = match kind {
        ProductKind::Cross => physical_cross(&pa, &b.to_physical()),
        ProductKind::Advective => advect_physical(&pa, b),
    };
    Ok(finish_product(grid, values, rule))
}

/// Physical samples of (a·∇) b given a in physical space.
pub(crate) fn advect_physical(a: &[Vec<f64>; 3], b: &VectorField) -> [Vec<f64>; 3] {
    let len = a[0].len();
    let mut out = [vec![0.0; len], vec![0.0; len], vec![0.0; len]];
    for (i, comp) in b.components().iter().enumerate() {
        for axis in Axis::ALL {
            let d = comp.derivative(axis).transform_inverse();
            let w = &a[axis.offset()];
            for p in 0..len {
                out[i][p] += w[p] * d[p];
            }
        }
    }
    out
}

/// Scalar product f·g with the given finishing rule.
pub fn scalar_product(f: &SpectralField, g: &SpectralField, rule: ProductRule) -> Result<SpectralField> {
    f.check_same_grid(g)?;
    let mut out = product_raw(f.grid(), &f.transform_inverse(), &g.transform_inverse());
    if rule == ProductRule::Dealiased {
        out.dealias();
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize) -> Grid3 {
        Grid3::new(n).unwrap()
    }

    fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn curl_of_gradient_vanishes() {
        let g = grid(16);
        let f = SpectralField::from_fn(g, |x, y, z| (2.0 * x).sin() * y.cos() + (x + 3.0 * z).cos());
        let c = VectorField::gradient(&f).curl();
        assert!(c.max_abs_coeff() < 1e-12);
    }

    #[test]
    fn curl_of_shear() {
        let g = grid(16);
        let v = VectorField::from_fn(g, |_, _, z| [z.sin(), 0.0, 0.0]);
        let c = v.curl();
        let expect = SpectralField::from_fn(g, |_, _, z| z.cos()).transform_inverse();
        let [cx, cy, cz] = c.to_physical();
        assert!(cx.iter().all(|v| v.abs() < 1e-12));
        assert!(cz.iter().all(|v| v.abs() < 1e-12));
        assert!(max_abs_diff(&cy, &expect) < 1e-12);
        assert!(c.is_solenoidal());
        assert!(c.divergence_defect() < 1e-12);
    }

    #[test]
    fn curl_curl_is_minus_laplacian_on_solenoidal() {
        let g = grid(16);
        let v = VectorField::from_fn(g, |x, y, z| {
            [y.sin() + (2.0 * z).cos(), (3.0 * x).cos() * z.sin(), (x + y).sin()]
        })
        .project_leray();
        let cc = v.curl().curl();
        let lap = v.map(|c| c.laplacian());
        let diff = cc.sub(&lap.scale(-1.0));
        assert!(diff.max_abs_coeff() < 1e-12);
    }

    #[test]
    fn leray_kills_gradients_and_keeps_transverse_modes() {
        let g = grid(16);
        let f = SpectralField::from_fn(g, |x, y, z| (x + 2.0 * y).sin() * z.cos());
        let p = VectorField::gradient(&f).project_leray();
        assert!(p.max_abs_coeff() < 1e-13);

        let v = VectorField::from_fn(g, |_, y, _| [y.cos(), 0.0, 0.0]);
        let w = v.project_leray();
        assert!(w.sub(&v).max_abs_coeff() < 1e-15);
    }

    #[test]
    fn leray_is_idempotent() {
        let g = grid(16);
        let v = VectorField::from_fn(g, |x, y, z| [x.sin() * y.cos(), z.cos(), (x - z).sin()]);
        let p = v.project_leray();
        assert!(p.project_leray().sub(&p).max_abs_coeff() < 1e-12);
        assert!(p.divergence_defect() < 1e-12);
    }

    #[test]
    fn self_cross_is_zero_and_zero_advection_is_zero() {
        let g = grid(16);
        let v = VectorField::from_fn(g, |x, y, z| [x.sin(), (y + z).cos(), z.sin()]);
        let c = nonlinear_product(&v, &v, ProductKind::Cross).unwrap();
        assert!(c.max_abs_coeff() < 1e-15);
        let a = nonlinear_product(&VectorField::zeros(g), &v, ProductKind::Advective).unwrap();
        assert_eq!(a.max_abs_coeff(), 0.0);
    }

    #[test]
    fn cross_with_constant_field() {
        let g = grid(16);
        let a = VectorField::from_fn(g, |_, _, _| [1.0, 0.0, 0.0]);
        let b = VectorField::from_fn(g, |x, _, _| [0.0, x.cos(), 0.0]);
        let c = nonlinear_product(&a, &b, ProductKind::Cross).unwrap();
        let [cx, cy, cz] = c.to_physical();
        let expect = SpectralField::from_fn(g, |x, _, _| x.cos()).transform_inverse();
        assert!(cx.iter().chain(&cy).all(|v| v.abs() < 1e-14));
        assert!(max_abs_diff(&cz, &expect) < 1e-14);
    }

    #[test]
    fn product_grid_mismatch() {
        let a = VectorField::zeros(grid(8));
        let b = VectorField::zeros(grid(16));
        assert!(matches!(
            nonlinear_product(&a, &b, ProductKind::Cross),
            Err(Error::GridMismatch { .. })
        ));
    }

    #[test]
    fn mark_solenoidal_rejects_gradients() {
        let g = grid(8);
        let f = SpectralField::from_fn(g, |x, _, _| x.sin());
        assert!(VectorField::gradient(&f).mark_solenoidal().is_err());
    }
}
