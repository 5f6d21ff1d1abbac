use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{Grid3, VectorField, SOLENOIDAL_TOL};

/// Viscosity ν, resistivity η, electron inertia α and Hall coefficient h.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PhysParams {
    pub nu: f64,
    pub eta: f64,
    pub alpha: f64,
    pub hall: f64,
}

impl PhysParams {
    pub fn new(nu: f64, eta: f64, alpha: f64, hall: f64) -> Result<Self> {
        let p = Self { nu, eta, alpha, hall };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("nu", self.nu),
            ("eta", self.eta),
            ("alpha", self.alpha),
            ("hall", self.hall),
        ] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::param(format!("{name} must be finite and >= 0, got {v}")));
            }
        }
        Ok(())
    }

    /// Decay rate of the velocity mode with squared wavenumber `k2`.
    #[inline]
    pub fn velocity_rate(&self, k2: f64) -> f64 {
        -self.nu * k2
    }

    /// Decay rate of the magnetic mode, screened by the electron inertia.
    #[inline]
    pub fn magnetic_rate(&self, k2: f64) -> f64 {
        -self.eta * k2 / (1.0 + self.alpha * k2)
    }
}

/// Velocity, magnetic field, time and parameters of one trajectory.
#[derive(Clone, Debug, PartialEq)]
pub struct SolverState {
    pub u: VectorField,
    pub b: VectorField,
    pub t: f64,
    pub params: PhysParams,
}

impl SolverState {
    /// Checks grids, parameters and solenoidality.
    pub fn new(u: VectorField, b: VectorField, t: f64, params: PhysParams) -> Result<Self> {
        u.check_same_grid(&b)?;
        params.validate()?;
        if !t.is_finite() {
            return Err(Error::param("time must be finite"));
        }
        for (name, f) in [("u", &u), ("b", &b)] {
            let d = f.divergence_defect();
            if d > SOLENOIDAL_TOL {
                return Err(Error::Contract(format!(
                    "{name} is not divergence-free (relative defect {d:.3e})"
                )));
            }
        }
        let u = u.mark_solenoidal()?;
        let b = b.mark_solenoidal()?;
        Ok(Self { u, b, t, params })
    }

    pub fn zeros(grid: Grid3, params: PhysParams) -> Self {
        Self {
            u: VectorField::zeros(grid),
            b: VectorField::zeros(grid),
            t: 0.0,
            params,
        }
    }

    pub fn grid(&self) -> Grid3 {
        self.u.grid()
    }

    pub fn is_finite(&self) -> bool {
        self.t.is_finite() && self.u.is_finite() && self.b.is_finite()
    }

    /// ‖u‖₂² + ‖b‖₂² + α‖∇b‖₂².
    pub fn modified_energy(&self) -> f64 {
        self.u.inner(&self.u) + magnetic_energy(&self.b, self.params.alpha)
    }

    /// 2(ν‖∇u‖₂² + η‖∇b‖₂²), the dissipation rate of the modified energy.
    pub fn dissipation(&self) -> f64 {
        2.0 * (self.params.nu * gradient_sq(&self.u) + self.params.eta * gradient_sq(&self.b))
    }
}

/// ‖b‖₂² + α‖∇b‖₂².
pub(crate) fn magnetic_energy(b: &VectorField, alpha: f64) -> f64 {
    let t = b.grid().tables();
    let mut acc = 0.0;
    for comp in b.components() {
        for (c, &k2) in comp.coeffs().iter().zip(&t.k2) {
            acc += (1.0 + alpha * k2) * c.norm_sqr();
        }
    }
    acc * b.grid().volume()
}

/// ‖∇v‖₂².
pub(crate) fn gradient_sq(v: &VectorField) -> f64 {
    crate::spectral::sobolev_norm_sq(v, 1.0, true)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parameter_validation() {
        assert!(PhysParams::new(0.1, 0.0, 0.0, 0.0).is_ok());
        assert!(PhysParams::new(-0.1, 0.0, 0.0, 0.0).is_err());
        assert!(PhysParams::new(0.0, f64::NAN, 0.0, 0.0).is_err());
        assert!(PhysParams::new(0.0, 0.0, f64::INFINITY, 0.0).is_err());
    }

    #[test]
    fn rejects_compressive_velocity() {
        let g = Grid3::new(8).unwrap();
        let u = VectorField::from_fn(g, |x, _, _| [x.sin(), 0.0, 0.0]);
        let err = SolverState::new(u, VectorField::zeros(g), 0.0, PhysParams::default()).unwrap_err();
        assert!(matches!(err, Error::Contract(_)));
    }

    #[test]
    fn solenoidal_check_ignores_amplitude() {
        let g = Grid3::new(16).unwrap();
        let u = VectorField::from_fn(g, |x, y, _| [x.sin() * y.cos(), -x.cos() * y.sin(), 0.0]);
        for a in [1e-9, 1.0, 1e9] {
            assert!(SolverState::new(u.scale(a), u.scale(a), 0.0, PhysParams::default()).is_ok(), "a = {a}");
        }
        let w = VectorField::from_fn(g, |x, _, _| [1e-9 * x.sin(), 0.0, 0.0]);
        assert!(SolverState::new(w, VectorField::zeros(g), 0.0, PhysParams::default()).is_err());
    }

    #[test]
    fn modified_energy_of_single_mode() {
        let g = Grid3::new(8).unwrap();
        let b = VectorField::from_fn(g, |x, _, _| [0.0, (2.0 * x).cos(), 0.0]);
        let p = PhysParams::new(0.0, 0.5, 0.25, 0.0).unwrap();
        let s = SolverState::new(VectorField::zeros(g), b.clone(), 0.0, p).unwrap();
        let l2 = b.inner(&b);
        assert!((s.modified_energy() - 2.0 * l2).abs() < 1e-12 * l2);
        assert!((s.dissipation() - 2.0 * 0.5 * 4.0 * l2).abs() < 1e-12 * l2);
    }
}
