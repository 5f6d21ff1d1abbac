use super::state::{PhysParams, SolverState};
use crate::error::{Error, Result};
use crate::spectral::{finish_product, physical_cross, ProductRule, VectorField};

/// (1 − αΔ)^{-1}: every mode divided by 1 + α|k|².
pub fn helmholtz_invert(f: &VectorField, alpha: f64) -> Result<VectorField> {
    if !(alpha >= 0.0) || !alpha.is_finite() {
        return Err(Error::param(format!("alpha must be finite and >= 0, got {alpha}")));
    }
    if alpha == 0.0 {
        return Ok(f.clone());
    }
    Ok(f.map(|c| c.apply_radial(|k2| 1.0 / (1.0 + alpha * k2))))
}

/// Separate pieces of the right-hand side, all dealiased.
#[derive(Clone, Debug)]
pub struct RhsTerms {
    /// P(−ω×u)
    pub advection: VectorField,
    /// P(J×b)
    pub lorentz: VectorField,
    /// ∇×(u×b)
    pub induction: VectorField,
    /// −h∇×(J×b)
    pub hall: VectorField,
    /// ⟨∇×(J×b), b⟩
    pub hall_inner: f64,
    /// ‖J‖₂‖b‖₂ max|b|, the natural size of `hall_inner`.
    pub hall_scale: f64,
    pub max_u: f64,
    pub max_b: f64,
}

impl RhsTerms {
    /// Nonlinear velocity tendency P(−ω×u + J×b).
    pub fn velocity(&self) -> VectorField {
        self.advection.add(&self.lorentz).with_flag(true)
    }

    /// Nonlinear magnetic tendency (1−αΔ)^{-1}[∇×(u×b) − h∇×(J×b)].
    pub fn magnetic(&self, alpha: f64) -> VectorField {
        let sum = self.induction.add(&self.hall);
        helmholtz_invert(&sum, alpha).expect("validated alpha").with_flag(true)
    }
}

fn max_norm(p: &[Vec<f64>; 3]) -> f64 {
    (0..p[0].len())
        .map(|i| (p[0][i] * p[0][i] + p[1][i] * p[1][i] + p[2][i] * p[2][i]).sqrt())
        .fold(0.0, f64::max)
}

pub fn rhs_terms(u: &VectorField, b: &VectorField, params: &PhysParams) -> Result<RhsTerms> {
    u.check_same_grid(b)?;
    let grid = u.grid();
    let omega = u.curl();
    let current = b.curl();
    let pu = u.to_physical();
    let pb = b.to_physical();
    let pw = omega.to_physical();
    let pj = current.to_physical();
    let rule = ProductRule::Dealiased;

    let w_cross_u = finish_product(grid, physical_cross(&pw, &pu), rule);
    let j_cross_b = finish_product(grid, physical_cross(&pj, &pb), rule);
    let u_cross_b = finish_product(grid, physical_cross(&pu, &pb), rule);

    let advection = w_cross_u.scale(-1.0).project_leray();
    let lorentz = j_cross_b.project_leray();
    let induction = u_cross_b.curl();
    let hall_curl = j_cross_b.curl();
    let hall_inner = hall_curl.inner(b);
    let max_b = max_norm(&pb);
    let hall_scale = current.l2_norm() * b.l2_norm() * max_b;
    let hall = hall_curl.scale(-params.hall).with_flag(true);

    let terms = RhsTerms {
        advection,
        lorentz,
        induction,
        hall,
        hall_inner,
        hall_scale,
        max_u: max_norm(&pu),
        max_b,
    };
    if !(terms.advection.is_finite()
        && terms.lorentz.is_finite()
        && terms.induction.is_finite()
        && terms.hall.is_finite())
    {
        return Err(Error::BlowUp {
            t: f64::NAN,
            reason: "non-finite nonlinear terms".into(),
        });
    }
    Ok(terms)
}

/// Full tendencies (du, db) of the state.
pub fn rhs(state: &SolverState) -> Result<(VectorField, VectorField)> {
    let p = &state.params;
    let terms = rhs_terms(&state.u, &state.b, p).map_err(|e| match e {
        Error::BlowUp { reason, .. } => Error::BlowUp { t: state.t, reason },
        other => other,
    })?;
    let du = state
        .u
        .map(|c| c.apply_radial(|k2| p.velocity_rate(k2)))
        .add(&terms.velocity())
        .with_flag(true);
    let db = state
        .b
        .map(|c| c.apply_radial(|k2| p.magnetic_rate(k2)))
        .add(&terms.magnetic(p.alpha))
        .with_flag(true);
    Ok((du, db))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::random::{random_solenoidal, rng_from_seed, SpectralBand};
    use crate::spectral::{nonlinear_product, Grid3, ProductKind};

    fn grid() -> Grid3 {
        Grid3::new(16).unwrap()
    }

    #[test]
    fn helmholtz_cases() {
        let g = grid();
        let f = VectorField::from_fn(g, |x, _, _| [0.0, (2.0 * x).sin(), 1.0]);
        assert_eq!(helmholtz_invert(&f, 0.0).unwrap(), f);
        let h = helmholtz_invert(&f, 0.25).unwrap();
        let expect = VectorField::from_fn(g, |x, _, _| [0.0, 0.5 * (2.0 * x).sin(), 1.0]);
        assert!(h.sub(&expect).max_abs_coeff() < 1e-14);
        assert!(helmholtz_invert(&f, -1.0).is_err());
    }

    #[test]
    fn zero_state_has_zero_tendency() {
        let p = PhysParams::new(0.1, 0.1, 1.0, 1.0).unwrap();
        let s = SolverState::zeros(grid(), p);
        let (du, db) = rhs(&s).unwrap();
        assert_eq!(du.max_abs_coeff(), 0.0);
        assert_eq!(db.max_abs_coeff(), 0.0);
    }

    #[test]
    fn beltrami_magnetic_mode() {
        // b = (sin z, cos z, 0) has curl b = b
        let g = grid();
        let b = VectorField::from_fn(g, |_, _, z| [z.sin(), z.cos(), 0.0]);
        let (eta, alpha) = (0.3, 1.0);
        let p = PhysParams::new(0.0, eta, alpha, 2.0).unwrap();
        let s = SolverState::new(VectorField::zeros(g), b.clone(), 0.0, p).unwrap();
        let (du, db) = rhs(&s).unwrap();
        let expect = b.scale(-eta / (1.0 + alpha));
        assert!(db.sub(&expect).max_abs_coeff() < 1e-13);
        assert!(du.max_abs_coeff() < 1e-13);
    }

    #[test]
    fn energy_neutral_nonlinearities() {
        let g = grid();
        let mut rng = rng_from_seed(11);
        let band = SpectralBand::new(1.0, 4.0, -1.0);
        let u = random_solenoidal(g, band, &mut rng);
        let b = random_solenoidal(g, band, &mut rng);
        let p = PhysParams::new(0.0, 0.0, 0.0, 1.0).unwrap();
        let t = rhs_terms(&u, &b, &p).unwrap();
        let scale = u.inner(&u) * t.max_u;
        assert!(t.advection.inner(&u).abs() < 1e-10 * scale);
        let coupling = t.lorentz.inner(&u) + t.induction.inner(&b);
        assert!(coupling.abs() < 1e-10 * scale.max(b.inner(&b) * t.max_u));
        assert!(t.hall_inner.abs() <= 1e-10 * t.hall_scale);

        // advective form with the same dealiasing
        let adv = nonlinear_product(&u, &u, ProductKind::Advective).unwrap();
        assert!(adv.inner(&u).abs() < 1e-10 * scale);
        let bb = nonlinear_product(&b, &b, ProductKind::Advective).unwrap();
        let bu = nonlinear_product(&b, &u, ProductKind::Advective).unwrap();
        let pair = bb.inner(&u) + bu.inner(&b);
        assert!(pair.abs() < 1e-10 * b.inner(&b) * t.max_u.max(t.max_b));
    }

    #[test]
    fn outputs_are_solenoidal() {
        let g = grid();
        let mut rng = rng_from_seed(12);
        let band = SpectralBand::new(1.0, 4.0, -1.0);
        let u = random_solenoidal(g, band, &mut rng);
        let b = random_solenoidal(g, band, &mut rng);
        let p = PhysParams::new(0.01, 0.02, 0.1, 0.5).unwrap();
        let s = SolverState::new(u, b, 0.0, p).unwrap();
        let (du, db) = rhs(&s).unwrap();
        assert!(du.divergence_defect() <= 1e-12 * du.max_abs_coeff());
        assert!(db.divergence_defect() <= 1e-12 * db.max_abs_coeff());
    }
}
