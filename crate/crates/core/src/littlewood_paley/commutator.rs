use super::bank::FilterBank;
use super::bony::{bony_from_samples, BandSamples};
use crate::error::{Error, Result};
use crate::spectral::{
    advect_physical, finish_product, physical_cross, Axis, ProductRule, SpectralField, VectorField,
    SOLENOIDAL_TOL,
};

fn require_solenoidal(f: &VectorField) -> Result<()> {
    if f.divergence_defect() > SOLENOIDAL_TOL {
        return Err(Error::Contract(format!(
            "advective commutator needs a divergence-free transport field (defect {:.3e})",
            f.divergence_defect()
        )));
    }
    Ok(())
}

fn check_band(bank: &FilterBank, j: i32) -> Result<()> {
    bank.phi(j).map(|_| ())
}

fn band_of(v: &VectorField, bank: &FilterBank, j: i32) -> VectorField {
    v.map(|c| c.apply_multiplier(bank.phi_unchecked(j)))
}

/// [f, Δ_j]·∇g = f·∇(Δ_j g) − Δ_j(f·∇g), dealiased.
pub fn commutator_advective(f: &VectorField, g: &VectorField, j: i32, bank: &FilterBank) -> Result<VectorField> {
    commutator_advective_with(f, g, j, bank, ProductRule::Dealiased)
}

pub fn commutator_advective_with(
    f: &VectorField,
    g: &VectorField,
    j: i32,
    bank: &FilterBank,
    rule: ProductRule,
) -> Result<VectorField> {
    f.check_same_grid(g)?;
    check_band(bank, j)?;
    require_solenoidal(f)?;
    let pf = f.to_physical();
    let grid = f.grid();
    let first = finish_product(grid, advect_physical(&pf, &band_of(g, bank, j)), rule);
    let whole = finish_product(grid, advect_physical(&pf, g), rule);
    Ok(first.sub(&band_of(&whole, bank, j)))
}

/// The advective commutator for every band, sharing the full product.
pub fn commutator_advective_all(
    f: &VectorField,
    g: &VectorField,
    bank: &FilterBank,
    rule: ProductRule,
) -> Result<Vec<VectorField>> {
    f.check_same_grid(g)?;
    require_solenoidal(f)?;
    let pf = f.to_physical();
    let grid = f.grid();
    let whole = finish_product(grid, advect_physical(&pf, g), rule);
    Ok(bank
        .bands()
        .map(|j| {
            let first = finish_product(grid, advect_physical(&pf, &band_of(g, bank, j)), rule);
            first.sub(&band_of(&whole, bank, j))
        })
        .collect())
}

/// [b×, Δ_j]J = b×(Δ_j J) − Δ_j(b×J), dealiased.
pub fn commutator_cross(b: &VectorField, current: &VectorField, j: i32, bank: &FilterBank) -> Result<VectorField> {
    commutator_cross_with(b, current, j, bank, ProductRule::Dealiased)
}

pub fn commutator_cross_with(
    b: &VectorField,
    current: &VectorField,
    j: i32,
    bank: &FilterBank,
    rule: ProductRule,
) -> Result<VectorField> {
    b.check_same_grid(current)?;
    check_band(bank, j)?;
    let pb = b.to_physical();
    let grid = b.grid();
    let first = finish_product(grid, physical_cross(&pb, &band_of(current, bank, j).to_physical()), rule);
    let whole = finish_product(grid, physical_cross(&pb, &current.to_physical()), rule);
    Ok(first.sub(&band_of(&whole, bank, j)))
}

/// Scalar form f Δ_j∇g − Δ_j(f∇g), one vector component per derivative.
pub fn commutator_scalar(
    f: &SpectralField,
    g: &SpectralField,
    j: i32,
    bank: &FilterBank,
    rule: ProductRule,
) -> Result<VectorField> {
    f.check_same_grid(g)?;
    check_band(bank, j)?;
    let pf = f.transform_inverse();
    let grid = f.grid();
    let grad = VectorField::gradient(g);
    let mul = |v: &VectorField| -> [Vec<f64>; 3] {
        v.to_physical().map(|c| c.iter().zip(&pf).map(|(a, b)| a * b).collect())
    };
    let first = finish_product(grid, mul(&band_of(&grad, bank, j)), rule);
    let whole = finish_product(grid, mul(&grad), rule);
    Ok(first.sub(&band_of(&whole, bank, j)))
}

/// The four pieces of the paraproduct splitting of the scalar commutator,
/// one vector component per derivative of g:
///
/// [f, Δ_j]∇g = [T_f, Δ_j]∇g + T'_{Δ_j∇g} f − Δ_j T_{∇g} f − Δ_j R(f, ∇g)
///
/// with T'_a b = T_a b + R(a, b).
#[derive(Clone, Debug)]
pub struct CommutatorSplit {
    pub j: i32,
    pub direct: VectorField,
    pub t_commutator: VectorField,
    pub t_prime: VectorField,
    pub t_grad: VectorField,
    pub remainder: VectorField,
}

impl CommutatorSplit {
    /// Sum of the four pieces with their signs.
    pub fn recombined(&self) -> VectorField {
        let mut s = self.t_commutator.add(&self.t_prime);
        s.axpy(-1.0, &self.t_grad);
        s.axpy(-1.0, &self.remainder);
        s
    }
}

/// The splitting for every band of the bank.
pub fn commutator_split_all(
    f: &SpectralField,
    g: &SpectralField,
    bank: &FilterBank,
    rule: ProductRule,
) -> Result<Vec<CommutatorSplit>> {
    f.check_same_grid(g)?;
    let grid = f.grid();
    let sf = BandSamples::new(f, bank)?;
    let pf = f.transform_inverse();
    let grads: Vec<SpectralField> = Axis::ALL.iter().map(|&a| g.derivative(a)).collect();
    // full-product pieces, shared across bands
    let mut full_t_f = Vec::with_capacity(3);
    let mut full_t_grad = Vec::with_capacity(3);
    let mut full_r = Vec::with_capacity(3);
    let mut full_prod = Vec::with_capacity(3);
    for dg in &grads {
        let sg = BandSamples::new(dg, bank)?;
        let terms = bony_from_samples(&sf, &sg, bank, rule);
        full_t_f.push(terms.t_uv);
        full_t_grad.push(terms.t_vu);
        full_r.push(terms.remainder);
        let vals: Vec<f64> = dg.transform_inverse().iter().zip(&pf).map(|(a, b)| a * b).collect();
        let mut p = SpectralField::transform_forward(&vals, grid)?;
        if rule == ProductRule::Dealiased {
            p.dealias();
        }
        full_prod.push(p);
    }
    let to_vec = |v: Vec<SpectralField>| -> VectorField {
        let [x, y, z]: [SpectralField; 3] = v.try_into().expect("three components");
        VectorField::new(x, y, z).expect("shared grid")
    };
    let mut out = Vec::with_capacity(bank.band_count());
    for j in bank.bands() {
        let phi = bank.phi_unchecked(j);
        let mut direct = Vec::with_capacity(3);
        let mut t_comm = Vec::with_capacity(3);
        let mut t_prime = Vec::with_capacity(3);
        let mut t_grad = Vec::with_capacity(3);
        let mut rem = Vec::with_capacity(3);
        for c in 0..3 {
            let band = grads[c].apply_multiplier(phi);
            let vals: Vec<f64> = band.transform_inverse().iter().zip(&pf).map(|(a, b)| a * b).collect();
            let mut first = SpectralField::transform_forward(&vals, grid)?;
            if rule == ProductRule::Dealiased {
                first.dealias();
            }
            direct.push(&first - &full_prod[c].apply_multiplier(phi));

            let sb = BandSamples::new(&band, bank)?;
            let local = bony_from_samples(&sf, &sb, bank, rule);
            t_comm.push(&local.t_uv - &full_t_f[c].apply_multiplier(phi));
            t_prime.push(&local.t_vu + &local.remainder);
            t_grad.push(full_t_grad[c].apply_multiplier(phi));
            rem.push(full_r[c].apply_multiplier(phi));
        }
        out.push(CommutatorSplit {
            j,
            direct: to_vec(direct),
            t_commutator: to_vec(t_comm),
            t_prime: to_vec(t_prime),
            t_grad: to_vec(t_grad),
            remainder: to_vec(rem),
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::random::{random_scalar, random_solenoidal, rng_from_seed, SpectralBand};
    use crate::spectral::Grid3;

    fn bank() -> FilterBank {
        FilterBank::build(Grid3::new(16).unwrap())
    }

    #[test]
    fn constant_transport_commutes() {
        let b = bank();
        let g = b.grid();
        let f = VectorField::from_fn(g, |_, _, _| [0.3, -1.0, 2.0]).mark_solenoidal().unwrap();
        let mut rng = rng_from_seed(3);
        let v = random_solenoidal(g, SpectralBand::new(1.0, 5.0, -1.0), &mut rng);
        for j in b.bands() {
            let c = commutator_advective(&f, &v, j, &b).unwrap();
            assert!(c.max_abs_coeff() < 1e-12);
            let c = commutator_cross(&f, &v, j, &b).unwrap();
            assert!(c.max_abs_coeff() < 1e-12);
        }
    }

    #[test]
    fn zero_second_argument() {
        let b = bank();
        let g = b.grid();
        let mut rng = rng_from_seed(4);
        let f = random_solenoidal(g, SpectralBand::new(1.0, 3.0, -1.0), &mut rng);
        let z = VectorField::zeros(g);
        assert_eq!(commutator_advective(&f, &z, 0, &b).unwrap().max_abs_coeff(), 0.0);
        assert_eq!(commutator_cross(&f, &z, 0, &b).unwrap().max_abs_coeff(), 0.0);
    }

    #[test]
    fn non_solenoidal_transport_is_rejected() {
        let b = bank();
        let g = b.grid();
        let f = VectorField::from_fn(g, |x, _, _| [x.sin(), 0.0, 0.0]);
        let err = commutator_advective(&f, &f, 0, &b).unwrap_err();
        assert!(matches!(err, Error::Contract(_)));
    }

    #[test]
    fn matches_two_term_evaluation() {
        let b = bank();
        let g = b.grid();
        let mut rng = rng_from_seed(5);
        let f = random_solenoidal(g, SpectralBand::new(1.0, 2.0, -1.0), &mut rng);
        let v = random_solenoidal(g, SpectralBand::new(1.0, 3.0, -1.0), &mut rng);
        let all = commutator_advective_all(&f, &v, &b, ProductRule::Dealiased).unwrap();
        for (i, j) in b.bands().enumerate() {
            let one = commutator_advective(&f, &v, j, &b).unwrap();
            assert!(one.sub(&all[i]).max_abs_coeff() < 1e-14);
        }
    }

    #[test]
    fn split_recombines() {
        let b = bank();
        let g = b.grid();
        let mut rng = rng_from_seed(6);
        let band = SpectralBand::new(1.0, 3.5, -2.0);
        let f = random_scalar(g, band, &mut rng);
        let h = random_scalar(g, band, &mut rng);
        for split in commutator_split_all(&f, &h, &b, ProductRule::Raw).unwrap() {
            let direct = commutator_scalar(&f, &h, split.j, &b, ProductRule::Raw).unwrap();
            let scale = direct.max_abs_coeff().max(1e-300);
            assert!(split.direct.sub(&direct).max_abs_coeff() <= 1e-12 * scale);
            assert!(split.recombined().sub(&direct).max_abs_coeff() <= 1e-12 * scale.max(1e-3));
        }
    }
}
