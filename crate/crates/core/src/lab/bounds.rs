use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::littlewood_paley::{
    besov_from_band_norms, commutator_advective_all, commutator_split_all, FilterBank,
};
use crate::spectral::{pointwise_magnitude, Axis, ProductRule, SpectralField, VectorField};

const DIM: f64 = 3.0;

/// Exponents (σ, σ₁, σ₂, p₁, p₂) of the commutator estimate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CommutatorTuple {
    pub sigma: f64,
    pub sigma1: f64,
    pub sigma2: f64,
    #[serde(with = "super::report::lenient_f64")]
    pub p1: f64,
    #[serde(with = "super::report::lenient_f64")]
    pub p2: f64,
}

impl CommutatorTuple {
    pub fn new(sigma: f64, sigma1: f64, sigma2: f64, p1: f64, p2: f64) -> Result<Self> {
        let t = Self {
            sigma,
            sigma1,
            sigma2,
            p1,
            p2,
        };
        t.validate()?;
        Ok(t)
    }

    /// σ = s − 1, σ₁ = σ₂ = −1, p₁ = p₂ = p: the velocity-criterion energy estimate.
    pub fn velocity_case(s: f64, p: f64) -> Result<Self> {
        Self::new(s - 1.0, -1.0, -1.0, p, p)
    }

    /// σ = s − 3/(2p), σ₁ = σ₂ = 0, p₁ = p₂ = p: the vorticity-criterion estimate.
    pub fn vorticity_case(s: f64, p: f64) -> Result<Self> {
        Self::new(s - 1.5 / p, 0.0, 0.0, p, p)
    }

    /// σ_i = 0 with p_i = ∞ swaps the Besov norm of the gradient for its sup.
    pub fn uses_sup_norm(sigma: f64, p: f64) -> bool {
        sigma == 0.0 && p == f64::INFINITY
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |cond: &str| {
            Err(Error::param(format!(
                "commutator exponents {} violate the hypothesis {cond}",
                self.label()
            )))
        };
        let finite = [self.sigma, self.sigma1, self.sigma2].iter().all(|v| v.is_finite());
        if !finite {
            return fail("σ, σ_1, σ_2 finite");
        }
        if !(self.sigma > 0.0) {
            return fail("σ > 0");
        }
        for (i, p) in [(1, self.p1), (2, self.p2)] {
            if p.is_nan() || p < 1.0 {
                return fail(&format!("1 ≤ p_{i} ≤ ∞"));
            }
        }
        for (i, s, p) in [(1, self.sigma1, self.p1), (2, self.sigma2, self.p2)] {
            if !(DIM / p - s > 0.0) && !Self::uses_sup_norm(s, p) {
                return fail(&format!("d/p_{i} − σ_{i} > 0"));
            }
        }
        if !(self.sigma - self.sigma2 + DIM / self.p2 > 0.0) {
            return fail("σ − σ_2 + d/p_2 > 0");
        }
        Ok(())
    }

    pub fn label(&self) -> String {
        format!(
            "sigma={},sigma1={},sigma2={},p1={},p2={}",
            fmt_num(self.sigma),
            fmt_num(self.sigma1),
            fmt_num(self.sigma2),
            fmt_num(self.p1),
            fmt_num(self.p2)
        )
    }
}

pub(crate) fn fmt_num(v: f64) -> String {
    if v == f64::INFINITY {
        "inf".into()
    } else {
        format!("{v}")
    }
}

fn gradient_components(comps: &[SpectralField]) -> Vec<SpectralField> {
    comps
        .iter()
        .flat_map(|c| Axis::ALL.map(|a| c.derivative(a)))
        .collect()
}

/// Cached dyadic profile of one field: band energies, its gradient and the
/// gradient's band L^p norms for the exponents asked for.
pub(crate) struct Profile<'a> {
    bank: &'a FilterBank,
    band_l2: Vec<f64>,
    grad: Vec<SpectralField>,
    grad_lp: Vec<(f64, Vec<Vec<f64>>)>,
}

impl<'a> Profile<'a> {
    pub fn new(comps: &[SpectralField], bank: &'a FilterBank, exponents: &[f64]) -> Result<Self> {
        let band_l2 = band_l2_norms(comps, bank);
        let grad = gradient_components(comps);
        let mut ps: Vec<f64> = Vec::new();
        for &p in exponents {
            if !ps.contains(&p) {
                ps.push(p);
            }
        }
        // per component: one row per exponent
        let per_comp = grad
            .iter()
            .map(|c| bank.band_lp_norms_multi(c, &ps))
            .collect::<Result<Vec<_>>>()?;
        let grad_lp = ps
            .iter()
            .enumerate()
            .map(|(i, &p)| (p, per_comp.iter().map(|rows| rows[i].clone()).collect()))
            .collect();
        Ok(Self {
            bank,
            band_l2,
            grad,
            grad_lp,
        })
    }

    /// ‖f‖_{Ḃ^s_{2,2}}.
    pub fn b22(&self, s: f64) -> f64 {
        besov_from_band_norms(&self.band_l2, self.bank.j_min(), s, 2.0)
    }

    /// ‖∇f‖_{Ḃ^σ_{p,∞}} with components combined in ℓ², or ‖∇f‖_∞ when σ = 0, p = ∞.
    pub fn grad_norm(&self, sigma: f64, p: f64) -> Result<f64> {
        if CommutatorTuple::uses_sup_norm(sigma, p) {
            let values: Vec<Vec<f64>> = self.grad.iter().map(|c| c.transform_inverse()).collect();
            return Ok(pointwise_magnitude(&values).into_iter().fold(0.0, f64::max));
        }
        let (_, norms) = self
            .grad_lp
            .iter()
            .find(|(q, _)| *q == p)
            .ok_or_else(|| Error::param(format!("gradient profile has no L^{p} band norms")))?;
        let j_min = self.bank.j_min();
        Ok(norms
            .iter()
            .map(|n| besov_from_band_norms(n, j_min, sigma, f64::INFINITY).powi(2))
            .sum::<f64>()
            .sqrt())
    }
}

/// ‖Δ_j f‖₂ for every band, by Plancherel, components combined in ℓ².
pub(crate) fn band_l2_norms(comps: &[SpectralField], bank: &FilterBank) -> Vec<f64> {
    let vol = bank.grid().volume();
    bank.bands()
        .map(|j| {
            let phi = bank.phi(j).expect("band in range");
            let e: f64 = comps
                .iter()
                .map(|c| {
                    c.coeffs()
                        .iter()
                        .zip(phi)
                        .map(|(a, w)| w * w * a.norm_sqr())
                        .sum::<f64>()
                })
                .sum();
            (e * vol).sqrt()
        })
        .collect()
}

/// (Σ_j 2^{2jσ} n_j²)^{1/2} over the bank's band range.
pub(crate) fn weighted_l2(norms: &[f64], bank: &FilterBank, sigma: f64) -> f64 {
    besov_from_band_norms(norms, bank.j_min(), sigma, 2.0)
}

/// Both sides of the commutator estimate for the advective commutator
/// [f, Δ_j]·∇g, without the constant.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CommutatorSides {
    pub lhs: f64,
    /// ‖∇f‖_{Ḃ^{σ₁}_{p₁,∞}}‖g‖_{Ḃ^{σ−σ₁+d/p₁}_{2,2}} + ‖∇g‖_{Ḃ^{σ₂}_{p₂,∞}}‖f‖_{Ḃ^{σ−σ₂+d/p₂}_{2,2}}
    pub rhs: f64,
    /// The same with the d/p indices of the two Besov-2,2 factors exchanged.
    pub rhs_swapped: f64,
}

impl CommutatorSides {
    pub fn ratio(&self) -> f64 {
        ratio(self.lhs, self.rhs)
    }

    pub fn ratio_swapped(&self) -> f64 {
        ratio(self.lhs, self.rhs_swapped)
    }
}

pub(crate) fn ratio(lhs: f64, rhs: f64) -> f64 {
    if lhs == 0.0 {
        0.0
    } else if rhs > 0.0 {
        lhs / rhs
    } else {
        f64::INFINITY
    }
}

/// Evaluates several exponent tuples on one pair (f divergence-free).
pub fn commutator_sides(
    f: &VectorField,
    g: &VectorField,
    bank: &FilterBank,
    tuples: &[CommutatorTuple],
    rule: ProductRule,
) -> Result<Vec<CommutatorSides>> {
    for t in tuples {
        t.validate()?;
    }
    let bands = commutator_advective_all(f, g, bank, rule)?;
    let norms: Vec<f64> = bands.iter().map(|v| v.l2_norm()).collect();
    let ps: Vec<f64> = tuples
        .iter()
        .flat_map(|t| [(t.sigma1, t.p1), (t.sigma2, t.p2)])
        .filter(|&(s, p)| !CommutatorTuple::uses_sup_norm(s, p))
        .map(|(_, p)| p)
        .collect();
    let pf = Profile::new(f.components(), bank, &ps)?;
    let pg = Profile::new(g.components(), bank, &ps)?;
    tuples
        .iter()
        .map(|t| {
            let nf = pf.grad_norm(t.sigma1, t.p1)?;
            let ng = pg.grad_norm(t.sigma2, t.p2)?;
            let (d1, d2) = (DIM / t.p1, DIM / t.p2);
            Ok(CommutatorSides {
                lhs: weighted_l2(&norms, bank, t.sigma),
                rhs: nf * pg.b22(t.sigma - t.sigma1 + d1) + ng * pf.b22(t.sigma - t.sigma2 + d2),
                rhs_swapped: nf * pg.b22(t.sigma - t.sigma1 + d2) + ng * pf.b22(t.sigma - t.sigma2 + d1),
            })
        })
        .collect()
}

/// The four pieces of the paraproduct splitting of the scalar commutator
/// [f, Δ_j]∇g, each measured in (Σ_j 2^{2jσ}‖·‖₂²)^{1/2}, with their bounds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParaproductTerms {
    pub direct: f64,
    /// [T_f, Δ_j]∇g, T'_{Δ_j∇g} f, Δ_j T_{∇g} f, Δ_j R(f, ∇g).
    pub terms: [f64; 4],
    /// ‖∇f‖‖g‖ for the first piece, ‖∇g‖‖f‖ for the other three.
    pub bounds: [f64; 4],
    /// max_j ‖sum of pieces − direct‖₂ / max_j ‖direct‖₂ (absolute when the
    /// commutator vanishes).
    pub identity_residual: f64,
}

pub const TERM_NAMES: [&str; 4] = ["t_commutator", "t_prime", "t_grad", "remainder"];

impl ParaproductTerms {
    pub fn ratios(&self) -> [f64; 4] {
        std::array::from_fn(|i| ratio(self.terms[i], self.bounds[i]))
    }
}

pub fn paraproduct_terms(
    f: &SpectralField,
    g: &SpectralField,
    bank: &FilterBank,
    tuple: &CommutatorTuple,
    rule: ProductRule,
) -> Result<ParaproductTerms> {
    tuple.validate()?;
    let split = commutator_split_all(f, g, bank, rule)?;
    let mut direct = Vec::with_capacity(split.len());
    let mut pieces: [Vec<f64>; 4] = Default::default();
    let mut worst_gap: f64 = 0.0;
    let mut worst_direct: f64 = 0.0;
    for s in &split {
        let d = s.direct.l2_norm();
        worst_direct = worst_direct.max(d);
        worst_gap = worst_gap.max(s.recombined().sub(&s.direct).l2_norm());
        direct.push(d);
        for (slot, v) in pieces
            .iter_mut()
            .zip([&s.t_commutator, &s.t_prime, &s.t_grad, &s.remainder])
        {
            slot.push(v.l2_norm());
        }
    }
    let needs = |s, p| if CommutatorTuple::uses_sup_norm(s, p) { vec![] } else { vec![p] };
    let pf = Profile::new(std::slice::from_ref(f), bank, &needs(tuple.sigma1, tuple.p1))?;
    let pg = Profile::new(std::slice::from_ref(g), bank, &needs(tuple.sigma2, tuple.p2))?;
    let first = pf.grad_norm(tuple.sigma1, tuple.p1)? * pg.b22(tuple.sigma - tuple.sigma1 + DIM / tuple.p1);
    let rest = pg.grad_norm(tuple.sigma2, tuple.p2)? * pf.b22(tuple.sigma - tuple.sigma2 + DIM / tuple.p2);
    Ok(ParaproductTerms {
        direct: weighted_l2(&direct, bank, tuple.sigma),
        terms: std::array::from_fn(|i| weighted_l2(&pieces[i], bank, tuple.sigma)),
        bounds: [first, rest, rest, rest],
        identity_residual: if worst_direct > 0.0 {
            worst_gap / worst_direct
        } else {
            worst_gap
        },
    })
}
