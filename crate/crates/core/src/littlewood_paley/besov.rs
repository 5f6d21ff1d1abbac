use serde::{Deserialize, Serialize};

use super::bank::FilterBank;
use crate::error::{Error, Result};
use crate::spectral::{check_exponent, lp_norm_values, Components, SpectralField};

/// Regularity and integrability indices of a Besov norm.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BesovSpec {
    pub s: f64,
    pub p: f64,
    pub q: f64,
    pub homogeneous: bool,
}

impl BesovSpec {
    pub fn new(s: f64, p: f64, q: f64, homogeneous: bool) -> Result<Self> {
        let spec = Self {
            s,
            p,
            q,
            homogeneous,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn homogeneous(s: f64, p: f64, q: f64) -> Result<Self> {
        Self::new(s, p, q, true)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.s.is_finite() {
            return Err(Error::param(format!("Besov regularity must be finite, got {}", self.s)));
        }
        check_exponent(self.p)?;
        if self.q.is_nan() || self.q < 1.0 {
            return Err(Error::param(format!("Besov summability q must satisfy q >= 1, got {}", self.q)));
        }
        Ok(())
    }
}

/// How component norms of a vector field are combined.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum VectorNorm {
    /// (Σ_i ‖f_i‖²)^{1/2}
    #[default]
    ComponentL2,
    /// Σ_i ‖f_i‖, the tuple convention ‖(f₁, …, f_m)‖ = ‖f₁‖ + … + ‖f_m‖.
    ComponentSum,
    /// The norm of the pointwise Euclidean magnitude of each block.
    PointwiseMagnitude,
}

/// ℓ^q combination of a finite sequence (q = ∞ is the max).
pub fn lq_combine(terms: impl IntoIterator<Item = f64>, q: f64) -> f64 {
    if q.is_infinite() {
        return terms.into_iter().fold(0.0, f64::max);
    }
    let terms: Vec<f64> = terms.into_iter().collect();
    let m = terms.iter().fold(0.0, |a: f64, b| a.max(b.abs()));
    if m == 0.0 {
        return 0.0;
    }
    m * terms.iter().map(|t| (t.abs() / m).powf(q)).sum::<f64>().powf(1.0 / q)
}

impl FilterBank {
    /// ‖Δ_j f‖_p for every band, indexed by `j - j_min`.
    pub fn band_lp_norms(&self, f: &SpectralField, p: f64, oversample: usize) -> Result<Vec<f64>> {
        check_exponent(p)?;
        self.bands()
            .map(|j| {
                let band = self.delta_j(f, j)?;
                band_lp(&band, p, oversample)
            })
            .collect()
    }

    /// Band norms for several exponents from one inverse transform per band:
    /// `out[i][b]` is ‖Δ_{j_min+b} f‖_{ps[i]}.
    pub fn band_lp_norms_multi(&self, f: &SpectralField, ps: &[f64]) -> Result<Vec<Vec<f64>>> {
        for &p in ps {
            check_exponent(p)?;
        }
        let cell = self.grid().cell_volume();
        let mut out = vec![Vec::with_capacity(self.band_count()); ps.len()];
        for j in self.bands() {
            let band = self.delta_j(f, j)?;
            let values = (band.max_abs_coeff() > 0.0).then(|| band.transform_inverse());
            for (slot, &p) in out.iter_mut().zip(ps) {
                slot.push(values.as_ref().map_or(0.0, |v| lp_norm_values(v, p, cell)));
            }
        }
        Ok(out)
    }

    /// Band norms of the pointwise magnitude of several components.
    pub fn band_lp_norms_magnitude(
        &self,
        comps: &[SpectralField],
        p: f64,
        oversample: usize,
    ) -> Result<Vec<f64>> {
        check_exponent(p)?;
        self.bands()
            .map(|j| {
                let mut mag: Option<Vec<f64>> = None;
                let mut cell = 0.0;
                for c in comps {
                    let (fine, v) = self.delta_j(c, j)?.to_physical_oversampled(oversample)?;
                    cell = fine.cell_volume();
                    let m = mag.get_or_insert_with(|| vec![0.0; v.len()]);
                    for (a, x) in m.iter_mut().zip(&v) {
                        *a += x * x;
                    }
                }
                let m: Vec<f64> = mag.unwrap_or_default().into_iter().map(f64::sqrt).collect();
                Ok(lp_norm_values(&m, p, cell))
            })
            .collect()
    }
}

fn band_lp(band: &SpectralField, p: f64, oversample: usize) -> Result<f64> {
    if band.max_abs_coeff() == 0.0 {
        return Ok(0.0);
    }
    let (fine, values) = band.to_physical_oversampled(oversample)?;
    Ok(lp_norm_values(&values, p, fine.cell_volume()))
}

/// Combines precomputed band norms ‖Δ_j f‖_p (j = j_min, j_min+1, …) into
/// the homogeneous norm (Σ_j 2^{jsq}‖Δ_j f‖_p^q)^{1/q}.
pub fn besov_from_band_norms(band_norms: &[f64], j_min: i32, s: f64, q: f64) -> f64 {
    lq_combine(
        band_norms
            .iter()
            .enumerate()
            .map(|(b, &n)| 2f64.powf((j_min + b as i32) as f64 * s) * n),
        q,
    )
}

fn scalar_besov(f: &SpectralField, spec: &BesovSpec, bank: &FilterBank, oversample: usize) -> Result<f64> {
    let norms = bank.band_lp_norms(f, spec.p, oversample)?;
    if spec.homogeneous {
        return Ok(besov_from_band_norms(&norms, bank.j_min(), spec.s, spec.q));
    }
    let skip = (-bank.j_min()).max(0) as usize;
    let high = besov_from_band_norms(&norms[skip.min(norms.len())..], bank.j_min() + skip as i32, spec.s, spec.q);
    let low = band_lp(&bank.low_pass(f, 0)?, spec.p, oversample)?;
    Ok(high + low)
}

/// Besov norm with the default component convention and no oversampling.
pub fn besov_norm<F: Components + ?Sized>(f: &F, spec: &BesovSpec, bank: &FilterBank) -> Result<f64> {
    besov_norm_with(f, spec, bank, VectorNorm::ComponentL2, 1)
}

/// Besov norm over the bank's band range.
///
/// Homogeneous norms drop the mean; the inhomogeneous norm sums bands j ≥ 0
/// and adds ‖S₀f‖_p.
pub fn besov_norm_with<F: Components + ?Sized>(
    f: &F,
    spec: &BesovSpec,
    bank: &FilterBank,
    convention: VectorNorm,
    oversample: usize,
) -> Result<f64> {
    spec.validate()?;
    let comps = f.components();
    for c in comps {
        if c.grid() != bank.grid() {
            return Err(Error::GridMismatch {
                left: bank.grid().n(),
                right: c.grid().n(),
            });
        }
    }
    match convention {
        VectorNorm::ComponentL2 => {
            let mut acc = 0.0;
            for c in comps {
                let v = scalar_besov(c, spec, bank, oversample)?;
                acc += v * v;
            }
            Ok(acc.sqrt())
        }
        VectorNorm::ComponentSum => comps
            .iter()
            .map(|c| scalar_besov(c, spec, bank, oversample))
            .sum(),
        VectorNorm::PointwiseMagnitude => {
            let norms = bank.band_lp_norms_magnitude(comps, spec.p, oversample)?;
            if spec.homogeneous {
                return Ok(besov_from_band_norms(&norms, bank.j_min(), spec.s, spec.q));
            }
            let skip = (-bank.j_min()).max(0) as usize;
            let high = besov_from_band_norms(&norms[skip.min(norms.len())..], bank.j_min() + skip as i32, spec.s, spec.q);
            let lows: Vec<Vec<f64>> = comps
                .iter()
                .map(|c| Ok(bank.low_pass(c, 0)?.to_physical_oversampled(oversample)?.1))
                .collect::<Result<_>>()?;
            let mag = crate::spectral::pointwise_magnitude(&lows);
            let cell = bank.grid().cell_volume() / (oversample * oversample * oversample) as f64;
            Ok(high + lp_norm_values(&mag, spec.p, cell))
        }
    }
}

/// Σ_j 2^{2js} φ_j(k)² / |k|^{2s} over nonzero lattice modes: the per-mode
/// ratio ‖·‖²_{Ḃ^s_{2,2}} / ‖·‖²_{Ḣ^s}. Returns (min, max).
pub fn sobolev_besov_equivalence(bank: &FilterBank, s: f64) -> (f64, f64) {
    let t = bank.grid().tables();
    let mut lo = f64::INFINITY;
    let mut hi: f64 = 0.0;
    for idx in 1..bank.grid().len() {
        let w: f64 = bank
            .bands()
            .map(|j| {
                let p = bank.phi_unchecked(j)[idx];
                4f64.powf(j as f64 * s) * p * p
            })
            .sum();
        let r = w / t.k2[idx].powf(s);
        lo = lo.min(r);
        hi = hi.max(r);
    }
    (lo, hi)
}
