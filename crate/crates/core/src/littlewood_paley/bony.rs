use super::bank::FilterBank;
use crate::error::{Error, Result};
use crate::spectral::{ProductRule, SpectralField};

/// Physical samples of the dyadic blocks of one field.
///
/// Slot 0 holds the low-frequency block on the lattice (the mean, which is
/// what χ(2^{-j_min}D) retains) and plays the role of Δ_{j_min−1}; slot
/// `b + 1` holds Δ_{j_min+b}. Empty blocks are stored as `None`.
#[derive(Clone, Debug)]
pub struct BandSamples {
    blocks: Vec<Option<Vec<f64>>>,
}

impl BandSamples {
    pub fn new(f: &SpectralField, bank: &FilterBank) -> Result<Self> {
        check_grid(f, bank)?;
        let grid = bank.grid();
        let mut blocks = Vec::with_capacity(bank.band_count() + 1);
        let mean = f.mean();
        blocks.push(if mean == 0.0 {
            None
        } else {
            Some(vec![mean; grid.len()])
        });
        for j in bank.bands() {
            let band = f.apply_multiplier(bank.phi_unchecked(j));
            blocks.push(if band.max_abs_coeff() == 0.0 {
                None
            } else {
                Some(band.transform_inverse())
            });
        }
        Ok(Self { blocks })
    }

    fn len(&self) -> usize {
        self.blocks.len()
    }

    fn get(&self, slot: isize) -> Option<&[f64]> {
        if slot < 0 || slot as usize >= self.blocks.len() {
            return None;
        }
        self.blocks[slot as usize].as_deref()
    }

    /// Running low-pass sums: `lows[b]` = Σ_{a < b} block a.
    fn prefix_sums(&self) -> Vec<Option<Vec<f64>>> {
        let mut out = Vec::with_capacity(self.len() + 1);
        let mut acc: Option<Vec<f64>> = None;
        out.push(None);
        for block in &self.blocks {
            if let Some(v) = block {
                match &mut acc {
                    Some(a) => a.iter_mut().zip(v).for_each(|(x, y)| *x += y),
                    None => acc = Some(v.clone()),
                }
            }
            out.push(acc.clone());
        }
        out
    }
}

fn check_grid(f: &SpectralField, bank: &FilterBank) -> Result<()> {
    if f.grid() != bank.grid() {
        return Err(Error::GridMismatch {
            left: bank.grid().n(),
            right: f.grid().n(),
        });
    }
    Ok(())
}

fn add_product(acc: &mut [f64], a: &[f64], b: &[f64]) {
    for ((x, y), z) in acc.iter_mut().zip(a).zip(b) {
        *x += y * z;
    }
}

fn finish(grid: crate::spectral::Grid3, values: Vec<f64>, rule: ProductRule) -> SpectralField {
    let mut f = SpectralField::transform_forward(&values, grid).expect("values match grid");
    if rule == ProductRule::Dealiased {
        f.dealias();
    }
    f
}

/// The three pieces of uv = T_u v + T_v u + R(u, v).
#[derive(Clone, Debug)]
pub struct BonyTerms {
    pub t_uv: SpectralField,
    pub t_vu: SpectralField,
    pub remainder: SpectralField,
}

impl BonyTerms {
    pub fn sum(&self) -> SpectralField {
        let mut s = &self.t_uv + &self.t_vu;
        s += &self.remainder;
        s
    }
}

/// Σ_b S_{b−1}u Δ_b v in physical space.
fn paraproduct_values(u: &BandSamples, v: &BandSamples, len: usize) -> Vec<f64> {
    let lows = u.prefix_sums();
    let mut acc = vec![0.0; len];
    for b in 0..v.len() {
        // S_{b-1} collects blocks a ≤ b − 2, i.e. prefix up to index b − 1
        let Some(vb) = v.get(b as isize) else { continue };
        if b < 1 {
            continue;
        }
        if let Some(low) = &lows[b - 1] {
            add_product(&mut acc, low, vb);
        }
    }
    acc
}

fn remainder_values(u: &BandSamples, v: &BandSamples, len: usize) -> Vec<f64> {
    let mut acc = vec![0.0; len];
    for a in 0..u.len() as isize {
        let Some(ua) = u.get(a) else { continue };
        for d in -1..=1 {
            if let Some(vb) = v.get(a + d) {
                add_product(&mut acc, ua, vb);
            }
        }
    }
    acc
}

/// Bony decomposition from precomputed block samples.
pub fn bony_from_samples(
    u: &BandSamples,
    v: &BandSamples,
    bank: &FilterBank,
    rule: ProductRule,
) -> BonyTerms {
    let grid = bank.grid();
    let len = grid.len();
    BonyTerms {
        t_uv: finish(grid, paraproduct_values(u, v, len), rule),
        t_vu: finish(grid, paraproduct_values(v, u, len), rule),
        remainder: finish(grid, remainder_values(u, v, len), rule),
    }
}

pub fn bony_decompose(
    u: &SpectralField,
    v: &SpectralField,
    bank: &FilterBank,
    rule: ProductRule,
) -> Result<BonyTerms> {
    u.check_same_grid(v)?;
    let su = BandSamples::new(u, bank)?;
    let sv = BandSamples::new(v, bank)?;
    Ok(bony_from_samples(&su, &sv, bank, rule))
}

/// T_u v = Σ_j S_{j−1}u Δ_j v, products dealiased.
pub fn paraproduct(u: &SpectralField, v: &SpectralField, bank: &FilterBank) -> Result<SpectralField> {
    paraproduct_with(u, v, bank, ProductRule::Dealiased)
}

pub fn paraproduct_with(
    u: &SpectralField,
    v: &SpectralField,
    bank: &FilterBank,
    rule: ProductRule,
) -> Result<SpectralField> {
    u.check_same_grid(v)?;
    let su = BandSamples::new(u, bank)?;
    let sv = BandSamples::new(v, bank)?;
    Ok(finish(bank.grid(), paraproduct_values(&su, &sv, bank.grid().len()), rule))
}

/// R(u, v) = Σ_j Δ_j u Δ̃_j v, products dealiased.
pub fn remainder(u: &SpectralField, v: &SpectralField, bank: &FilterBank) -> Result<SpectralField> {
    remainder_with(u, v, bank, ProductRule::Dealiased)
}

pub fn remainder_with(
    u: &SpectralField,
    v: &SpectralField,
    bank: &FilterBank,
    rule: ProductRule,
) -> Result<SpectralField> {
    u.check_same_grid(v)?;
    let su = BandSamples::new(u, bank)?;
    let sv = BandSamples::new(v, bank)?;
    Ok(finish(bank.grid(), remainder_values(&su, &sv, bank.grid().len()), rule))
}
