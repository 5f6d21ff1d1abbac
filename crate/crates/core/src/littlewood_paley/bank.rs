use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{Grid3, SpectralField};

/// Inner radius of the reference annulus.
pub const ANNULUS_INNER: f64 = 3.0 / 4.0;
/// Outer radius of the reference annulus.
pub const ANNULUS_OUTER: f64 = 8.0 / 3.0;
/// Radius of the low-pass ball.
pub const BALL_RADIUS: f64 = 4.0 / 3.0;

/// C^∞ transition `e^{−1/t}` for t > 0, zero otherwise.
#[inline]
pub fn transition(t: f64) -> f64 {
    if t > 0.0 {
        (-1.0 / t).exp()
    } else {
        0.0
    }
}

/// Smooth bump supported exactly on [3/4, 8/3].
#[inline]
pub fn bump(r: f64) -> f64 {
    transition(r - ANNULUS_INNER) * transition(ANNULUS_OUTER - r)
}

/// Σ_m bump(2^{−m} r), invariant under r → 2r and positive for r > 0.
fn dyadic_sum(r: f64) -> f64 {
    let base = r.log2().floor() as i32;
    (base - 3..=base + 3)
        .map(|m| bump(r * 2f64.powi(-m)))
        .sum()
}

/// Radial profile of φ: `bump(r) / Σ_m bump(2^{−m} r)`.
pub fn phi_profile(r: f64) -> f64 {
    if r <= 0.0 {
        return 0.0;
    }
    bump(r) / dyadic_sum(r)
}

/// Radial profile of χ = 1 − Σ_{j≥0} φ(2^{−j}·), supported in |ξ| ≤ 4/3.
pub fn chi_profile(r: f64) -> f64 {
    if r <= 0.0 {
        return 1.0;
    }
    if r >= BALL_RADIUS {
        return 0.0;
    }
    let d = dyadic_sum(r);
    let mut acc = 0.0;
    let mut m = 1;
    // terms bump(2^m r) with 2^m r ≤ 8/3
    while r * 2f64.powi(m) < ANNULUS_OUTER {
        acc += bump(r * 2f64.powi(m));
        m += 1;
    }
    if acc == 0.0 {
        // r below every annulus reached above: deep inside the ball
        return 1.0;
    }
    // Σ_{m≥1} bump(2^m r) only covers the terms that are live near r; for r
    // well inside the ball the normalisation is complete.
    (acc / d).min(1.0)
}

/// Dyadic Fourier multipliers realising Δ_j and S_j on one grid.
///
/// Bands run over `j_min..=j_max`; `j_min` is the first annulus containing
/// |k| = 1 and `j_max = ⌈log₂(k_max / (3/4))⌉`. The zero mode belongs to no
/// band and is carried by the low-pass part.
#[derive(Clone, Debug)]
pub struct FilterBank {
    grid: Grid3,
    j_min: i32,
    j_max: i32,
    phi: Vec<Vec<f64>>,
}

impl FilterBank {
    pub fn build(grid: Grid3) -> Self {
        let j_min = (-8..)
            .find(|&j| {
                let s = 2f64.powi(j);
                ANNULUS_INNER * s < 1.0 && 1.0 < ANNULUS_OUTER * s
            })
            .expect("some annulus contains |k| = 1");
        let j_max = (grid.k_max() as f64 / ANNULUS_INNER).log2().ceil() as i32;
        let t = grid.tables();
        let bands = (j_max - j_min + 1) as usize;
        let mut phi = vec![vec![0.0; grid.len()]; bands];
        let mut raw = vec![0.0; bands];
        for idx in 0..grid.len() {
            let r = t.k_abs[idx];
            if r == 0.0 {
                continue;
            }
            let mut total = 0.0;
            for (b, slot) in raw.iter_mut().enumerate() {
                let j = j_min + b as i32;
                *slot = bump(r * 2f64.powi(-j));
                total += *slot;
            }
            for b in 0..bands {
                phi[b][idx] = raw[b] / total;
            }
        }
        Self {
            grid,
            j_min,
            j_max,
            phi,
        }
    }

    #[inline]
    pub fn grid(&self) -> Grid3 {
        self.grid
    }

    #[inline]
    pub fn j_min(&self) -> i32 {
        self.j_min
    }

    #[inline]
    pub fn j_max(&self) -> i32 {
        self.j_max
    }

    pub fn bands(&self) -> std::ops::RangeInclusive<i32> {
        self.j_min..=self.j_max
    }

    pub fn band_count(&self) -> usize {
        self.phi.len()
    }

    /// Lattice multiplier φ_j(k).
    pub fn phi(&self, j: i32) -> Result<&[f64]> {
        self.check_band(j)?;
        Ok(&self.phi[(j - self.j_min) as usize])
    }

    pub(crate) fn phi_unchecked(&self, j: i32) -> &[f64] {
        &self.phi[(j - self.j_min) as usize]
    }

    fn check_band(&self, j: i32) -> Result<()> {
        if j < self.j_min || j > self.j_max {
            return Err(Error::param(format!(
                "band index {j} outside [{}, {}]",
                self.j_min, self.j_max
            )));
        }
        Ok(())
    }

    fn check_grid(&self, f: &SpectralField) -> Result<()> {
        if f.grid() != self.grid {
            return Err(Error::GridMismatch {
                left: self.grid.n(),
                right: f.grid().n(),
            });
        }
        Ok(())
    }

    /// Low-pass multiplier χ(2^{−j}|k|) on the lattice for any j.
    pub fn low_pass_multiplier(&self, j: i32) -> Vec<f64> {
        let mut m = vec![0.0; self.grid.len()];
        m[0] = 1.0;
        for band in self.j_min..j.min(self.j_max + 1) {
            for (acc, &p) in m.iter_mut().zip(self.phi_unchecked(band)) {
                *acc += p;
            }
        }
        m
    }

    /// Δ_j f.
    pub fn delta_j(&self, f: &SpectralField, j: i32) -> Result<SpectralField> {
        self.check_band(j)?;
        self.check_grid(f)?;
        Ok(f.apply_multiplier(self.phi_unchecked(j)))
    }

    /// S_j f = χ(2^{−j}D) f for j in `[j_min, j_max + 1]`.
    pub fn s_j(&self, f: &SpectralField, j: i32) -> Result<SpectralField> {
        if j < self.j_min || j > self.j_max + 1 {
            return Err(Error::param(format!(
                "low-pass index {j} outside [{}, {}]",
                self.j_min,
                self.j_max + 1
            )));
        }
        self.check_grid(f)?;
        Ok(f.apply_multiplier(&self.low_pass_multiplier(j)))
    }

    /// S_j f for any j: identity above the resolved range, mean only below it.
    pub fn low_pass(&self, f: &SpectralField, j: i32) -> Result<SpectralField> {
        self.check_grid(f)?;
        Ok(f.apply_multiplier(&self.low_pass_multiplier(j)))
    }

    /// max over lattice points with |k| ≤ k_max of |χ + Σ_j φ_j − 1|.
    pub fn partition_residual(&self) -> f64 {
        let t = self.grid.tables();
        let k_max = self.grid.k_max() as f64;
        let mut worst: f64 = 0.0;
        for idx in 0..self.grid.len() {
            if t.k_abs[idx] > k_max {
                continue;
            }
            let chi = if idx == 0 { 1.0 } else { 0.0 };
            let sum: f64 = chi + self.phi.iter().map(|p| p[idx]).sum::<f64>();
            worst = worst.max((sum - 1.0).abs());
        }
        worst
    }

    /// max over the whole lattice of |φ_j φ_j'| for |j − j'| ≥ 2.
    pub fn far_band_overlap(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for a in 0..self.phi.len() {
            for b in a + 2..self.phi.len() {
                for (x, y) in self.phi[a].iter().zip(&self.phi[b]) {
                    worst = worst.max((x * y).abs());
                }
            }
        }
        worst
    }

    /// Number of lattice points where φ_j is nonzero outside its annulus.
    pub fn support_violations(&self) -> usize {
        let t = self.grid.tables();
        let mut count = 0;
        for j in self.bands() {
            let s = 2f64.powi(j);
            for (idx, &p) in self.phi_unchecked(j).iter().enumerate() {
                let r = t.k_abs[idx];
                if p != 0.0 && (r < ANNULUS_INNER * s || r > ANNULUS_OUTER * s) {
                    count += 1;
                }
            }
        }
        count
    }

    /// (min, max) of Σ_j φ_j(k)² over nonzero lattice modes.
    pub fn near_orthogonality(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi: f64 = 0.0;
        for idx in 1..self.grid.len() {
            let s: f64 = self.phi.iter().map(|p| p[idx] * p[idx]).sum();
            lo = lo.min(s);
            hi = hi.max(s);
        }
        (lo, hi)
    }

    pub fn info(&self) -> BankInfo {
        let t = self.grid.tables();
        let bands = self
            .bands()
            .map(|j| {
                let s = 2f64.powi(j);
                let mut lo = f64::INFINITY;
                let mut hi: f64 = 0.0;
                let mut modes = 0;
                for (idx, &p) in self.phi_unchecked(j).iter().enumerate() {
                    if p != 0.0 {
                        lo = lo.min(t.k_abs[idx]);
                        hi = hi.max(t.k_abs[idx]);
                        modes += 1;
                    }
                }
                BandInfo {
                    j,
                    inner_radius: ANNULUS_INNER * s,
                    outer_radius: ANNULUS_OUTER * s,
                    lattice_min_k: if modes > 0 { lo } else { 0.0 },
                    lattice_max_k: hi,
                    modes,
                }
            })
            .collect();
        let (lo, hi) = self.near_orthogonality();
        BankInfo {
            n: self.grid.n(),
            j_min: self.j_min,
            j_max: self.j_max,
            bands,
            partition_residual: self.partition_residual(),
            far_band_overlap: self.far_band_overlap(),
            support_violations: self.support_violations(),
            near_orthogonality_min: lo,
            near_orthogonality_max: hi,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BandInfo {
    pub j: i32,
    pub inner_radius: f64,
    pub outer_radius: f64,
    pub lattice_min_k: f64,
    pub lattice_max_k: f64,
    pub modes: usize,
}

/// JSON-serialisable bank introspection.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BankInfo {
    pub n: usize,
    pub j_min: i32,
    pub j_max: i32,
    pub bands: Vec<BandInfo>,
    pub partition_residual: f64,
    pub far_band_overlap: f64,
    pub support_violations: usize,
    pub near_orthogonality_min: f64,
    pub near_orthogonality_max: f64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn bank(n: usize) -> FilterBank {
        FilterBank::build(Grid3::new(n).unwrap())
    }

    #[test]
    fn band_range() {
        let b = bank(16);
        assert_eq!(b.j_min(), -1);
        assert_eq!(b.j_max(), 4);
        assert_eq!(bank(32).j_max(), 5);
    }

    #[test]
    fn radius_two_sits_in_bands_zero_and_one() {
        let live: Vec<i32> = (-3..6)
            .filter(|&j| {
                let s = 2f64.powi(j);
                ANNULUS_INNER * s <= 2.0 && 2.0 <= ANNULUS_OUTER * s
            })
            .collect();
        assert_eq!(live, vec![0, 1]);
        let b = bank(16);
        let idx = b.grid().index_of([2, 0, 0]);
        for j in b.bands() {
            let p = b.phi(j).unwrap()[idx];
            assert_eq!(p > 0.0, j == 0 || j == 1, "band {j}");
        }
    }

    #[test]
    fn zero_mode_belongs_to_low_pass() {
        let b = bank(16);
        for j in b.bands() {
            assert_eq!(b.phi(j).unwrap()[0], 0.0);
        }
        assert_eq!(b.low_pass_multiplier(b.j_min())[0], 1.0);
    }

    #[test]
    fn partition_at_radius_five() {
        let b = bank(16);
        let idx = b.grid().index_of([3, 4, 0]);
        let s: f64 = b.bands().map(|j| b.phi(j).unwrap()[idx]).sum();
        assert!((s - 1.0).abs() < 1e-12);
    }

    #[test]
    fn profiles_agree_with_lattice_multipliers() {
        let b = bank(32);
        let t = b.grid().tables();
        for idx in [1usize, 37, 500, 4000, 20000] {
            let r = t.k_abs[idx];
            for j in b.bands() {
                let expect = phi_profile(r * 2f64.powi(-j));
                assert!((b.phi(j).unwrap()[idx] - expect).abs() < 1e-13);
            }
        }
        assert_eq!(chi_profile(0.0), 1.0);
        assert_eq!(chi_profile(1.5), 0.0);
        assert!((chi_profile(0.5) - 1.0).abs() < 1e-15);
        // χ + Σ_{j≥0} φ_j = 1 at a radius inside the transition region
        let r = 1.1;
        let s: f64 = chi_profile(r) + (0..4).map(|j| phi_profile(r * 2f64.powi(-j))).sum::<f64>();
        assert!((s - 1.0).abs() < 1e-12);
    }

    #[test]
    fn delta_and_low_pass_identities() {
        let b = bank(16);
        let g = b.grid();
        let mut f = SpectralField::zeros(g);
        f.set_mode([2, 0, 0], Complex64::new(0.7, -0.2));
        let sum = &b.delta_j(&f, 0).unwrap() + &b.delta_j(&f, 1).unwrap();
        assert!((&sum - &f).max_abs_coeff() < 1e-12);

        assert!(b.delta_j(&SpectralField::zeros(g), 2).unwrap().max_abs_coeff() == 0.0);
        assert!(b.delta_j(&f, 9).is_err());
        assert!(b.s_j(&f, b.j_min() - 1).is_err());

        let full = b.s_j(&f, b.j_max() + 1).unwrap();
        assert!((&full - &f).max_abs_coeff() < 1e-12);

        let c = SpectralField::constant(g, 2.5);
        for j in b.j_min()..=b.j_max() + 1 {
            assert!((&b.s_j(&c, j).unwrap() - &c).max_abs_coeff() < 1e-15);
        }
        for j in b.j_min() + 1..=b.j_max() + 1 {
            let lhs = &b.s_j(&f, j).unwrap() - &b.s_j(&f, j - 1).unwrap();
            let rhs = b.delta_j(&f, j - 1).unwrap();
            assert!((&lhs - &rhs).max_abs_coeff() < 1e-12);
        }
    }

    #[test]
    fn low_pass_of_mean_free_field_converges() {
        let b = bank(16);
        let g = b.grid();
        let f = SpectralField::from_fn(g, |x, y, z| x.cos() + (2.0 * y + z).sin() + (5.0 * z).cos());
        assert!(b.s_j(&f, b.j_min()).unwrap().max_abs_coeff() < 1e-15);
        let errs: Vec<f64> = (b.j_min()..=b.j_max() + 1)
            .map(|j| (&b.s_j(&f, j).unwrap() - &f).l2_norm())
            .collect();
        assert!(errs.windows(2).all(|w| w[1] <= w[0] + 1e-14));
        assert!(*errs.last().unwrap() < 1e-12);
    }

    #[test]
    fn invariants_on_standard_grids() {
        for n in [16, 32, 48, 64] {
            let info = bank(n).info();
            assert!(info.partition_residual <= 1e-12, "n={n}");
            assert_eq!(info.far_band_overlap, 0.0);
            assert_eq!(info.support_violations, 0);
            assert!(info.near_orthogonality_min >= 0.5 - 1e-12);
            assert!(info.near_orthogonality_max <= 1.0 + 1e-12);
        }
    }
}
