use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Error, Result};

/// Uniform periodic grid on the torus [0, 2π)³ with `n` points per axis.
///
/// Storage order is row-major `(i, j, l)` with `l` (the z index) fastest.
/// Per-axis wavenumbers follow FFT ordering, `0, 1, …, n/2, −n/2+1, …, −1`,
/// so the lattice is exactly `{−n/2+1, …, n/2}³`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Grid3 {
    n: usize,
}

impl Grid3 {
    pub fn new(n_per_axis: usize) -> Result<Self> {
        if n_per_axis < 8 || !n_per_axis.is_multiple_of(2) {
            return Err(Error::param(format!(
                "grid size must be even and >= 8, got {n_per_axis}"
            )));
        }
        Ok(Self { n: n_per_axis })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    /// Total number of grid points, n³.
    #[inline]
    pub fn len(&self) -> usize {
        self.n * self.n * self.n
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn k_max(&self) -> usize {
        self.n / 2
    }

    pub fn domain_length(&self) -> f64 {
        2.0 * PI
    }

    /// Quadrature weight of one grid cell, (2π/n)³.
    pub fn cell_volume(&self) -> f64 {
        let h = self.domain_length() / self.n as f64;
        h * h * h
    }

    pub fn volume(&self) -> f64 {
        let l = self.domain_length();
        l * l * l
    }

    /// Physical coordinate of grid index `i` along any axis.
    #[inline]
    pub fn coordinate(&self, i: usize) -> f64 {
        self.domain_length() * i as f64 / self.n as f64
    }

    #[inline]
    pub fn flat_index(&self, i: usize, j: usize, l: usize) -> usize {
        (i * self.n + j) * self.n + l
    }

    #[inline]
    pub fn unflatten(&self, idx: usize) -> [usize; 3] {
        let n = self.n;
        [idx / (n * n), (idx / n) % n, idx % n]
    }

    /// Signed wavenumber stored at per-axis index `m`.
    #[inline]
    pub fn wavenumber(&self, m: usize) -> i64 {
        if m <= self.n / 2 {
            m as i64
        } else {
            m as i64 - self.n as i64
        }
    }

    /// Per-axis storage index of signed wavenumber `k` (taken modulo n).
    #[inline]
    pub fn axis_index(&self, k: i64) -> usize {
        k.rem_euclid(self.n as i64) as usize
    }

    pub fn index_of(&self, k: [i64; 3]) -> usize {
        self.flat_index(
            self.axis_index(k[0]),
            self.axis_index(k[1]),
            self.axis_index(k[2]),
        )
    }

    pub fn wavevector(&self, idx: usize) -> [i64; 3] {
        let [i, j, l] = self.unflatten(idx);
        [self.wavenumber(i), self.wavenumber(j), self.wavenumber(l)]
    }

    pub(crate) fn tables(&self) -> Arc<GridTables> {
        static CACHE: OnceLock<Mutex<HashMap<usize, Arc<GridTables>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().expect("grid table cache poisoned");
        guard
            .entry(self.n)
            .or_insert_with(|| Arc::new(GridTables::build(*self)))
            .clone()
    }
}

/// Per-mode lookup tables shared by every field on a grid.
#[derive(Debug)]
pub(crate) struct GridTables {
    /// Wavevector used by odd multipliers: Nyquist components set to zero.
    pub k_odd: Vec<[f64; 3]>,
    pub k2: Vec<f64>,
    pub k_abs: Vec<f64>,
    /// Flat index of the mode −k.
    pub mirror: Vec<usize>,
    /// 2/3-rule mask: true where every |k_i| < (2/3)·k_max.
    pub keep: Vec<bool>,
}

impl GridTables {
    fn build(grid: Grid3) -> Self {
        let len = grid.len();
        let half = (grid.n / 2) as i64;
        let mut k_odd = Vec::with_capacity(len);
        let mut k2 = Vec::with_capacity(len);
        let mut k_abs = Vec::with_capacity(len);
        let mut mirror = Vec::with_capacity(len);
        let mut keep = Vec::with_capacity(len);
        for idx in 0..len {
            let w = grid.wavevector(idx);
            let kf = [w[0] as f64, w[1] as f64, w[2] as f64];
            let odd = w.map(|c| if c == half { 0.0 } else { c as f64 });
            let sq = kf[0] * kf[0] + kf[1] * kf[1] + kf[2] * kf[2];
            k_odd.push(odd);
            k2.push(sq);
            k_abs.push(sq.sqrt());
            mirror.push(grid.index_of([-w[0], -w[1], -w[2]]));
            // 3|k_i| < n  <=>  |k_i| < (2/3) k_max
            keep.push(w.iter().all(|&c| 3 * c.unsigned_abs() < grid.n as u64));
        }
        Self {
            k_odd,
            k2,
            k_abs,
            mirror,
            keep,
        }
    }
}
