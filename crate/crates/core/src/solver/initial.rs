use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::random::{random_solenoidal, rng_from_seed, SpectralBand};
use crate::spectral::{sobolev_norm, Grid3, SpectralField, VectorField};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialKind {
    TaylorGreen,
    BeltramiAbc,
    RandomBandLimited,
    SingleMode,
}

impl FromStr for InitialKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "taylor_green" => Ok(Self::TaylorGreen),
            "beltrami_abc" => Ok(Self::BeltramiAbc),
            "random_band_limited" => Ok(Self::RandomBandLimited),
            "single_mode" => Ok(Self::SingleMode),
            other => Err(Error::param(format!(
                "unknown initial data kind '{other}' (expected taylor_green, beltrami_abc, random_band_limited or single_mode)"
            ))),
        }
    }
}

impl InitialKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::TaylorGreen => "taylor_green",
            Self::BeltramiAbc => "beltrami_abc",
            Self::RandomBandLimited => "random_band_limited",
            Self::SingleMode => "single_mode",
        }
    }
}

/// Everything needed to build an initial pair (u₀, b₀).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InitialSpec {
    pub kind: InitialKind,
    pub seed: u64,
    pub amplitude: f64,
    /// Radial shell [k_lo, k_hi] for random data.
    pub band: (f64, f64),
    /// Spectral slope of random data.
    pub slope: f64,
    /// Wavevector and polarisation for single-mode data.
    pub mode: [i64; 3],
    pub polarization: [f64; 3],
}

impl Default for InitialSpec {
    fn default() -> Self {
        Self {
            kind: InitialKind::TaylorGreen,
            seed: 0,
            amplitude: 1.0,
            band: (1.0, 4.0),
            slope: -2.0,
            mode: [1, 0, 0],
            polarization: [0.0, 1.0, 0.0],
        }
    }
}

/// Solenoidal initial velocity and magnetic field.
///
/// * `taylor_green`: u = A(sin x cos y cos z, −cos x sin y cos z, 0),
///   b = A(cos x sin y sin z, sin x cos y sin z, −2 sin x sin y cos z).
/// * `beltrami_abc`: u the A=B=C=1 ABC flow at |k| = 1, b the same pattern at
///   |k| = 2 with half the amplitude.
/// * `random_band_limited`: Gaussian Leray-projected fields on the band,
///   each rescaled to H³ norm `amplitude`.
/// * `single_mode`: u = A p cos(k·x), b = A p sin(k·x) with p ⟂ k.
pub fn initial_data(grid: Grid3, spec: &InitialSpec) -> Result<(VectorField, VectorField)> {
    if !spec.amplitude.is_finite() {
        return Err(Error::param("amplitude must be finite"));
    }
    let a = spec.amplitude;
    let (u, b) = match spec.kind {
        InitialKind::TaylorGreen => (
            VectorField::from_fn(grid, |x, y, z| {
                [a * x.sin() * y.cos() * z.cos(), -a * x.cos() * y.sin() * z.cos(), 0.0]
            }),
            VectorField::from_fn(grid, |x, y, z| {
                [
                    a * x.cos() * y.sin() * z.sin(),
                    a * x.sin() * y.cos() * z.sin(),
                    -2.0 * a * x.sin() * y.sin() * z.cos(),
                ]
            }),
        ),
        InitialKind::BeltramiAbc => {
            let abc = |k: f64, amp: f64| {
                VectorField::from_fn(grid, move |x, y, z| {
                    [
                        amp * ((k * z).sin() + (k * y).cos()),
                        amp * ((k * x).sin() + (k * z).cos()),
                        amp * ((k * y).sin() + (k * x).cos()),
                    ]
                })
            };
            (abc(1.0, a), abc(2.0, 0.5 * a))
        }
        InitialKind::RandomBandLimited => {
            let (lo, hi) = spec.band;
            if !(lo >= 0.0 && hi >= lo) {
                return Err(Error::param(format!("invalid band [{lo}, {hi}]")));
            }
            let mut rng = rng_from_seed(spec.seed);
            let band = SpectralBand::new(lo, hi, spec.slope);
            let normalise = |v: VectorField| {
                let n = sobolev_norm(&v, 3.0, false);
                if n > 0.0 {
                    v.scale(a / n)
                } else {
                    v
                }
            };
            let u = normalise(random_solenoidal(grid, band, &mut rng));
            let b = normalise(random_solenoidal(grid, band, &mut rng));
            (u, b)
        }
        InitialKind::SingleMode => {
            let k = spec.mode;
            let p = spec.polarization;
            let dot: f64 = (0..3).map(|i| k[i] as f64 * p[i]).sum();
            if dot.abs() > 1e-12 {
                return Err(Error::param("single-mode polarisation must be orthogonal to the wavevector"));
            }
            let half = grid.k_max() as i64;
            if k.iter().any(|&c| c.abs() >= half) {
                return Err(Error::param(format!("mode {k:?} is not resolved on an n = {} grid", grid.n())));
            }
            let phase = |x: f64, y: f64, z: f64| k[0] as f64 * x + k[1] as f64 * y + k[2] as f64 * z;
            let build = |f: fn(f64) -> f64| {
                let comps = p.map(|pi| SpectralField::from_fn(grid, |x, y, z| a * pi * f(phase(x, y, z))));
                let [x, y, z] = comps;
                VectorField::new(x, y, z).expect("shared grid")
            };
            (build(f64::cos), build(f64::sin))
        }
    };
    Ok((u.project_leray(), b.project_leray()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g() -> Grid3 {
        Grid3::new(16).unwrap()
    }

    #[test]
    fn all_kinds_are_solenoidal() {
        for kind in [
            InitialKind::TaylorGreen,
            InitialKind::BeltramiAbc,
            InitialKind::RandomBandLimited,
            InitialKind::SingleMode,
        ] {
            let spec = InitialSpec {
                kind,
                ..InitialSpec::default()
            };
            let (u, b) = initial_data(g(), &spec).unwrap();
            for v in [&u, &b] {
                assert!(v.divergence_defect() <= 1e-12 * v.max_abs_coeff().max(1e-300));
                assert!(v.max_abs_coeff() > 0.0, "{kind:?}");
            }
        }
    }

    #[test]
    fn taylor_green_is_exactly_divergence_free() {
        let spec = InitialSpec::default();
        let (u, b) = initial_data(g(), &spec).unwrap();
        assert!(u.divergence().max_abs_coeff() < 1e-15);
        assert!(b.divergence().max_abs_coeff() < 1e-15);
    }

    #[test]
    fn random_data_is_reproducible_and_normalised() {
        let spec = InitialSpec {
            kind: InitialKind::RandomBandLimited,
            seed: 42,
            amplitude: 0.1,
            ..InitialSpec::default()
        };
        let (u1, b1) = initial_data(g(), &spec).unwrap();
        let (u2, b2) = initial_data(g(), &spec).unwrap();
        assert_eq!(u1, u2);
        assert_eq!(b1, b2);
        assert!((sobolev_norm(&u1, 3.0, false) - 0.1).abs() < 1e-14);
    }

    #[test]
    fn single_mode_rejects_compressive_polarisation() {
        let spec = InitialSpec {
            kind: InitialKind::SingleMode,
            polarization: [1.0, 0.0, 0.0],
            ..InitialSpec::default()
        };
        assert!(initial_data(g(), &spec).is_err());
    }

    #[test]
    fn kind_names_round_trip() {
        for k in ["taylor_green", "beltrami_abc", "random_band_limited", "single_mode"] {
            assert_eq!(k.parse::<InitialKind>().unwrap().name(), k);
        }
        assert!("vortex_ring".parse::<InitialKind>().is_err());
    }
}
