use serde::{Deserialize, Serialize};

use super::state::SolverState;
use crate::error::{Error, Result};
use crate::spectral::VectorField;

/// Modified energies of one state.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyRecord {
    /// ‖u‖₂² + ‖b‖₂² + α‖∇b‖₂²
    pub l2_part: f64,
    /// ‖u‖²_{Ḣ^s} + ‖b‖²_{Ḣ^s} + α‖∇b‖²_{Ḣ^s}
    pub hs_part: f64,
    /// ‖u‖²_{H^s} + ‖b‖²_{H^s} + α‖∇b‖²_{H^s}
    pub modified_total: f64,
}

/// Σ_k w(|k|²)(|û|² + (1 + α|k|²)|b̂|²) scaled to physical norms.
fn weighted(u: &VectorField, b: &VectorField, alpha: f64, w: impl Fn(f64) -> f64) -> f64 {
    let grid = u.grid();
    let t = grid.tables();
    let mut acc = 0.0;
    for (cu, cb) in u.components().iter().zip(b.components()) {
        for ((x, y), &k2) in cu.coeffs().iter().zip(cb.coeffs()).zip(&t.k2) {
            acc += w(k2) * (x.norm_sqr() + (1.0 + alpha * k2) * y.norm_sqr());
        }
    }
    acc * grid.volume()
}

pub(crate) fn modified_hs_sq(u: &VectorField, b: &VectorField, alpha: f64, s: f64, homogeneous: bool) -> f64 {
    if homogeneous {
        weighted(u, b, alpha, |k2| if k2 == 0.0 { 0.0 } else { k2.powf(s) })
    } else {
        weighted(u, b, alpha, |k2| (1.0 + k2).powf(s))
    }
}

pub fn energy_functional(state: &SolverState, s: f64) -> Result<EnergyRecord> {
    if !(s >= 0.0) || !s.is_finite() {
        return Err(Error::param(format!("Sobolev index must be finite and >= 0, got {s}")));
    }
    let alpha = state.params.alpha;
    Ok(EnergyRecord {
        l2_part: state.modified_energy(),
        hs_part: modified_hs_sq(&state.u, &state.b, alpha, s, true),
        modified_total: modified_hs_sq(&state.u, &state.b, alpha, s, false),
    })
}
