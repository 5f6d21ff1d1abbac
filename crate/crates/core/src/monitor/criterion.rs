use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which family of continuation criteria a spec belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CriterionKind {
    /// ∫(‖u‖^q_{Ḃ⁰_{p,∞}} + ‖b‖_{Ḃ⁰_{∞,∞}}) dt with 2/q + 3/p ≤ 1, 3 < p ≤ ∞.
    VelocityField,
    /// ∫(‖ω‖^q_{Ḃ⁰_{p,∞}} + ‖J‖^q_{Ḃ⁰_{p,∞}}) dt with 2/q + 3/p ≤ 2, 3 ≤ p ≤ ∞.
    VorticityCurrent,
}

impl CriterionKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::VelocityField => "velocity_field",
            Self::VorticityCurrent => "vorticity_current",
        }
    }
}

impl fmt::Display for CriterionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CriterionKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "velocity_field" | "velocity" => Ok(Self::VelocityField),
            "vorticity_current" | "vorticity" => Ok(Self::VorticityCurrent),
            other => Err(Error::param(format!(
                "unknown criterion kind '{other}' (expected velocity_field or vorticity_current)"
            ))),
        }
    }
}

/// An admissible (p, q) pair for one criterion family.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriterionSpec {
    pub kind: CriterionKind,
    pub p: f64,
    pub q: f64,
    /// Vorticity family only: admit 3/2 < p < 3 for the ω integrand.
    pub omega_only: bool,
}

const SLACK: f64 = 1e-12;

fn recip(x: f64) -> f64 {
    if x.is_infinite() {
        0.0
    } else {
        1.0 / x
    }
}

impl CriterionSpec {
    /// Checks the exponent relations; the error names the one that fails.
    pub fn new(kind: CriterionKind, p: f64, q: f64) -> Result<Self> {
        let spec = Self {
            kind,
            p,
            q,
            omega_only: false,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Vorticity criterion restricted to the ω integrand, with 3/2 < p ≤ ∞.
    pub fn omega_only(p: f64, q: f64) -> Result<Self> {
        let spec = Self {
            kind: CriterionKind::VorticityCurrent,
            p,
            q,
            omega_only: true,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn velocity(p: f64, q: f64) -> Result<Self> {
        Self::new(CriterionKind::VelocityField, p, q)
    }

    pub fn vorticity(p: f64, q: f64) -> Result<Self> {
        Self::new(CriterionKind::VorticityCurrent, p, q)
    }

    /// 2/q + 3/p.
    pub fn scaling(&self) -> f64 {
        2.0 * recip(self.q) + 3.0 * recip(self.p)
    }

    pub fn validate(&self) -> Result<()> {
        let (p, q) = (self.p, self.q);
        if p.is_nan() || q.is_nan() || !(q >= 1.0) {
            return Err(Error::param(format!("criterion exponents must satisfy q >= 1, got p = {p}, q = {q}")));
        }
        let scaling = self.scaling();
        let mut broken = Vec::new();
        let name = self.kind.name();
        match self.kind {
            CriterionKind::VelocityField => {
                if self.omega_only {
                    return Err(Error::param("the omega-only range applies to the vorticity_current criterion"));
                }
                if !(p > 3.0) {
                    broken.push("3 < p <= inf".to_string());
                }
                if scaling > 1.0 + SLACK {
                    broken.push(format!("2/q+3/p ≤ 1 (got 2/q+3/p = {scaling})"));
                }
            }
            CriterionKind::VorticityCurrent => {
                let ok = if self.omega_only { p > 1.5 } else { p >= 3.0 };
                if !ok {
                    let range = if self.omega_only { "3/2 < p <= inf" } else { "3 <= p <= inf" };
                    broken.push(range.to_string());
                }
                if scaling > 2.0 + SLACK {
                    broken.push(format!("2/q+3/p ≤ 2 (got 2/q+3/p = {scaling})"));
                }
            }
        }
        if !broken.is_empty() {
            return Err(Error::param(format!(
                "{name} criterion with p = {p}, q = {q} violates {}",
                broken.join(" and ")
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const INF: f64 = f64::INFINITY;

    #[test]
    fn velocity_admissibility() {
        assert!(CriterionSpec::velocity(INF, 2.0).is_ok());
        let e = CriterionSpec::velocity(INF, 1.0).unwrap_err().to_string();
        assert!(e.contains("2/q+3/p ≤ 1"), "{e}");
        let e = CriterionSpec::velocity(3.0, 1.0).unwrap_err().to_string();
        assert!(e.contains("3 < p") && e.contains("2/q+3/p ≤ 1"), "{e}");
        assert!(CriterionSpec::velocity(6.0, 4.0).is_ok());
        assert!(CriterionSpec::velocity(6.0, 3.9).is_err());
    }

    #[test]
    fn vorticity_admissibility() {
        assert!(CriterionSpec::vorticity(3.0, 2.0).is_ok());
        assert!(CriterionSpec::vorticity(INF, 1.0).is_ok());
        let e = CriterionSpec::vorticity(3.0, 1.5).unwrap_err().to_string();
        assert!(e.contains("2/q+3/p ≤ 2"), "{e}");
        assert!(CriterionSpec::vorticity(2.0, INF).is_err());
        assert!(CriterionSpec::omega_only(2.0, INF).is_ok());
        assert!(CriterionSpec::omega_only(1.5, INF).is_err());
    }

    #[test]
    fn rejects_small_q() {
        assert!(CriterionSpec::vorticity(INF, 0.5).is_err());
        assert!(CriterionSpec::vorticity(f64::NAN, 2.0).is_err());
    }
}
