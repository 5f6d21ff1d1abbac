use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::InequalityId;
use crate::error::{Error, Result};

/// Serde helper for reals that may be infinite or NaN: those are written as
/// the strings "inf", "-inf" and "nan" instead of JSON null.
pub mod lenient_f64 {
    use serde::de::{self, Visitor};
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else if v.is_nan() {
            s.serialize_str("nan")
        } else if *v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }

    struct LenientVisitor;

    impl Visitor<'_> for LenientVisitor {
        type Value = f64;

        fn expecting(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
            f.write_str("a number or one of \"inf\", \"-inf\", \"nan\"")
        }

        fn visit_f64<E: de::Error>(self, v: f64) -> Result<f64, E> {
            Ok(v)
        }

        fn visit_i64<E: de::Error>(self, v: i64) -> Result<f64, E> {
            Ok(v as f64)
        }

        fn visit_u64<E: de::Error>(self, v: u64) -> Result<f64, E> {
            Ok(v as f64)
        }

        fn visit_str<E: de::Error>(self, v: &str) -> Result<f64, E> {
            match v {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                "nan" => Ok(f64::NAN),
                other => Err(E::custom(format!("unexpected real '{other}'"))),
            }
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        d.deserialize_any(LenientVisitor)
    }
}

/// Ratio statistics of one case on one grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResolutionStats {
    pub n: usize,
    pub trials: usize,
    #[serde(with = "lenient_f64")]
    pub max: f64,
    #[serde(with = "lenient_f64")]
    pub median: f64,
    #[serde(with = "lenient_f64")]
    pub min: f64,
}

/// One parameter combination of an inequality.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CaseReport {
    pub label: String,
    pub per_resolution: Vec<ResolutionStats>,
    /// max over resolutions of the per-resolution max ratio, divided by the
    /// min over resolutions of the same.
    #[serde(with = "lenient_f64")]
    pub stability: f64,
}

impl CaseReport {
    pub fn max_ratio(&self) -> f64 {
        self.per_resolution.iter().map(|r| r.max).fold(0.0, f64::max)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub inequality_id: InequalityId,
    /// Trials per resolution.
    pub trials: usize,
    #[serde(with = "lenient_f64")]
    pub max_ratio: f64,
    #[serde(with = "lenient_f64")]
    pub median_ratio: f64,
    pub resolutions: Vec<usize>,
    /// Trial k on every grid uses seed `seed + k`.
    pub seed: u64,
    pub slope: f64,
    pub stability_factor: f64,
    pub cases: Vec<CaseReport>,
    /// Largest identity residual or exactness defect seen in any trial.
    #[serde(with = "lenient_f64")]
    pub max_residual: f64,
    /// Trials that broke an exact per-trial bound.
    pub violations: usize,
    pub details: BTreeMap<String, String>,
    pub pass: bool,
    pub failures: Vec<String>,
}

impl VerificationReport {
    pub fn case(&self, label: &str) -> Option<&CaseReport> {
        self.cases.iter().find(|c| c.label == label)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CalibrationDocument {
    pub format: String,
    pub version: u32,
    pub generator: String,
    pub reports: Vec<VerificationReport>,
}

pub const CALIBRATION_FORMAT: &str = "tfmhd-calibration";

impl CalibrationDocument {
    pub fn new(reports: Vec<VerificationReport>) -> Self {
        Self {
            format: CALIBRATION_FORMAT.into(),
            version: 1,
            generator: format!("tfmhd-core {}", env!("CARGO_PKG_VERSION")),
            reports,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self).map_err(|e| Error::Format(e.to_string()))?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: Self = serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
        if doc.format != CALIBRATION_FORMAT {
            return Err(Error::Format(format!("not a calibration report: format '{}'", doc.format)));
        }
        Ok(doc)
    }
}

/// Writes every report's constants, grids and seeds as one JSON document.
/// The output depends only on the reports, so fixed seeds give identical bytes.
pub fn calibration_report(reports: &[VerificationReport], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let text = CalibrationDocument::new(reports.to_vec()).to_json()?;
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn read_calibration_report(path: impl AsRef<Path>) -> Result<CalibrationDocument> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    CalibrationDocument::from_json(&text)
}
