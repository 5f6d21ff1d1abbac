//! Randomised numerical checks of the harmonic-analysis inequalities behind
//! the a-priori estimates, with constant calibration across resolutions.
//!
//! Every trial draws fresh Gaussian band-limited fields from a seeded
//! generator, evaluates both sides of one inequality and records their
//! ratio. A report passes when the largest ratio of every parameter case
//! moves by at most `stability_factor` across the grids tested and the
//! inequality-specific exactness checks hold.

mod bounds;
mod report;
mod trials;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::littlewood_paley::FilterBank;
use crate::spectral::Grid3;

pub use bounds::{
    commutator_sides, paraproduct_terms, CommutatorSides, CommutatorTuple, ParaproductTerms, TERM_NAMES,
};
pub use report::{
    calibration_report, lenient_f64, read_calibration_report, CalibrationDocument, CaseReport,
    ResolutionStats, VerificationReport, CALIBRATION_FORMAT,
};

/// Tolerance for identities that hold exactly up to roundoff.
pub const IDENTITY_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum InequalityId {
    #[serde(rename = "bernstein_A2")]
    BernsteinBall,
    #[serde(rename = "bernstein_A3")]
    BernsteinAnnulus,
    #[serde(rename = "product_A_lemma2")]
    Product,
    #[serde(rename = "commutator_A4")]
    Commutator,
    #[serde(rename = "interpolation_2_1_iii")]
    Interpolation,
    #[serde(rename = "norm_equiv_2_1_i")]
    NormEquivalence,
    #[serde(rename = "biot_savart_4_14")]
    BiotSavart,
    #[serde(rename = "bony_A1")]
    Bony,
    #[serde(rename = "logsob_4_17")]
    LogSobolev,
    #[serde(rename = "paraproduct_terms_A5_A10")]
    ParaproductTerms,
}

impl InequalityId {
    pub const ALL: [InequalityId; 10] = [
        Self::BernsteinBall,
        Self::BernsteinAnnulus,
        Self::Product,
        Self::Commutator,
        Self::Interpolation,
        Self::NormEquivalence,
        Self::BiotSavart,
        Self::Bony,
        Self::LogSobolev,
        Self::ParaproductTerms,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::BernsteinBall => "bernstein_A2",
            Self::BernsteinAnnulus => "bernstein_A3",
            Self::Product => "product_A_lemma2",
            Self::Commutator => "commutator_A4",
            Self::Interpolation => "interpolation_2_1_iii",
            Self::NormEquivalence => "norm_equiv_2_1_i",
            Self::BiotSavart => "biot_savart_4_14",
            Self::Bony => "bony_A1",
            Self::LogSobolev => "logsob_4_17",
            Self::ParaproductTerms => "paraproduct_terms_A5_A10",
        }
    }
}

impl fmt::Display for InequalityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for InequalityId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|id| id.name() == s)
            .ok_or_else(|| {
                let names: Vec<&str> = Self::ALL.iter().map(|id| id.name()).collect();
                Error::param(format!("unknown inequality '{s}' (expected one of {})", names.join(", ")))
            })
    }
}

/// Trial counts, grids, seeds and parameter grid of a verification run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyConfig {
    /// Trials per resolution.
    pub trials: usize,
    pub resolutions: Vec<usize>,
    /// Trial k uses seed `seed + k` on every grid.
    pub seed: u64,
    /// Spectral slope of the Gaussian ensemble: coefficient amplitude ∝ |k|^slope.
    pub slope: f64,
    /// Allowed spread of the per-grid maximal ratio.
    pub stability_factor: f64,
    pub parallel: bool,
    pub commutator_tuples: Vec<CommutatorTuple>,
    pub paraproduct_tuples: Vec<CommutatorTuple>,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        let s = 3.0;
        let inf = f64::INFINITY;
        Self {
            trials: 100,
            resolutions: vec![16, 32, 48],
            seed: 0,
            slope: -2.0,
            stability_factor: 4.0,
            parallel: true,
            commutator_tuples: vec![
                CommutatorTuple::velocity_case(s, 4.0).expect("admissible"),
                CommutatorTuple::velocity_case(s, inf).expect("admissible"),
                CommutatorTuple::vorticity_case(s, 4.0).expect("admissible"),
                CommutatorTuple::vorticity_case(s, inf).expect("admissible"),
            ],
            paraproduct_tuples: vec![
                CommutatorTuple::new(2.0, -1.0, -1.0, 4.0, 4.0).expect("admissible"),
                CommutatorTuple::vorticity_case(s, 4.0).expect("admissible"),
            ],
        }
    }
}

impl VerifyConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::param("verification needs at least one trial"));
        }
        if self.resolutions.is_empty() {
            return Err(Error::param("verification needs at least one resolution"));
        }
        for &n in &self.resolutions {
            Grid3::new(n)?;
        }
        if !self.slope.is_finite() {
            return Err(Error::param("ensemble slope must be finite"));
        }
        if !(self.stability_factor >= 1.0) {
            return Err(Error::param("stability factor must be >= 1"));
        }
        for t in self.commutator_tuples.iter().chain(&self.paraproduct_tuples) {
            t.validate()?;
        }
        Ok(())
    }
}

/// Result of one trial: one ratio per case, optional side ratios reported
/// only as maxima, an exactness defect and whether an exact bound broke.
#[derive(Clone, Debug, Default)]
pub(crate) struct Outcome {
    pub ratios: Vec<f64>,
    pub extras: Vec<f64>,
    pub residual: f64,
    pub violation: bool,
}

pub(crate) struct Plan {
    pub cases: Vec<String>,
    pub extras: Vec<String>,
    pub details: BTreeMap<String, String>,
}

pub(crate) struct Context<'a> {
    pub config: &'a VerifyConfig,
    pub grid: Grid3,
    pub bank: FilterBank,
    /// [c₁, c₂] of the Ḃ^s_{2,2} / Ḣ^s equivalence per tested s.
    pub equivalence: Vec<(f64, f64)>,
}

/// Runs the randomised check of one inequality on every configured grid.
pub fn verify(id: InequalityId, config: &VerifyConfig) -> Result<VerificationReport> {
    config.validate()?;
    let plan = trials::plan(id, config)?;
    let mut per_grid: Vec<(usize, Vec<Outcome>)> = Vec::with_capacity(config.resolutions.len());
    let mut details = plan.details.clone();
    for &n in &config.resolutions {
        let grid = Grid3::new(n)?;
        let mut ctx = Context {
            config,
            grid,
            bank: FilterBank::build(grid),
            equivalence: Vec::new(),
        };
        trials::prepare(id, &mut ctx, &mut details);
        let seeds: Vec<u64> = (0..config.trials as u64).map(|k| config.seed.wrapping_add(k)).collect();
        // collect() keeps seed order, so the reduction below is deterministic
        let outcomes: Vec<Outcome> = if config.parallel {
            seeds
                .par_iter()
                .map(|&s| trials::run(id, &ctx, s))
                .collect::<Result<_>>()?
        } else {
            seeds.iter().map(|&s| trials::run(id, &ctx, s)).collect::<Result<_>>()?
        };
        per_grid.push((n, outcomes));
    }
    Ok(aggregate(id, config, &plan, per_grid, details))
}

/// The four-term splitting of the scalar commutator: identity residual and
/// per-term bounds.
pub fn verify_paraproduct_terms(config: &VerifyConfig) -> Result<VerificationReport> {
    verify(InequalityId::ParaproductTerms, config)
}

fn median(mut v: Vec<f64>) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

fn max_of(v: impl IntoIterator<Item = f64>) -> f64 {
    v.into_iter().fold(0.0, |a, b| if b.is_nan() || a.is_nan() { f64::NAN } else { a.max(b) })
}

fn aggregate(
    id: InequalityId,
    config: &VerifyConfig,
    plan: &Plan,
    per_grid: Vec<(usize, Vec<Outcome>)>,
    mut details: BTreeMap<String, String>,
) -> VerificationReport {
    let mut failures = Vec::new();
    let cases: Vec<CaseReport> = plan
        .cases
        .iter()
        .enumerate()
        .map(|(c, label)| {
            let per_resolution: Vec<ResolutionStats> = per_grid
                .iter()
                .map(|(n, outs)| {
                    let r: Vec<f64> = outs.iter().map(|o| o.ratios[c]).collect();
                    ResolutionStats {
                        n: *n,
                        trials: r.len(),
                        max: max_of(r.iter().copied()),
                        median: median(r.clone()),
                        min: r.iter().copied().fold(f64::INFINITY, f64::min),
                    }
                })
                .collect();
            let hi = max_of(per_resolution.iter().map(|r| r.max));
            let lo = per_resolution.iter().map(|r| r.max).fold(f64::INFINITY, f64::min);
            let stability = if hi == 0.0 { 1.0 } else { hi / lo };
            if !(stability <= config.stability_factor) {
                failures.push(format!(
                    "case {label}: maximal ratio varies by {stability:.3} across grids (allowed {})",
                    config.stability_factor
                ));
            }
            CaseReport {
                label: label.clone(),
                per_resolution,
                stability,
            }
        })
        .collect();
    let all: Vec<f64> = per_grid
        .iter()
        .flat_map(|(_, outs)| outs.iter().flat_map(|o| o.ratios.iter().copied()))
        .collect();
    for (e, label) in plan.extras.iter().enumerate() {
        let m = max_of(per_grid.iter().flat_map(|(_, outs)| outs.iter().map(|o| o.extras[e])));
        details.insert(format!("max_ratio[{label}]"), format!("{m:e}"));
    }
    let max_ratio = max_of(all.iter().copied());
    let median_ratio = median(all.clone());
    let max_residual = max_of(per_grid.iter().flat_map(|(_, outs)| outs.iter().map(|o| o.residual)));
    let violations = per_grid
        .iter()
        .map(|(_, outs)| outs.iter().filter(|o| o.violation).count())
        .sum();
    if !all.iter().all(|r| r.is_finite()) {
        failures.push("non-finite ratio".into());
    }
    if violations > 0 {
        failures.push(format!("{violations} trials broke an exact bound"));
    }
    match id {
        InequalityId::Bony | InequalityId::ParaproductTerms if !(max_residual <= IDENTITY_TOL) => {
            failures.push(format!("identity residual {max_residual:e} exceeds {IDENTITY_TOL:e}"));
        }
        InequalityId::Interpolation if !(max_ratio <= 1.0 + IDENTITY_TOL) => {
            failures.push(format!("interpolation ratio {max_ratio} exceeds 1 + {IDENTITY_TOL:e}"));
        }
        _ => {}
    }
    VerificationReport {
        inequality_id: id,
        trials: config.trials,
        max_ratio,
        median_ratio,
        resolutions: config.resolutions.clone(),
        seed: config.seed,
        slope: config.slope,
        stability_factor: config.stability_factor,
        cases,
        max_residual,
        violations,
        details,
        pass: failures.is_empty(),
        failures,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick() -> VerifyConfig {
        VerifyConfig {
            trials: 3,
            resolutions: vec![16],
            parallel: false,
            ..VerifyConfig::default()
        }
    }

    #[test]
    fn ids_round_trip_through_names_and_json() {
        for id in InequalityId::ALL {
            assert_eq!(id.name().parse::<InequalityId>().unwrap(), id);
            let json = serde_json::to_string(&id).unwrap();
            assert_eq!(json, format!("\"{}\"", id.name()));
        }
        assert!("bernstein".parse::<InequalityId>().is_err());
    }

    #[test]
    fn every_inequality_runs_on_a_small_grid() {
        for id in InequalityId::ALL {
            let r = verify(id, &quick()).unwrap();
            assert_eq!(r.trials, 3);
            assert!(r.max_ratio >= r.median_ratio && r.median_ratio > 0.0, "{id}: {r:?}");
            assert!(r.failures.iter().all(|f| !f.contains("exact")), "{id}: {:?}", r.failures);
        }
    }

    #[test]
    fn parallel_and_serial_agree() {
        let serial = verify(InequalityId::Bony, &quick()).unwrap();
        let par = verify(
            InequalityId::Bony,
            &VerifyConfig {
                parallel: true,
                ..quick()
            },
        )
        .unwrap();
        assert_eq!(serial, par);
    }

    #[test]
    fn inadmissible_tuple_is_rejected_with_its_condition() {
        let mut c = quick();
        c.commutator_tuples[0].sigma1 = 1.0;
        c.commutator_tuples[0].p1 = 3.0;
        let err = verify(InequalityId::Commutator, &c).unwrap_err().to_string();
        assert!(err.contains("d/p_1 − σ_1 > 0"), "{err}");
    }

    #[test]
    fn empty_configuration_is_rejected() {
        let c = VerifyConfig {
            trials: 0,
            ..quick()
        };
        assert!(verify(InequalityId::Bony, &c).is_err());
    }

    #[test]
    fn median_of_even_and_odd() {
        assert_eq!(median(vec![3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(vec![4.0, 1.0, 2.0, 3.0]), 2.5);
    }

    #[test]
    fn calibration_report_round_trips_and_is_stable() {
        let dir = std::env::temp_dir().join(format!("tfmhd-lab-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let empty = dir.join("empty.json");
        calibration_report(&[], &empty).unwrap();
        let doc = read_calibration_report(&empty).unwrap();
        assert!(doc.reports.is_empty());
        assert_eq!(doc.format, CALIBRATION_FORMAT);

        let r = verify(InequalityId::BernsteinBall, &quick()).unwrap();
        let a = dir.join("a.json");
        let b = dir.join("b.json");
        calibration_report(std::slice::from_ref(&r), &a).unwrap();
        let again = verify(InequalityId::BernsteinBall, &quick()).unwrap();
        calibration_report(&[again], &b).unwrap();
        assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
        let doc = read_calibration_report(&a).unwrap();
        assert_eq!(doc.reports, vec![r]);
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
