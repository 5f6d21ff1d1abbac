use serde::{Deserialize, Serialize};

use super::criterion::{CriterionKind, CriterionSpec};
use super::envelope;
use crate::error::{Error, Result};
use crate::littlewood_paley::{besov_norm_with, BesovSpec, FilterBank, VectorNorm};
use crate::solver::{modified_hs_sq, SolverState};
use crate::spectral::{sobolev_norm, Axis, Grid3, VectorField};

/// Monitor settings shared by every sample of one run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonitorConfig {
    pub velocity: CriterionSpec,
    pub vorticity: CriterionSpec,
    /// Sobolev index of the modified norm (s > 5/2).
    pub s: f64,
    /// Sample every `cadence` solver steps.
    pub cadence: usize,
    /// Prefactor C of the Gronwall envelopes.
    pub envelope_constant: f64,
    /// C in the logarithmic Sobolev bound.
    pub logsob_constant: f64,
    /// Physical-space refinement used for L^p norms of the bands.
    pub oversample: usize,
    /// Integrals start at the first sample with t ≥ start_time.
    pub start_time: f64,
    /// Time exponent q̃ of the b integrand in the velocity criterion.
    pub b_time_exponent: f64,
}

impl Default for MonitorConfig {
    fn default() -> Self {
        Self {
            velocity: CriterionSpec::velocity(f64::INFINITY, 2.0).expect("admissible"),
            vorticity: CriterionSpec::vorticity(3.0, 2.0).expect("admissible"),
            s: 3.0,
            cadence: 10,
            envelope_constant: 1.0,
            logsob_constant: 1.0,
            oversample: 1,
            start_time: 0.0,
            b_time_exponent: 1.0,
        }
    }
}

impl MonitorConfig {
    pub fn validate(&self) -> Result<()> {
        if self.velocity.kind != CriterionKind::VelocityField {
            return Err(Error::param("velocity criterion must have kind velocity_field"));
        }
        if self.vorticity.kind != CriterionKind::VorticityCurrent {
            return Err(Error::param("vorticity criterion must have kind vorticity_current"));
        }
        self.velocity.validate()?;
        self.vorticity.validate()?;
        if !(self.s > 2.5) || !self.s.is_finite() {
            return Err(Error::param(format!("monitor needs s > 5/2, got s = {}", self.s)));
        }
        if self.cadence == 0 {
            return Err(Error::param("monitor cadence must be at least 1"));
        }
        if self.oversample == 0 {
            return Err(Error::param("oversampling factor must be at least 1"));
        }
        for (name, c) in [
            ("envelope constant", self.envelope_constant),
            ("log-Sobolev constant", self.logsob_constant),
        ] {
            if !(c >= 0.0) || !c.is_finite() {
                return Err(Error::param(format!("{name} must be finite and >= 0, got {c}")));
            }
        }
        if !self.start_time.is_finite() {
            return Err(Error::param("monitor start time must be finite"));
        }
        if !(self.b_time_exponent >= 1.0) {
            return Err(Error::param(format!(
                "time exponent of the b integrand must be >= 1, got {}",
                self.b_time_exponent
            )));
        }
        Ok(())
    }
}

/// One monitor sample. The named fields are the exported columns.
///
/// For q = ∞ the u (or ω, J) part of a running integral is the running
/// maximum of the norm rather than a time integral. With p = ∞ in the
/// vorticity criterion `envelope_4_15` carries the double-exponential bound
/// on the unsquared norm, like `envelope_4_18`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MonitorRecord {
    pub t: f64,
    pub besov_u_p: f64,
    pub besov_b_inf: f64,
    pub besov_omega_p: f64,
    #[serde(rename = "besov_J_p")]
    pub besov_j_p: f64,
    pub hs_modified: f64,
    pub integral_1_8: f64,
    pub integral_1_9: f64,
    pub envelope_4_8: f64,
    pub envelope_4_15: f64,
    pub envelope_4_18: f64,
    pub grad_inf: f64,
    pub logsob_rhs: f64,
    #[serde(skip)]
    pub extras: RecordExtras,
}

/// Internal quantities carried between samples; not exported.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RecordExtras {
    pub besov_omega_inf: f64,
    pub besov_j_inf: f64,
    /// ‖u‖²_{Ḣ^s} + ‖b‖²_{Ḣ^s} + α‖∇b‖²_{Ḣ^s}
    pub hs_modified_sq: f64,
    /// ‖u‖_{Ḣ^s} + ‖b‖_{Ḣ^s}
    pub hs_ub: f64,
    /// Start of the integration window and the data there.
    pub window_start: f64,
    pub hs_modified_start: f64,
    pub hs_modified_sq_start: f64,
    /// Running suprema since the window start.
    pub hs_modified_sup: f64,
    pub hs_modified_sq_sup: f64,
    /// Running ∫‖u‖^q (or max for q = ∞), ∫‖b‖^q̃, ∫(‖ω‖+‖J‖)^q and
    /// ∫(‖ω‖_{∞}+‖J‖_{∞})^q over the window.
    pub time_u: f64,
    pub time_b: f64,
    pub time_wj: f64,
    pub time_wj_inf: f64,
    /// ∫(‖ω‖^q + ‖J‖^q)
    pub time_w_plus_j: f64,
}

impl MonitorRecord {
    pub fn elapsed(&self) -> f64 {
        self.t - self.extras.window_start
    }
}

fn besov0(f: &VectorField, p: f64, bank: &FilterBank, oversample: usize) -> Result<f64> {
    let spec = BesovSpec::homogeneous(0.0, p, f64::INFINITY)?;
    besov_norm_with(f, &spec, bank, VectorNorm::ComponentSum, oversample)
}

/// max_x |∇v(x)| with the Frobenius norm of the gradient matrix.
pub fn gradient_sup(v: &VectorField) -> f64 {
    let n = v.grid().len();
    let mut acc = vec![0.0; n];
    for comp in v.components() {
        for axis in Axis::ALL {
            let d = comp.derivative(axis).transform_inverse();
            for (a, x) in acc.iter_mut().zip(d) {
                *a += x * x;
            }
        }
    }
    acc.into_iter().fold(0.0, f64::max).sqrt()
}

/// Both sides of the logarithmic Sobolev bound for one state.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogSobolev {
    /// ‖∇u‖_∞ + ‖∇b‖_∞
    pub lhs: f64,
    /// C(1 + ‖(ω, J)‖_{Ḃ⁰_{∞,∞}} log(‖(u, b)‖_{Ḣ^s} + e))
    pub rhs: f64,
    pub ratio: f64,
}

pub(crate) fn logsob_rhs(c: f64, wj_inf: f64, hs_ub: f64) -> f64 {
    c * (1.0 + wj_inf * (hs_ub + std::f64::consts::E).ln())
}

pub fn log_sobolev_check(state: &SolverState, bank: &FilterBank, s: f64, c: f64) -> Result<LogSobolev> {
    if !(s > 2.5) {
        return Err(Error::param(format!("logarithmic Sobolev bound needs s > 5/2, got s = {s}")));
    }
    let lhs = gradient_sup(&state.u) + gradient_sup(&state.b);
    let wj = besov0(&state.u.curl(), f64::INFINITY, bank, 1)? + besov0(&state.b.curl(), f64::INFINITY, bank, 1)?;
    let hs = sobolev_norm(&state.u, s, true) + sobolev_norm(&state.b, s, true);
    let rhs = logsob_rhs(c, wj, hs);
    Ok(LogSobolev {
        lhs,
        rhs,
        ratio: if rhs > 0.0 { lhs / rhs } else { f64::INFINITY },
    })
}

/// Norms of one snapshot. Integrals are zero and the envelopes are those of
/// a window that starts at this sample.
pub fn sample(state: &SolverState, config: &MonitorConfig, bank: &FilterBank) -> Result<MonitorRecord> {
    config.validate()?;
    if state.grid() != bank.grid() {
        return Err(Error::GridMismatch {
            left: bank.grid().n(),
            right: state.grid().n(),
        });
    }
    let os = config.oversample;
    let (u, b) = (&state.u, &state.b);
    let omega = u.curl();
    let current = b.curl();
    let pu = config.velocity.p;
    let pw = config.vorticity.p;
    let pj = if config.vorticity.omega_only { pw.max(3.0) } else { pw };
    let inf = f64::INFINITY;

    let besov_u_p = besov0(u, pu, bank, os)?;
    let besov_b_inf = besov0(b, inf, bank, os)?;
    let besov_omega_p = besov0(&omega, pw, bank, os)?;
    let besov_j_p = besov0(&current, pj, bank, os)?;
    let besov_omega_inf = if pw.is_infinite() { besov_omega_p } else { besov0(&omega, inf, bank, os)? };
    let besov_j_inf = if pj.is_infinite() { besov_j_p } else { besov0(&current, inf, bank, os)? };

    let alpha = state.params.alpha;
    let s = config.s;
    let hu = sobolev_norm(u, s, true);
    let hb = sobolev_norm(b, s, true);
    let hgb = sobolev_norm(b, s + 1.0, true);
    let hs_modified = hu + hb + alpha.sqrt() * hgb;
    let hs_modified_sq = modified_hs_sq(u, b, alpha, s, true);
    let grad_inf = gradient_sup(u) + gradient_sup(b);

    let mut rec = MonitorRecord {
        t: state.t,
        besov_u_p,
        besov_b_inf,
        besov_omega_p,
        besov_j_p,
        hs_modified,
        grad_inf,
        logsob_rhs: logsob_rhs(config.logsob_constant, besov_omega_inf + besov_j_inf, hu + hb),
        extras: RecordExtras {
            besov_omega_inf,
            besov_j_inf,
            hs_modified_sq,
            hs_ub: hu + hb,
            ..RecordExtras::default()
        },
        ..MonitorRecord::default()
    };
    start_window(&mut rec);
    envelope::fill(&mut rec, config);
    Ok(rec)
}

fn start_window(rec: &mut MonitorRecord) {
    let e = &mut rec.extras;
    e.window_start = rec.t;
    e.hs_modified_start = rec.hs_modified;
    e.hs_modified_sq_start = e.hs_modified_sq;
    e.hs_modified_sup = rec.hs_modified;
    e.hs_modified_sq_sup = e.hs_modified_sq;
    e.time_u = 0.0;
    e.time_b = 0.0;
    e.time_wj = 0.0;
    e.time_wj_inf = 0.0;
    e.time_w_plus_j = 0.0;
    rec.integral_1_8 = 0.0;
    rec.integral_1_9 = 0.0;
}

fn pow(x: f64, q: f64) -> f64 {
    x.powf(q)
}

/// Trapezoid (or running max for an infinite exponent) step.
fn advance(acc: f64, f0: f64, f1: f64, q: f64, dt: f64) -> f64 {
    if q.is_infinite() {
        acc.max(f0).max(f1)
    } else {
        acc + 0.5 * dt * (pow(f0, q) + pow(f1, q))
    }
}

/// Appends `new`, carrying the running integrals, suprema and envelopes
/// forward from the last record.
pub fn accumulate(records: &mut Vec<MonitorRecord>, mut new: MonitorRecord, config: &MonitorConfig) -> Result<()> {
    let Some(prev) = records.last() else {
        start_window(&mut new);
        envelope::fill(&mut new, config);
        records.push(new);
        return Ok(());
    };
    if !(new.t > prev.t) {
        return Err(Error::Sequencing(format!(
            "monitor samples must have increasing times: {} after {}",
            new.t, prev.t
        )));
    }
    if new.t < config.start_time || prev.t < config.start_time {
        start_window(&mut new);
        envelope::fill(&mut new, config);
        records.push(new);
        return Ok(());
    }
    let dt = new.t - prev.t;
    let (qu, qb, qw) = (config.velocity.q, config.b_time_exponent, config.vorticity.q);
    let p = &prev.extras;
    let time_u = advance(p.time_u, prev.besov_u_p, new.besov_u_p, qu, dt);
    let time_b = advance(p.time_b, prev.besov_b_inf, new.besov_b_inf, qb, dt);
    let time_wj = advance(
        p.time_wj,
        prev.besov_omega_p + prev.besov_j_p,
        new.besov_omega_p + new.besov_j_p,
        qw,
        dt,
    );
    let time_wj_inf = advance(
        p.time_wj_inf,
        p.besov_omega_inf + p.besov_j_inf,
        new.extras.besov_omega_inf + new.extras.besov_j_inf,
        qw,
        dt,
    );
    let time_w_plus_j = if qw.is_infinite() {
        p.time_w_plus_j.max(new.besov_omega_p.max(new.besov_j_p))
    } else {
        p.time_w_plus_j
            + 0.5
                * dt
                * (pow(prev.besov_omega_p, qw) + pow(prev.besov_j_p, qw) + pow(new.besov_omega_p, qw) + pow(new.besov_j_p, qw))
    };
    let e = &mut new.extras;
    e.window_start = p.window_start;
    e.hs_modified_start = p.hs_modified_start;
    e.hs_modified_sq_start = p.hs_modified_sq_start;
    e.hs_modified_sup = p.hs_modified_sup.max(new.hs_modified);
    e.hs_modified_sq_sup = p.hs_modified_sq_sup.max(e.hs_modified_sq);
    e.time_u = time_u;
    e.time_b = time_b;
    e.time_wj = time_wj;
    e.time_wj_inf = time_wj_inf;
    e.time_w_plus_j = time_w_plus_j;
    new.integral_1_8 = time_u + time_b;
    new.integral_1_9 = time_w_plus_j;
    envelope::fill(&mut new, config);
    records.push(new);
    Ok(())
}

/// Samples a trajectory and keeps the record list.
#[derive(Clone, Debug)]
pub struct Monitor {
    config: MonitorConfig,
    bank: FilterBank,
    records: Vec<MonitorRecord>,
}

impl Monitor {
    pub fn new(config: MonitorConfig, grid: Grid3) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            config,
            bank: FilterBank::build(grid),
            records: Vec::new(),
        })
    }

    pub fn config(&self) -> &MonitorConfig {
        &self.config
    }

    pub fn bank(&self) -> &FilterBank {
        &self.bank
    }

    pub fn records(&self) -> &[MonitorRecord] {
        &self.records
    }

    pub fn into_records(self) -> Vec<MonitorRecord> {
        self.records
    }

    /// Samples `state` and appends the record.
    pub fn observe(&mut self, state: &SolverState) -> Result<&MonitorRecord> {
        let rec = sample(state, &self.config, &self.bank)?;
        accumulate(&mut self.records, rec, &self.config)?;
        Ok(self.records.last().expect("just pushed"))
    }

    pub fn minimal_constants(&self) -> envelope::MinimalConstants {
        envelope::minimal_constants(&self.records, &self.config)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::{initial_data, InitialSpec, PhysParams};

    fn grid() -> Grid3 {
        Grid3::new(16).unwrap()
    }

    fn synthetic(t: f64, value: f64) -> MonitorRecord {
        MonitorRecord {
            t,
            besov_u_p: value,
            besov_b_inf: value,
            besov_omega_p: value,
            besov_j_p: value,
            ..MonitorRecord::default()
        }
    }

    #[test]
    fn zero_state_has_zero_norms() {
        let s = SolverState::zeros(grid(), PhysParams::default());
        let cfg = MonitorConfig::default();
        let r = sample(&s, &cfg, &FilterBank::build(grid())).unwrap();
        for v in [r.besov_u_p, r.besov_b_inf, r.besov_omega_p, r.besov_j_p, r.hs_modified, r.grad_inf] {
            assert_eq!(v, 0.0);
        }
        assert_eq!(r.logsob_rhs, 1.0);
    }

    #[test]
    fn single_sample_has_zero_integrals() {
        let cfg = MonitorConfig::default();
        let mut recs = Vec::new();
        accumulate(&mut recs, synthetic(0.0, 2.0), &cfg).unwrap();
        assert_eq!(recs[0].integral_1_8, 0.0);
        assert_eq!(recs[0].integral_1_9, 0.0);
    }

    #[test]
    fn constant_integrand_integrates_exactly() {
        let cfg = MonitorConfig::default();
        let mut recs = Vec::new();
        accumulate(&mut recs, synthetic(0.0, 1.5), &cfg).unwrap();
        accumulate(&mut recs, synthetic(0.25, 1.5), &cfg).unwrap();
        // q = 2 for u, first power for b
        assert!((recs[1].integral_1_8 - 0.25 * (1.5f64.powi(2) + 1.5)).abs() < 1e-15);
        assert!((recs[1].integral_1_9 - 0.25 * 2.0 * 1.5f64.powi(2)).abs() < 1e-15);
    }

    #[test]
    fn linear_integrand_of_b_is_exact() {
        let cfg = MonitorConfig::default();
        let mut recs = Vec::new();
        for i in 0..=10 {
            let t = 0.1 * i as f64;
            let mut r = synthetic(t, 0.0);
            r.besov_b_inf = 3.0 * t + 1.0;
            accumulate(&mut recs, r, &cfg).unwrap();
        }
        let expect = 1.5 + 1.0;
        assert!((recs.last().unwrap().integral_1_8 - expect).abs() < 1e-12);
    }

    #[test]
    fn non_monotone_time_is_rejected() {
        let cfg = MonitorConfig::default();
        let mut recs = Vec::new();
        accumulate(&mut recs, synthetic(1.0, 1.0), &cfg).unwrap();
        let err = accumulate(&mut recs, synthetic(1.0, 1.0), &cfg).unwrap_err();
        assert!(matches!(err, Error::Sequencing(_)));
        assert!(accumulate(&mut recs, synthetic(0.5, 1.0), &cfg).is_err());
    }

    #[test]
    fn start_time_offsets_the_window() {
        let cfg = MonitorConfig {
            start_time: 0.5,
            ..MonitorConfig::default()
        };
        let mut recs = Vec::new();
        for i in 0..=4 {
            accumulate(&mut recs, synthetic(0.25 * i as f64, 1.0), &cfg).unwrap();
        }
        assert_eq!(recs[2].integral_1_9, 0.0);
        assert_eq!(recs[2].extras.window_start, 0.5);
        assert!((recs[4].integral_1_9 - 0.5 * 2.0).abs() < 1e-15);
    }

    #[test]
    fn single_mode_log_sobolev() {
        let g = grid();
        let spec = InitialSpec {
            kind: crate::solver::InitialKind::SingleMode,
            amplitude: 0.5,
            ..InitialSpec::default()
        };
        let (u, b) = initial_data(g, &spec).unwrap();
        let s = SolverState::new(u, b, 0.0, PhysParams::default()).unwrap();
        let ls = log_sobolev_check(&s, &FilterBank::build(g), 3.0, 1.0).unwrap();
        // u = 0.5 ŷ cos x, b = 0.5 ŷ sin x: |∂x u_y| + |∂x b_y| peaks at 0.5 each
        assert!((ls.lhs - 1.0).abs() < 1e-12);
        assert!(ls.rhs > 1.0 && ls.ratio.is_finite());
        assert!(log_sobolev_check(&s, &FilterBank::build(g), 2.5, 1.0).is_err());
    }

    #[test]
    fn monitor_on_taylor_green() {
        let g = grid();
        let (u, b) = initial_data(g, &InitialSpec::default()).unwrap();
        let s = SolverState::new(u, b, 0.0, PhysParams::new(0.01, 0.01, 0.1, 0.5).unwrap()).unwrap();
        let mut m = Monitor::new(MonitorConfig::default(), g).unwrap();
        let r = m.observe(&s).unwrap().clone();
        assert!(r.besov_u_p > 0.0 && r.besov_b_inf > 0.0 && r.hs_modified > 0.0);
        assert!((r.envelope_4_8 - r.extras.hs_modified_sq).abs() < 1e-12 * r.envelope_4_8);
    }
}
