use serde::{Deserialize, Serialize};

use super::record::{logsob_rhs, MonitorConfig, MonitorRecord};
use crate::error::{Error, Result};

/// ‖g‖_{L^q_T} from a running ∫g^q (or running max when q = ∞).
fn lq_time(acc: f64, q: f64) -> f64 {
    if q.is_infinite() {
        acc
    } else {
        acc.powf(1.0 / q)
    }
}

fn recip(x: f64) -> f64 {
    if x.is_infinite() {
        0.0
    } else {
        1.0 / x
    }
}

/// C·E_s(0)·exp(‖u‖^{2p/(p−3)}_{L^q_T(Ḃ⁰_{p,∞})} T^{(p/(p−3))(1−2/q−3/p)} + ‖b‖_{L¹_T(Ḃ⁰_{∞,∞})}),
/// with ‖b‖_{L¹_T} ≤ T^{1−1/q̃}‖b‖_{L^q̃_T} when q̃ > 1.
fn case1(rec: &MonitorRecord, config: &MonitorConfig, c: f64) -> f64 {
    let (p, q) = (config.velocity.p, config.velocity.q);
    let (power, t_exp) = if p.is_infinite() {
        (2.0, 1.0 - 2.0 * recip(q))
    } else {
        (2.0 * p / (p - 3.0), p / (p - 3.0) * (1.0 - 2.0 * recip(q) - 3.0 / p))
    };
    let big_t = rec.elapsed();
    let e = &rec.extras;
    let lu = lq_time(e.time_u, q);
    let qb = config.b_time_exponent;
    let lb = big_t.powf(1.0 - recip(qb)) * lq_time(e.time_b, qb);
    c * e.hs_modified_sq_start * (lu.powf(power) * big_t.powf(t_exp) + lb).exp()
}

/// C·E_s(0)·exp(‖(ω,J)‖^{2p/(2p−3)}_{L^q_T(Ḃ⁰_{p,∞})} T^{(p/(2p−3))(2−2/q−3/p)}), finite p.
fn case2_finite(rec: &MonitorRecord, config: &MonitorConfig, c: f64) -> f64 {
    let (p, q) = (config.vorticity.p, config.vorticity.q);
    let power = 2.0 * p / (2.0 * p - 3.0);
    let t_exp = p / (2.0 * p - 3.0) * (2.0 - 2.0 * recip(q) - 3.0 / p);
    let e = &rec.extras;
    let l = lq_time(e.time_wj, q);
    c * e.hs_modified_sq_start * (l.powf(power) * rec.elapsed().powf(t_exp)).exp()
}

/// (‖(u₀,b₀,α^{1/2}∇b₀)‖_{Ḣ^s} + e)^{A}·exp(C·T·A),
/// A = exp(C‖(ω,J)‖_{L^q_T(Ḃ⁰_{∞,∞})} T^{1−1/q}).
fn double_exponential(rec: &MonitorRecord, config: &MonitorConfig, c: f64) -> f64 {
    let q = config.vorticity.q;
    let big_t = rec.elapsed();
    let l = lq_time(rec.extras.time_wj_inf, q);
    let a = (c * l * big_t.powf(1.0 - recip(q))).exp();
    (rec.extras.hs_modified_start + std::f64::consts::E).powf(a) * (c * big_t * a).exp()
}

/// Envelope of the velocity criterion for the last record.
pub fn envelope_case1(records: &[MonitorRecord], config: &MonitorConfig, c: f64) -> Result<f64> {
    let p = config.velocity.p;
    if !(p > 3.0) {
        return Err(Error::param(format!("velocity envelope requires p > 3, got p = {p}")));
    }
    let rec = records.last().ok_or_else(|| Error::param("envelope needs at least one record"))?;
    Ok(case1(rec, config, c))
}

/// Envelope of the vorticity criterion for the last record; p = ∞ selects
/// the double-exponential bound.
pub fn envelope_case2(records: &[MonitorRecord], config: &MonitorConfig, c: f64) -> Result<f64> {
    let p = config.vorticity.p;
    if !(p >= 3.0) {
        return Err(Error::param(format!("vorticity envelope requires p >= 3, got p = {p}")));
    }
    let rec = records.last().ok_or_else(|| Error::param("envelope needs at least one record"))?;
    Ok(if p.is_infinite() {
        double_exponential(rec, config, c)
    } else {
        case2_finite(rec, config, c)
    })
}

pub fn envelope_4_18(records: &[MonitorRecord], config: &MonitorConfig, c: f64) -> Result<f64> {
    let rec = records.last().ok_or_else(|| Error::param("envelope needs at least one record"))?;
    Ok(double_exponential(rec, config, c))
}

/// Fills the envelope columns of a record whose running data is current.
pub(crate) fn fill(rec: &mut MonitorRecord, config: &MonitorConfig) {
    let c = config.envelope_constant;
    rec.envelope_4_8 = case1(rec, config, c);
    rec.envelope_4_15 = if config.vorticity.p.is_infinite() || config.vorticity.p < 3.0 {
        double_exponential(rec, config, c)
    } else {
        case2_finite(rec, config, c)
    };
    rec.envelope_4_18 = double_exponential(rec, config, c);
}

/// Smallest constants that make each bound hold on every record.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MinimalConstants {
    /// max_t sup_{τ≤t} E_s(τ) / envelope_4_8(t; C = 1)
    pub envelope_4_8: f64,
    /// Same for the vorticity envelope (bisection for p = ∞).
    pub envelope_4_15: f64,
    /// Smallest C with sup_{τ≤t}‖·‖_{Ḣ^s} ≤ envelope_4_18(t; C) for all t.
    pub envelope_4_18: f64,
    /// max_t ‖(∇u,∇b)‖_∞ / (1 + ‖(ω,J)‖_{Ḃ⁰_{∞,∞}} log(‖(u,b)‖_{Ḣ^s} + e))
    pub logsob: f64,
}

fn max_ratio(records: &[MonitorRecord], f: impl Fn(&MonitorRecord) -> (f64, f64)) -> f64 {
    records
        .iter()
        .map(|r| {
            let (num, den) = f(r);
            if num == 0.0 {
                0.0
            } else if den > 0.0 {
                num / den
            } else {
                f64::INFINITY
            }
        })
        .fold(0.0, f64::max)
}

/// Smallest C ≥ 0 with lhs(r) ≤ bound(r, C) on every record; `bound` must be
/// nondecreasing in C.
fn bisect(records: &[MonitorRecord], lhs: impl Fn(&MonitorRecord) -> f64, bound: impl Fn(&MonitorRecord, f64) -> f64) -> f64 {
    let holds = |c: f64| records.iter().all(|r| lhs(r) <= bound(r, c));
    if holds(0.0) {
        return 0.0;
    }
    let mut hi = 1.0;
    while !holds(hi) {
        hi *= 2.0;
        if hi > 1e6 {
            return f64::INFINITY;
        }
    }
    let mut lo = 0.0;
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if holds(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

pub fn minimal_constants(records: &[MonitorRecord], config: &MonitorConfig) -> MinimalConstants {
    let c48 = max_ratio(records, |r| (r.extras.hs_modified_sq_sup, case1(r, config, 1.0)));
    let p = config.vorticity.p;
    let c418 = bisect(records, |r| r.extras.hs_modified_sup, |r, c| double_exponential(r, config, c));
    let c415 = if p.is_infinite() || p < 3.0 {
        c418
    } else {
        max_ratio(records, |r| (r.extras.hs_modified_sq_sup, case2_finite(r, config, 1.0)))
    };
    let logsob = max_ratio(records, |r| {
        (r.grad_inf, logsob_rhs(1.0, r.extras.besov_omega_inf + r.extras.besov_j_inf, r.extras.hs_ub))
    });
    MinimalConstants {
        envelope_4_8: c48,
        envelope_4_15: c415,
        envelope_4_18: c418,
        logsob,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::monitor::{accumulate, CriterionSpec};

    fn constant_records(config: &MonitorConfig, n: usize, dt: f64, v: f64, hs: f64) -> Vec<MonitorRecord> {
        let mut recs = Vec::new();
        for i in 0..n {
            let mut r = MonitorRecord {
                t: i as f64 * dt,
                besov_u_p: v,
                besov_b_inf: v,
                besov_omega_p: v,
                besov_j_p: v,
                hs_modified: hs.sqrt(),
                ..MonitorRecord::default()
            };
            r.extras.hs_modified_sq = hs;
            r.extras.besov_omega_inf = v;
            r.extras.besov_j_inf = v;
            accumulate(&mut recs, r, config).unwrap();
        }
        recs
    }

    #[test]
    fn zero_trajectory() {
        let cfg = MonitorConfig::default();
        let recs = constant_records(&cfg, 5, 0.1, 0.0, 2.0);
        assert!((envelope_case1(&recs, &cfg, 3.0).unwrap() - 6.0).abs() < 1e-14);
        assert!((envelope_case2(&recs, &cfg, 3.0).unwrap() - 6.0).abs() < 1e-14);
        let inf = MonitorConfig {
            vorticity: CriterionSpec::vorticity(f64::INFINITY, 2.0).unwrap(),
            ..MonitorConfig::default()
        };
        let recs = constant_records(&inf, 5, 0.1, 0.0, 2.0);
        let e = envelope_case2(&recs, &inf, 1.5).unwrap();
        let expect = (2f64.sqrt() + std::f64::consts::E) * (1.5f64 * 0.4).exp();
        assert!((e - expect).abs() < 1e-12 * expect);
    }

    #[test]
    fn constant_records_closed_form() {
        // p = 6, q = 8: 2/q + 3/p = 3/4 so T carries a positive power
        let cfg = MonitorConfig {
            velocity: CriterionSpec::velocity(6.0, 8.0).unwrap(),
            vorticity: CriterionSpec::vorticity(4.0, 4.0).unwrap(),
            ..MonitorConfig::default()
        };
        let (v, hs, dt, n) = (0.7, 3.0, 0.05, 21);
        let recs = constant_records(&cfg, n, dt, v, hs);
        let t = dt * (n - 1) as f64;
        // ‖u‖_{L^8_T} = v T^{1/8}; 2p/(p−3) = 4, (p/(p−3))(1−2/q−3/p) = 1/2
        let lu = v * t.powf(1.0 / 8.0);
        let e1 = 2.0 * hs * (lu.powi(4) * t.sqrt() + v * t).exp();
        let got = envelope_case1(&recs, &cfg, 2.0).unwrap();
        assert!((got - e1).abs() < 1e-10 * e1, "{got} vs {e1}");
        // (ω,J) tuple 2v; 2p/(2p−3) = 8/5, (p/(2p−3))(2−2/q−3/p) = (4/5)(3/4)
        let l = 2.0 * v * t.powf(0.25);
        let e2 = hs * (l.powf(1.6) * t.powf(0.6)).exp();
        let got = envelope_case2(&recs, &cfg, 1.0).unwrap();
        assert!((got - e2).abs() < 1e-10 * e2, "{got} vs {e2}");
    }

    #[test]
    fn critical_scaling_removes_time_power() {
        let cfg = MonitorConfig {
            velocity: CriterionSpec::velocity(6.0, 4.0).unwrap(),
            ..MonitorConfig::default()
        };
        let (v, hs, dt, n) = (0.3, 1.0, 0.1, 11);
        let recs = constant_records(&cfg, n, dt, v, hs);
        let t = 1.0;
        let lu = v * t;
        let b = v * t;
        let expect = hs * (lu.powi(4) + b).exp();
        let got = envelope_case1(&recs, &cfg, 1.0).unwrap();
        assert!((got - expect).abs() < 1e-10 * expect);
        // at p = 3 the vorticity power 2p/(2p−3) is exactly 2
        let p = 3.0;
        assert_eq!(2.0 * p / (2.0 * p - 3.0), 2.0);
    }

    #[test]
    fn domain_errors() {
        let cfg = MonitorConfig::default();
        assert!(envelope_case1(&[], &cfg, 1.0).is_err());
        let mut bad = cfg.clone();
        bad.velocity.p = 3.0;
        let recs = constant_records(&cfg, 2, 0.1, 1.0, 1.0);
        assert!(envelope_case1(&recs, &bad, 1.0).is_err());
        let mut bad = cfg.clone();
        bad.vorticity.p = 2.0;
        assert!(envelope_case2(&recs, &bad, 1.0).is_err());
    }

    #[test]
    fn minimal_constant_of_decaying_norm_is_one() {
        let cfg = MonitorConfig::default();
        let mut recs = Vec::new();
        for i in 0..10 {
            let hs = 4.0 * (-(i as f64) * 0.1).exp();
            let mut r = MonitorRecord {
                t: i as f64 * 0.1,
                besov_u_p: 1.0,
                besov_b_inf: 1.0,
                besov_omega_p: 1.0,
                besov_j_p: 1.0,
                hs_modified: hs.sqrt(),
                ..MonitorRecord::default()
            };
            r.extras.hs_modified_sq = hs;
            accumulate(&mut recs, r, &cfg).unwrap();
        }
        let m = minimal_constants(&recs, &cfg);
        assert!((m.envelope_4_8 - 1.0).abs() < 1e-15);
        assert!((m.envelope_4_15 - 1.0).abs() < 1e-15);
        assert_eq!(m.envelope_4_18, 0.0);
    }
}
