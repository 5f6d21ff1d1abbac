use std::collections::BTreeMap;

use rand_distr::{Distribution, Uniform};

use super::bounds::{band_l2_norms, commutator_sides, fmt_num, paraproduct_terms, TERM_NAMES};
use super::{Context, InequalityId, Outcome, Plan, VerifyConfig, IDENTITY_TOL};
use crate::error::Result;
use crate::littlewood_paley::{besov_from_band_norms, bony_decompose, sobolev_besov_equivalence, FilterBank};
use crate::monitor::log_sobolev_check;
use crate::solver::{PhysParams, SolverState};
use crate::spectral::random::{random_scalar, random_solenoidal, rng_from_seed, FieldRng, SpectralBand};
use crate::spectral::{
    lp_norm_physical, scalar_product, sobolev_norm, Axis, ProductRule, SpectralField, VectorField,
};

const INF: f64 = f64::INFINITY;

/// (k, p, q) for the ball inequality.
const BALL_CASES: [(u32, f64, f64); 4] = [(0, 2.0, INF), (1, 2.0, 2.0), (1, 2.0, INF), (2, 4.0, INF)];
/// (k, p) for the annulus inequality.
const ANNULUS_CASES: [(u32, f64); 4] = [(1, 2.0), (1, 4.0), (1, INF), (2, INF)];
const PRODUCT_S: [f64; 4] = [0.5, 1.0, 2.0, 3.0];
const INTERP_P: [f64; 3] = [2.0, 4.0, INF];
const INTERP_Q: [f64; 3] = [1.0, 2.0, INF];
const EQUIV_S: [f64; 5] = [-1.0, 0.5, 1.0, 2.0, 3.0];
const BIOT_P: [f64; 3] = [3.0, 4.0, INF];
const LOGSOB_S: f64 = 3.0;

pub(crate) fn plan(id: InequalityId, config: &VerifyConfig) -> Result<Plan> {
    let mut details = BTreeMap::new();
    let ensemble = |band: &str| {
        format!(
            "Gaussian coefficients with amplitude |k|^{} on {band}, Nyquist modes empty",
            fmt_num(config.slope)
        )
    };
    let product_band = "|k| < n/4 (products exact without dealiasing)";
    let shells = "each factor on one dyadic shell 2^a <= |k| < min(2^(a+1), n/4), a drawn uniformly";
    let (cases, extras): (Vec<String>, Vec<String>) = match id {
        InequalityId::BernsteinBall => {
            details.insert("ensemble".into(), ensemble("|k| <= lambda, lambda = 2^m <= n/4 drawn uniformly"));
            (
                BALL_CASES
                    .iter()
                    .map(|(k, p, q)| format!("k={k},p={},q={}", fmt_num(*p), fmt_num(*q)))
                    .collect(),
                vec![],
            )
        }
        InequalityId::BernsteinAnnulus => {
            details.insert(
                "ensemble".into(),
                ensemble("one dyadic block Delta_j f, j drawn uniformly from the bank, lambda = 2^j"),
            );
            (
                ANNULUS_CASES
                    .iter()
                    .map(|(k, p)| format!("k={k},p={}", fmt_num(*p)))
                    .collect(),
                vec![],
            )
        }
        InequalityId::Product => {
            details.insert("ensemble".into(), ensemble(product_band));
            (PRODUCT_S.iter().map(|s| format!("s={s}")).collect(), vec![])
        }
        InequalityId::Commutator => {
            for t in &config.commutator_tuples {
                t.validate()?;
            }
            details.insert("ensemble".into(), ensemble(&format!("divergence-free pairs, {shells}")));
            details.insert(
                "form".into(),
                "advective commutator [f, Delta_j].grad g of vector fields; gradient norms combine components in l2"
                    .into(),
            );
            details.insert("band_sum".into(), "l2 sums truncated to the bank's band range".into());
            let labels: Vec<String> = config.commutator_tuples.iter().map(|t| t.label()).collect();
            let swapped = labels.iter().map(|l| format!("{l};swapped d/p indices")).collect();
            (labels, swapped)
        }
        InequalityId::Interpolation => {
            details.insert("ensemble".into(), ensemble("|k| < n/2"));
            details.insert("exponents".into(), "s1, s2 uniform on [-2, 3], theta uniform on [0, 1]".into());
            (
                INTERP_P
                    .iter()
                    .flat_map(|p| INTERP_Q.iter().map(move |q| format!("p={},q={}", fmt_num(*p), fmt_num(*q))))
                    .collect(),
                vec![],
            )
        }
        InequalityId::NormEquivalence => {
            details.insert("ensemble".into(), ensemble("|k| < n/2"));
            (EQUIV_S.iter().map(|s| format!("s={s}")).collect(), vec![])
        }
        InequalityId::BiotSavart => {
            details.insert("ensemble".into(), ensemble("divergence-free fields, |k| < n/2"));
            (
                BIOT_P.iter().map(|p| format!("p={},sigma=0,r=inf", fmt_num(*p))).collect(),
                vec![],
            )
        }
        InequalityId::Bony => {
            details.insert("ensemble".into(), ensemble(product_band));
            (vec!["reconstruction".into()], vec![])
        }
        InequalityId::LogSobolev => {
            details.insert(
                "ensemble".into(),
                ensemble(&format!("divergence-free pairs, {product_band}, unit L2 norm")),
            );
            details.insert("s".into(), fmt_num(LOGSOB_S));
            (vec!["C=1".into()], vec![])
        }
        InequalityId::ParaproductTerms => {
            for t in &config.paraproduct_tuples {
                t.validate()?;
            }
            details.insert("ensemble".into(), ensemble(&format!("scalar pairs, {shells}")));
            details.insert("band_sum".into(), "l2 sums truncated to the bank's band range".into());
            let mut cases = Vec::new();
            let mut extras = Vec::new();
            for t in &config.paraproduct_tuples {
                for name in TERM_NAMES {
                    cases.push(format!("{};{name}", t.label()));
                }
                extras.push(format!("{};full commutator", t.label()));
            }
            (cases, extras)
        }
    };
    Ok(Plan {
        cases,
        extras,
        details,
    })
}

/// Per-grid precomputation, recorded in the report details.
pub(crate) fn prepare(id: InequalityId, ctx: &mut Context, details: &mut BTreeMap<String, String>) {
    if id == InequalityId::NormEquivalence {
        ctx.equivalence = EQUIV_S
            .iter()
            .map(|&s| {
                let (lo, hi) = sobolev_besov_equivalence(&ctx.bank, s);
                let (c1, c2) = (lo.sqrt(), hi.sqrt());
                details.insert(format!("bounds[n={},s={s}]", ctx.grid.n()), format!("[{c1:e}, {c2:e}]"));
                (c1, c2)
            })
            .collect();
    }
}

fn product_band(ctx: &Context) -> SpectralBand {
    SpectralBand::new(0.0, ctx.grid.n() as f64 / 4.0, ctx.config.slope)
}

fn full_band(ctx: &Context) -> SpectralBand {
    SpectralBand::new(0.0, ctx.grid.n() as f64 / 2.0, ctx.config.slope)
}

/// A dyadic shell [2^a, 2^{a+1}) ∩ {|k| < n/4} with a drawn uniformly, so
/// every grid samples the same relative frequency configurations.
fn random_shell(ctx: &Context, rng: &mut FieldRng) -> SpectralBand {
    let top = ctx.grid.n() as f64 / 4.0;
    let count = (0..).take_while(|&a| 2f64.powi(a) < top).count();
    let lo = 2f64.powi(pick(rng, count) as i32);
    SpectralBand::new(lo, (2.0 * lo).min(top), ctx.config.slope)
}

fn pick(rng: &mut FieldRng, len: usize) -> usize {
    Uniform::new(0, len).expect("nonempty range").sample(rng)
}

/// Every ∂^γ f with |γ| = k (k ≤ 2).
fn derivatives(f: &SpectralField, k: u32) -> Vec<SpectralField> {
    match k {
        0 => vec![f.clone()],
        1 => Axis::ALL.iter().map(|&a| f.derivative(a)).collect(),
        _ => {
            let mut out = Vec::new();
            for (i, &a) in Axis::ALL.iter().enumerate() {
                let d = f.derivative(a);
                for &b in &Axis::ALL[i..] {
                    out.push(d.derivative(b));
                }
            }
            out
        }
    }
}

fn sup_lp(fields: &[SpectralField], p: f64) -> Result<f64> {
    fields
        .iter()
        .map(|d| lp_norm_physical(d, p))
        .try_fold(0.0, |acc: f64, v| Ok(acc.max(v?)))
}

fn grad_components(v: &VectorField) -> Vec<SpectralField> {
    v.components()
        .iter()
        .flat_map(|c| Axis::ALL.map(|a| c.derivative(a)))
        .collect()
}

/// ‖·‖_{Ḃ⁰_{p,∞}} for every p in `BIOT_P`, components combined in ℓ².
fn besov0_all(comps: &[SpectralField], bank: &FilterBank) -> Result<Vec<f64>> {
    let mut acc = vec![0.0; BIOT_P.len()];
    for c in comps {
        for (a, norms) in acc.iter_mut().zip(bank.band_lp_norms_multi(c, &BIOT_P)?) {
            *a += besov_from_band_norms(&norms, bank.j_min(), 0.0, INF).powi(2);
        }
    }
    Ok(acc.into_iter().map(f64::sqrt).collect())
}

fn unit_l2(v: VectorField) -> VectorField {
    let n = v.l2_norm();
    if n > 0.0 {
        v.scale(1.0 / n)
    } else {
        v
    }
}

pub(crate) fn run(id: InequalityId, ctx: &Context, seed: u64) -> Result<Outcome> {
    let mut rng = rng_from_seed(seed);
    let grid = ctx.grid;
    let bank = &ctx.bank;
    let slope = ctx.config.slope;
    let mut out = Outcome::default();
    match id {
        InequalityId::BernsteinBall => {
            let lambdas: Vec<f64> = (0..)
                .map(|m| 2f64.powi(m))
                .take_while(|&l| l <= grid.n() as f64 / 4.0)
                .collect();
            let lambda = lambdas[pick(&mut rng, lambdas.len())];
            let f = random_scalar(grid, SpectralBand::new(0.0, lambda * (1.0 + 1e-9), slope), &mut rng);
            let derivs: Vec<Vec<SpectralField>> = (0..=2).map(|k| derivatives(&f, k)).collect();
            for &(k, p, q) in &BALL_CASES {
                let lhs = sup_lp(&derivs[k as usize], q)?;
                let scale = lambda.powf(k as f64 + 3.0 * (1.0 / p - 1.0 / q));
                out.ratios.push(super::bounds::ratio(lhs, scale * lp_norm_physical(&f, p)?));
            }
        }
        InequalityId::BernsteinAnnulus => {
            let bands: Vec<i32> = bank.bands().collect();
            let j = bands[pick(&mut rng, bands.len())];
            let f = bank.delta_j(&random_scalar(grid, full_band(ctx), &mut rng), j)?;
            let lambda = 2f64.powi(j);
            let derivs: Vec<Vec<SpectralField>> = (1..=2).map(|k| derivatives(&f, k)).collect();
            for &(k, p) in &ANNULUS_CASES {
                let lhs = lambda.powi(k as i32) * lp_norm_physical(&f, p)?;
                out.ratios.push(super::bounds::ratio(lhs, sup_lp(&derivs[k as usize - 1], p)?));
            }
        }
        InequalityId::Product => {
            let f = random_scalar(grid, product_band(ctx), &mut rng);
            let g = random_scalar(grid, product_band(ctx), &mut rng);
            let fg = scalar_product(&f, &g, ProductRule::Raw)?;
            let (fi, gi) = (lp_norm_physical(&f, INF)?, lp_norm_physical(&g, INF)?);
            for &s in &PRODUCT_S {
                let rhs = fi * sobolev_norm(&g, s, true) + gi * sobolev_norm(&f, s, true);
                out.ratios.push(super::bounds::ratio(sobolev_norm(&fg, s, true), rhs));
            }
        }
        InequalityId::Commutator => {
            let (bf, bg) = (random_shell(ctx, &mut rng), random_shell(ctx, &mut rng));
            let f = random_solenoidal(grid, bf, &mut rng);
            let g = random_solenoidal(grid, bg, &mut rng);
            let sides = commutator_sides(&f, &g, bank, &ctx.config.commutator_tuples, ProductRule::Raw)?;
            out.ratios = sides.iter().map(|s| s.ratio()).collect();
            out.extras = sides.iter().map(|s| s.ratio_swapped()).collect();
        }
        InequalityId::Interpolation => {
            let f = random_scalar(grid, full_band(ctx), &mut rng);
            let s_law = Uniform::new_inclusive(-2.0, 3.0).expect("finite range");
            let (s1, s2) = (s_law.sample(&mut rng), s_law.sample(&mut rng));
            let theta: f64 = Uniform::new_inclusive(0.0, 1.0).expect("finite range").sample(&mut rng);
            let s = theta * s1 + (1.0 - theta) * s2;
            for &p in &INTERP_P {
                let norms = bank.band_lp_norms(&f, p, 1)?;
                for &q in &INTERP_Q {
                    let b = |s| besov_from_band_norms(&norms, bank.j_min(), s, q);
                    let r = super::bounds::ratio(b(s), b(s1).powf(theta) * b(s2).powf(1.0 - theta));
                    out.residual = out.residual.max(r - 1.0);
                    out.violation |= r > 1.0 + IDENTITY_TOL;
                    out.ratios.push(r);
                }
            }
        }
        InequalityId::NormEquivalence => {
            let f = random_scalar(grid, full_band(ctx), &mut rng);
            let norms = band_l2_norms(std::slice::from_ref(&f), bank);
            for (&s, &(c1, c2)) in EQUIV_S.iter().zip(&ctx.equivalence) {
                let r = besov_from_band_norms(&norms, bank.j_min(), s, 2.0) / sobolev_norm(&f, s, true);
                let slack = 1e-12;
                out.violation |= r < c1 * (1.0 - slack) || r > c2 * (1.0 + slack);
                out.ratios.push(r);
            }
        }
        InequalityId::BiotSavart => {
            let u = random_solenoidal(grid, full_band(ctx), &mut rng);
            let grad = grad_components(&u);
            let omega = u.curl();
            let lhs = besov0_all(&grad, bank)?;
            let rhs = besov0_all(omega.components(), bank)?;
            out.ratios = lhs.iter().zip(&rhs).map(|(&l, &r)| super::bounds::ratio(l, r)).collect();
        }
        InequalityId::Bony => {
            let u = random_scalar(grid, product_band(ctx), &mut rng);
            let v = random_scalar(grid, product_band(ctx), &mut rng);
            let sum = bony_decompose(&u, &v, bank, ProductRule::Raw)?.sum();
            let uv = scalar_product(&u, &v, ProductRule::Raw)?;
            let scale = uv.l2_norm();
            out.residual = (&sum - &uv).l2_norm() / scale;
            out.ratios.push(sum.l2_norm() / scale);
        }
        InequalityId::LogSobolev => {
            let u = unit_l2(random_solenoidal(grid, product_band(ctx), &mut rng));
            let b = unit_l2(random_solenoidal(grid, product_band(ctx), &mut rng));
            let state = SolverState::new(u, b, 0.0, PhysParams::new(0.0, 0.0, 0.0, 0.0)?)?;
            out.ratios.push(log_sobolev_check(&state, bank, LOGSOB_S, 1.0)?.ratio);
        }
        InequalityId::ParaproductTerms => {
            let (bf, bg) = (random_shell(ctx, &mut rng), random_shell(ctx, &mut rng));
            let f = random_scalar(grid, bf, &mut rng);
            let g = random_scalar(grid, bg, &mut rng);
            for t in &ctx.config.paraproduct_tuples {
                let terms = paraproduct_terms(&f, &g, bank, t, ProductRule::Raw)?;
                out.ratios.extend(terms.ratios());
                out.extras.push(super::bounds::ratio(terms.direct, terms.bounds[0] + terms.bounds[1]));
                out.residual = out.residual.max(terms.identity_residual);
            }
        }
    }
    Ok(out)
}
