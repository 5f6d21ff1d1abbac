use serde::{Deserialize, Serialize};

use super::energy::modified_hs_sq;
use super::integrator::{nonlinear, Pair, Propagators, Scheme};
use super::state::{PhysParams, SolverState};
use crate::error::{Error, Result};
use crate::littlewood_paley::FilterBank;
use crate::spectral::VectorField;

/// One successive approximation (u⁽ⁿ⁾, b⁽ⁿ⁾) on [0, T].
#[derive(Clone, Debug)]
pub struct PicardIterate {
    pub index: usize,
    /// sup_t ‖(δu, δb, α^{1/2}∇δb)(t)‖₂² against the previous iterate.
    pub delta_e: f64,
    /// sup_t ‖(u, b, α^{1/2}∇b)(t)‖²_{H^s}
    pub sup_energy_s: f64,
    pub final_u: VectorField,
    pub final_b: VectorField,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PicardOptions {
    pub scheme: Scheme,
    /// Sobolev index of `sup_energy_s`.
    pub s: f64,
}

impl Default for PicardOptions {
    fn default() -> Self {
        Self {
            scheme: Scheme::Rk4IntegratingFactor,
            s: 3.0,
        }
    }
}

fn low_pass(v: &VectorField, bank: &FilterBank, j: i32) -> Result<VectorField> {
    let [x, y, z] = v.components();
    VectorField::new(bank.low_pass(x, j)?, bank.low_pass(y, j)?, bank.low_pass(z, j)?)
}

/// max_j ‖S_j(u, b, α^{1/2}∇b)‖_{H^s} / ‖(u, b, α^{1/2}∇b)‖_{H^s} over the bank.
pub fn low_pass_constant(u: &VectorField, b: &VectorField, alpha: f64, s: f64, bank: &FilterBank) -> Result<f64> {
    let full = modified_hs_sq(u, b, alpha, s, false);
    if full == 0.0 {
        return Ok(0.0);
    }
    let mut worst: f64 = 0.0;
    for j in bank.j_min()..=bank.j_max() + 1 {
        let part = modified_hs_sq(&low_pass(u, bank, j)?, &low_pass(b, bank, j)?, alpha, s, false);
        worst = worst.max((part / full).sqrt());
    }
    Ok(worst)
}

/// Effective step: T split into ⌈T/dt⌉ equal steps.
pub fn picard_mesh(t_final: f64, dt: f64) -> (usize, f64) {
    let m = (t_final / dt - 1e-9).ceil().max(1.0) as usize;
    (m, t_final / m as f64)
}

/// Iterates 1..=n_iters of the linear scheme
///
/// ∂ₜu⁽ⁿ⁺¹⁾ − νΔu⁽ⁿ⁺¹⁾ = P(−ω⁽ⁿ⁾×u⁽ⁿ⁾ + J⁽ⁿ⁾×b⁽ⁿ⁾),
/// (1 − αΔ)∂ₜb⁽ⁿ⁺¹⁾ − ηΔb⁽ⁿ⁺¹⁾ = ∇×(u⁽ⁿ⁾×b⁽ⁿ⁾) − h∇×(J⁽ⁿ⁾×b⁽ⁿ⁾),
///
/// started from (u⁽⁰⁾, b⁽⁰⁾) = 0 with data S_{n+2}(u₀, b₀). The forcing of
/// iterate n is stored on the time mesh and interpolated linearly inside a
/// step.
pub fn picard_solve(
    u0: &VectorField,
    b0: &VectorField,
    params: PhysParams,
    t_final: f64,
    n_iters: usize,
    dt: f64,
) -> Result<Vec<PicardIterate>> {
    picard_solve_with(u0, b0, params, t_final, n_iters, dt, PicardOptions::default())
}

pub fn picard_solve_with(
    u0: &VectorField,
    b0: &VectorField,
    params: PhysParams,
    t_final: f64,
    n_iters: usize,
    dt: f64,
    options: PicardOptions,
) -> Result<Vec<PicardIterate>> {
    if n_iters < 1 {
        return Err(Error::param("Picard iteration needs n_iters >= 1"));
    }
    if !(t_final > 0.0) || !t_final.is_finite() {
        return Err(Error::param(format!("Picard horizon must satisfy T > 0, got {t_final}")));
    }
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::param(format!("time step must be positive, got {dt}")));
    }
    // validates grids, parameters and solenoidality
    let data = SolverState::new(u0.clone(), b0.clone(), 0.0, params)?;
    let grid = data.grid();
    let bank = FilterBank::build(grid);
    let (m, h) = picard_mesh(t_final, dt);
    let props = Propagators::new(grid, &params, h);
    let alpha = params.alpha;

    // iterate 0 vanishes, and so does its forcing
    let mut prev_states: Vec<Pair> = vec![Pair::zeros(grid); m + 1];
    let mut forcing: Vec<Pair> = vec![Pair::zeros(grid); m + 1];
    let mut out = Vec::with_capacity(n_iters);

    for n in 0..n_iters {
        let j = i32::try_from(n + 2).unwrap_or(i32::MAX);
        let mut w = Pair {
            u: low_pass(&data.u, &bank, j)?,
            b: low_pass(&data.b, &bank, j)?,
        };
        let mut states = Vec::with_capacity(m + 1);
        let mut next_forcing = Vec::with_capacity(m + 1);
        let mut delta_e: f64 = 0.0;
        let mut sup_e: f64 = 0.0;
        for step in 0..=m {
            delta_e = delta_e.max(w.combine(-1.0, &prev_states[step]).energy(alpha));
            sup_e = sup_e.max(modified_hs_sq(&w.u, &w.b, alpha, options.s, false));
            let eval = nonlinear(&w, &params).map_err(|e| match e {
                Error::BlowUp { reason, .. } => Error::BlowUp {
                    t: step as f64 * h,
                    reason,
                },
                other => other,
            })?;
            next_forcing.push(eval.tendency);
            if step == m {
                states.push(w);
                break;
            }
            let (f0, f1) = (&forcing[step], &forcing[step + 1]);
            let next = match options.scheme {
                Scheme::Rk4IntegratingFactor => {
                    let mid = Pair::midpoint(f0, f1);
                    props.rk4(&w, |stage, _| {
                        Ok(match stage {
                            0 => f0.clone(),
                            3 => f1.clone(),
                            _ => mid.clone(),
                        })
                    })?
                }
                Scheme::ImexCnab2 => {
                    let avg = Pair::midpoint(f0, f1);
                    props.crank_nicolson(&w, &avg)
                }
            };
            let next = Pair {
                u: next.u.project_leray(),
                b: next.b.project_leray(),
            };
            if !next.is_finite() {
                return Err(Error::BlowUp {
                    t: (step + 1) as f64 * h,
                    reason: format!("Picard iterate {} is not finite", n + 1),
                });
            }
            states.push(std::mem::replace(&mut w, next));
        }
        let last = states.last().expect("m + 1 states");
        out.push(PicardIterate {
            index: n + 1,
            delta_e,
            sup_energy_s: sup_e,
            final_u: last.u.clone(),
            final_b: last.b.clone(),
        });
        prev_states = states;
        forcing = next_forcing;
    }
    Ok(out)
}

/// Successive ratios δE⁽ⁿ⁺¹⁾/δE⁽ⁿ⁾.
pub fn contraction_ratios(iterates: &[PicardIterate]) -> Vec<f64> {
    iterates
        .windows(2)
        .map(|w| if w[0].delta_e > 0.0 { w[1].delta_e / w[0].delta_e } else { 0.0 })
        .collect()
}
