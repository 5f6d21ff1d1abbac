use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::rhs::rhs_terms;
use super::state::{PhysParams, SolverState};
use crate::error::{Error, Result};
use crate::spectral::{Grid3, VectorField};

/// Time discretisation.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// Lawson RK4: the linear part is integrated exactly by an integrating factor.
    #[default]
    Rk4IntegratingFactor,
    /// Crank-Nicolson on the linear part, second-order Adams-Bashforth on the rest.
    ImexCnab2,
}

impl Scheme {
    pub fn name(self) -> &'static str {
        match self {
            Scheme::Rk4IntegratingFactor => "rk4_integrating_factor",
            Scheme::ImexCnab2 => "imex_cnab2",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rk4_integrating_factor" | "rk4" => Ok(Scheme::Rk4IntegratingFactor),
            "imex_cnab2" | "imex" => Ok(Scheme::ImexCnab2),
            other => Err(Error::param(format!(
                "unknown scheme '{other}' (expected rk4_integrating_factor or imex_cnab2)"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepOptions {
    /// Bound on dt·max|u|·n/(2π).
    pub cfl_limit: f64,
    /// c_w in dt ≤ c_w / (h·k_max²·max|b|).
    pub whistler_coeff: f64,
    /// When false only the linear dissipative part is advanced.
    pub nonlinear: bool,
    /// Halt when the modified energy exceeds this multiple of its initial value.
    pub blowup_factor: f64,
}

impl Default for StepOptions {
    fn default() -> Self {
        Self {
            cfl_limit: 0.5,
            whistler_coeff: 0.25,
            nonlinear: true,
            blowup_factor: 1e12,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StepWarning {
    Cfl { t: f64, courant: f64, limit: f64 },
    Whistler { t: f64, dt: f64, limit: f64 },
}

/// Quantities measured at the start of a step.
#[derive(Clone, Debug, PartialEq)]
pub struct StepDiagnostics {
    pub t: f64,
    pub dt: f64,
    /// ‖u‖₂² + ‖b‖₂² + α‖∇b‖₂²
    pub energy: f64,
    /// 2(ν‖∇u‖₂² + η‖∇b‖₂²)
    pub dissipation: f64,
    /// d/dt of `dissipation` along the trajectory.
    pub dissipation_rate: f64,
    /// ⟨∇×(J×b), b⟩
    pub hall_inner: f64,
    /// ‖J‖₂‖b‖₂ max|b|
    pub hall_scale: f64,
    pub max_u: f64,
    pub max_b: f64,
    pub warnings: Vec<StepWarning>,
}

/// Velocity and magnetic components advanced together.
#[derive(Clone, Debug, PartialEq)]
pub(crate) struct Pair {
    pub u: VectorField,
    pub b: VectorField,
}

impl Pair {
    pub fn zeros(grid: Grid3) -> Self {
        Self {
            u: VectorField::zeros(grid),
            b: VectorField::zeros(grid),
        }
    }

    pub fn axpy(&mut self, a: f64, other: &Pair) {
        self.u.axpy(a, &other.u);
        self.b.axpy(a, &other.b);
    }

    pub fn combine(&self, a: f64, other: &Pair) -> Pair {
        let mut out = self.clone();
        out.axpy(a, other);
        out
    }

    /// (a + b) / 2
    pub fn midpoint(a: &Pair, b: &Pair) -> Pair {
        Pair {
            u: a.u.add(&b.u).scale(0.5),
            b: a.b.add(&b.b).scale(0.5),
        }
    }

    pub fn apply(&self, m: &Multipliers) -> Pair {
        Pair {
            u: self.u.map(|c| c.apply_multiplier(&m.u)),
            b: self.b.map(|c| c.apply_multiplier(&m.b)),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.u.is_finite() && self.b.is_finite()
    }

    /// ‖δu‖² + ‖δb‖² + α‖∇δb‖².
    pub fn energy(&self, alpha: f64) -> f64 {
        self.u.inner(&self.u) + super::state::magnetic_energy(&self.b, alpha)
    }
}

/// Per-mode real multipliers for the velocity and magnetic parts.
#[derive(Clone, Debug)]
pub(crate) struct Multipliers {
    pub u: Vec<f64>,
    pub b: Vec<f64>,
}

impl Multipliers {
    fn build(grid: Grid3, params: &PhysParams, f: impl Fn(f64) -> f64) -> Self {
        let t = grid.tables();
        Self {
            u: t.k2.iter().map(|&k2| f(params.velocity_rate(k2))).collect(),
            b: t.k2.iter().map(|&k2| f(params.magnetic_rate(k2))).collect(),
        }
    }
}

/// Linear propagators for one step size.
#[derive(Clone, Debug)]
pub(crate) struct Propagators {
    dt: f64,
    /// e^{L dt/2}, e^{L dt}
    half: Multipliers,
    full: Multipliers,
    /// (1 − dt L/2)^{-1}(1 + dt L/2) and (1 − dt L/2)^{-1}
    cn_explicit: Multipliers,
    cn_implicit: Multipliers,
}

impl Propagators {
    pub fn new(grid: Grid3, params: &PhysParams, dt: f64) -> Self {
        Self {
            dt,
            half: Multipliers::build(grid, params, |l| (l * dt / 2.0).exp()),
            full: Multipliers::build(grid, params, |l| (l * dt).exp()),
            cn_explicit: Multipliers::build(grid, params, |l| (1.0 + dt * l / 2.0) / (1.0 - dt * l / 2.0)),
            cn_implicit: Multipliers::build(grid, params, |l| 1.0 / (1.0 - dt * l / 2.0)),
        }
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Lawson RK4 with stage tendencies supplied by `n(stage, w)`; stage 0 is
    /// at t, stages 1 and 2 at t + dt/2, stage 3 at t + dt.
    pub fn rk4(&self, w: &Pair, mut n: impl FnMut(usize, &Pair) -> Result<Pair>) -> Result<Pair> {
        let h = self.dt;
        let k1 = n(0, w)?;
        let ew = w.apply(&self.half);
        let k2 = n(1, &w.combine(h / 2.0, &k1).apply(&self.half))?;
        let k3 = n(2, &ew.combine(h / 2.0, &k2))?;
        let k4 = n(3, &w.apply(&self.full).combine(h, &k3.apply(&self.half)))?;
        let mut out = w.apply(&self.full);
        out.axpy(h / 6.0, &k1.apply(&self.full));
        let mid = k2.combine(1.0, &k3).apply(&self.half);
        out.axpy(h / 3.0, &mid);
        out.axpy(h / 6.0, &k4);
        Ok(out)
    }

    /// Crank-Nicolson step with an explicit forcing already extrapolated.
    pub fn crank_nicolson(&self, w: &Pair, forcing: &Pair) -> Pair {
        let mut out = w.apply(&self.cn_explicit);
        out.axpy(self.dt, &forcing.apply(&self.cn_implicit));
        out
    }
}

pub(crate) struct NonlinearEval {
    pub tendency: Pair,
    pub hall_inner: f64,
    pub hall_scale: f64,
    pub max_u: f64,
    pub max_b: f64,
}

pub(crate) fn nonlinear(w: &Pair, params: &PhysParams) -> Result<NonlinearEval> {
    let terms = rhs_terms(&w.u, &w.b, params)?;
    let tendency = Pair {
        u: terms.velocity(),
        b: terms.magnetic(params.alpha),
    };
    Ok(NonlinearEval {
        tendency,
        hall_inner: terms.hall_inner,
        hall_scale: terms.hall_scale,
        max_u: terms.max_u,
        max_b: terms.max_b,
    })
}

fn max_magnitude(v: &VectorField) -> f64 {
    v.max_magnitude()
}

/// Advances one state in time, keeping the multistep history.
#[derive(Clone, Debug)]
pub struct Integrator {
    state: SolverState,
    scheme: Scheme,
    options: StepOptions,
    initial_energy: f64,
    props: Option<Propagators>,
    previous: Option<(f64, Pair)>,
}

impl Integrator {
    pub fn new(state: SolverState, scheme: Scheme, options: StepOptions) -> Result<Self> {
        if !(options.cfl_limit > 0.0) || !(options.whistler_coeff > 0.0) || !(options.blowup_factor > 1.0) {
            return Err(Error::param("step options must be positive (blow-up factor > 1)"));
        }
        if !state.is_finite() {
            return Err(Error::BlowUp {
                t: state.t,
                reason: "initial state is not finite".into(),
            });
        }
        let initial_energy = state.modified_energy();
        Ok(Self {
            state,
            scheme,
            options,
            initial_energy,
            props: None,
            previous: None,
        })
    }

    pub fn state(&self) -> &SolverState {
        &self.state
    }

    pub fn into_state(self) -> SolverState {
        self.state
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn options(&self) -> &StepOptions {
        &self.options
    }

    fn propagators(&mut self, dt: f64) -> &Propagators {
        let stale = self.props.as_ref().is_none_or(|p| p.dt() != dt);
        if stale {
            self.props = Some(Propagators::new(self.state.grid(), &self.state.params, dt));
        }
        self.props.as_ref().expect("just built")
    }

    fn check_limits(&self, dt: f64, max_u: f64, max_b: f64, warnings: &mut Vec<StepWarning>) {
        let grid = self.state.grid();
        let courant = dt * max_u * grid.n() as f64 / grid.domain_length();
        if courant > self.options.cfl_limit {
            warnings.push(StepWarning::Cfl {
                t: self.state.t,
                courant,
                limit: self.options.cfl_limit,
            });
        }
        let h = self.state.params.hall;
        if h > 0.0 && max_b > 0.0 {
            let k = grid.k_max() as f64;
            let limit = self.options.whistler_coeff / (h * k * k * max_b);
            if dt > limit {
                warnings.push(StepWarning::Whistler {
                    t: self.state.t,
                    dt,
                    limit,
                });
            }
        }
    }

    /// Nonlinear tendency, energy, dissipation and its time derivative at
    /// the current state.
    fn evaluate(&self, w: &Pair) -> Result<(NonlinearEval, f64, f64, f64)> {
        let params = self.state.params;
        let grid = self.state.grid();
        let first = if self.options.nonlinear {
            nonlinear(w, &params).map_err(|e| with_time(e, self.state.t))?
        } else {
            NonlinearEval {
                tendency: Pair::zeros(grid),
                hall_inner: 0.0,
                hall_scale: 0.0,
                max_u: max_magnitude(&w.u),
                max_b: max_magnitude(&w.b),
            }
        };
        let energy = self.state.modified_energy();
        let dissipation = self.state.dissipation();
        let mut full = w.apply(&Multipliers::build(grid, &params, |l| l));
        full.axpy(1.0, &first.tendency);
        let rate = 4.0 * (params.nu * grad_inner(&w.u, &full.u) + params.eta * grad_inner(&w.b, &full.b));
        Ok((first, energy, dissipation, rate))
    }

    /// Diagnostics of the current state without stepping (`dt` is zero).
    pub fn measure(&self) -> Result<StepDiagnostics> {
        let w = Pair {
            u: self.state.u.clone(),
            b: self.state.b.clone(),
        };
        let (first, energy, dissipation, dissipation_rate) = self.evaluate(&w)?;
        Ok(StepDiagnostics {
            t: self.state.t,
            dt: 0.0,
            energy,
            dissipation,
            dissipation_rate,
            hall_inner: first.hall_inner,
            hall_scale: first.hall_scale,
            max_u: first.max_u,
            max_b: first.max_b,
            warnings: Vec::new(),
        })
    }

    /// One step of size `dt`. On error the state is left untouched.
    pub fn step(&mut self, dt: f64) -> Result<StepDiagnostics> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::param(format!("time step must be positive, got {dt}")));
        }
        let params = self.state.params;
        let nonlinear_on = self.options.nonlinear;
        let grid = self.state.grid();
        let w = Pair {
            u: self.state.u.clone(),
            b: self.state.b.clone(),
        };
        let t0 = self.state.t;
        let (first, energy, dissipation, dissipation_rate) = self.evaluate(&w)?;
        let mut warnings = Vec::new();
        self.check_limits(dt, first.max_u, first.max_b, &mut warnings);

        let scheme = self.scheme;
        let next = match scheme {
            Scheme::Rk4IntegratingFactor => {
                let k1 = first.tendency.clone();
                let props = self.propagators(dt).clone();
                props.rk4(&w, |stage, x| {
                    if stage == 0 {
                        return Ok(k1.clone());
                    }
                    if !nonlinear_on {
                        return Ok(Pair::zeros(grid));
                    }
                    Ok(nonlinear(x, &params).map_err(|e| with_time(e, t0))?.tendency)
                })?
            }
            Scheme::ImexCnab2 => {
                let forcing = match &self.previous {
                    Some((prev_dt, prev)) if *prev_dt == dt => {
                        let mut f = first.tendency.combine(0.5, &first.tendency);
                        f.axpy(-0.5, prev);
                        f
                    }
                    _ => first.tendency.clone(),
                };
                let props = self.propagators(dt).clone();
                props.crank_nicolson(&w, &forcing)
            }
        };

        let u = next.u.project_leray();
        let b = next.b.project_leray();
        let candidate = SolverState {
            u,
            b,
            t: t0 + dt,
            params,
        };
        if !candidate.is_finite() {
            return Err(Error::BlowUp {
                t: candidate.t,
                reason: "non-finite field values".into(),
            });
        }
        let e1 = candidate.modified_energy();
        if e1 > self.options.blowup_factor * self.initial_energy.max(f64::MIN_POSITIVE) {
            return Err(Error::BlowUp {
                t: candidate.t,
                reason: format!(
                    "modified energy {e1:.3e} exceeds {:.0e} times its initial value",
                    self.options.blowup_factor
                ),
            });
        }
        if scheme == Scheme::ImexCnab2 {
            self.previous = Some((dt, first.tendency));
        }
        self.state = candidate;
        Ok(StepDiagnostics {
            t: t0,
            dt,
            energy,
            dissipation,
            dissipation_rate,
            hall_inner: first.hall_inner,
            hall_scale: first.hall_scale,
            max_u: first.max_u,
            max_b: first.max_b,
            warnings,
        })
    }
}

fn grad_inner(a: &VectorField, b: &VectorField) -> f64 {
    let t = a.grid().tables();
    let mut acc = 0.0;
    for (ca, cb) in a.components().iter().zip(b.components()) {
        for ((x, y), &k2) in ca.coeffs().iter().zip(cb.coeffs()).zip(&t.k2) {
            acc += k2 * (x.re * y.re + x.im * y.im);
        }
    }
    acc * a.grid().volume()
}

fn with_time(e: Error, t: f64) -> Error {
    match e {
        Error::BlowUp { reason, .. } => Error::BlowUp { t, reason },
        other => other,
    }
}

/// One step from `state` with default options; the IMEX scheme starts with
/// a Crank-Nicolson / forward-Euler step.
pub fn step(state: &SolverState, dt: f64, scheme: Scheme) -> Result<SolverState> {
    step_with(state, dt, scheme, StepOptions::default()).map(|(s, _)| s)
}

pub fn step_with(
    state: &SolverState,
    dt: f64,
    scheme: Scheme,
    options: StepOptions,
) -> Result<(SolverState, StepDiagnostics)> {
    let mut it = Integrator::new(state.clone(), scheme, options)?;
    let diag = it.step(dt)?;
    Ok((it.into_state(), diag))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::SpectralField;
    use num_complex::Complex64;

    fn single_mode(grid: Grid3) -> (VectorField, VectorField) {
        let mut a = SpectralField::zeros(grid);
        a.set_mode([0, 2, 1], Complex64::new(0.3, -0.1));
        let z = SpectralField::zeros(grid);
        // polarisation (1, 0, 0) is orthogonal to k = (0, 2, 1)
        let u = VectorField::new(a.clone(), z.clone(), z.clone()).unwrap();
        let b = VectorField::new(a.scale(0.7), z.clone(), z).unwrap();
        (u, b)
    }

    #[test]
    fn linear_step_is_exact() {
        let g = Grid3::new(8).unwrap();
        let (u, b) = single_mode(g);
        let p = PhysParams::new(0.2, 0.3, 0.5, 1.0).unwrap();
        let s = SolverState::new(u.clone(), b.clone(), 0.0, p).unwrap();
        let opts = StepOptions {
            nonlinear: false,
            ..StepOptions::default()
        };
        let dt = 0.01;
        let (next, _) = step_with(&s, dt, Scheme::Rk4IntegratingFactor, opts).unwrap();
        let k2 = 5.0;
        let eu = (-0.2 * k2 * dt).exp();
        let eb = (-0.3 * k2 * dt / (1.0 + 0.5 * k2)).exp();
        assert!(next.u.sub(&u.scale(eu)).max_abs_coeff() < 1e-8 * u.max_abs_coeff());
        assert!(next.b.sub(&b.scale(eb)).max_abs_coeff() < 1e-8 * b.max_abs_coeff());
        assert!((next.t - dt).abs() < 1e-15);
    }

    #[test]
    fn zero_state_stays_zero() {
        let g = Grid3::new(8).unwrap();
        let s = SolverState::zeros(g, PhysParams::new(0.1, 0.1, 0.1, 0.1).unwrap());
        for scheme in [Scheme::Rk4IntegratingFactor, Scheme::ImexCnab2] {
            let next = step(&s, 0.01, scheme).unwrap();
            assert_eq!(next.u.max_abs_coeff(), 0.0);
            assert_eq!(next.b.max_abs_coeff(), 0.0);
        }
    }

    #[test]
    fn rejects_bad_step() {
        let g = Grid3::new(8).unwrap();
        let s = SolverState::zeros(g, PhysParams::default());
        assert!(step(&s, 0.0, Scheme::Rk4IntegratingFactor).is_err());
        assert!(step(&s, f64::NAN, Scheme::ImexCnab2).is_err());
    }

    #[test]
    fn cfl_violation_is_reported() {
        let g = Grid3::new(8).unwrap();
        let u = VectorField::from_fn(g, |_, y, _| [y.sin(), 0.0, 0.0]);
        let s = SolverState::new(u, VectorField::zeros(g), 0.0, PhysParams::default()).unwrap();
        let (_, d) = step_with(&s, 0.5, Scheme::Rk4IntegratingFactor, StepOptions::default()).unwrap();
        assert!(d.warnings.iter().any(|w| matches!(w, StepWarning::Cfl { .. })));
        let (_, d) = step_with(&s, 0.01, Scheme::Rk4IntegratingFactor, StepOptions::default()).unwrap();
        assert!(d.warnings.is_empty());
    }

    #[test]
    fn scheme_names_round_trip() {
        for s in [Scheme::Rk4IntegratingFactor, Scheme::ImexCnab2] {
            assert_eq!(s.name().parse::<Scheme>().unwrap(), s);
        }
        assert!("euler".parse::<Scheme>().is_err());
    }

    #[test]
    fn imex_is_second_order() {
        let g = Grid3::new(8).unwrap();
        let u = VectorField::from_fn(g, |x, y, z| [y.sin() + z.cos(), (x + z).cos(), x.sin()]).project_leray();
        let b = VectorField::from_fn(g, |x, y, z| [z.cos(), (x - z).sin(), y.cos()]).project_leray();
        let p = PhysParams::new(0.05, 0.05, 0.1, 0.2).unwrap();
        let s = SolverState::new(u, b, 0.0, p).unwrap();
        let run = |scheme, dt: f64, n: usize| {
            let mut it = Integrator::new(s.clone(), scheme, StepOptions::default()).unwrap();
            for _ in 0..n {
                it.step(dt).unwrap();
            }
            it.into_state()
        };
        let reference = run(Scheme::Rk4IntegratingFactor, 0.0025, 80);
        let e1 = run(Scheme::ImexCnab2, 0.02, 10).u.sub(&reference.u).l2_norm();
        let e2 = run(Scheme::ImexCnab2, 0.01, 20).u.sub(&reference.u).l2_norm();
        let order = (e1 / e2).log2();
        assert!(order > 1.7 && order < 2.5, "observed order {order}");
    }
}
