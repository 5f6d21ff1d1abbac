use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::integrator::{Integrator, Scheme, StepDiagnostics, StepOptions, StepWarning};
use super::state::SolverState;
use crate::error::{Error, Result};
use crate::monitor::{Monitor, MonitorConfig, MonitorRecord};
use crate::spectral::checkpoint::{read_checkpoint, write_checkpoint};
use crate::spectral::VectorField;

/// Everything about a run that is not physics or monitoring.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RunOptions {
    pub scheme: Scheme,
    pub step: StepOptions,
    /// Write a checkpoint every this many steps (and at the end).
    pub checkpoint_interval: Option<usize>,
    pub checkpoint_dir: Option<PathBuf>,
}

/// Energy bookkeeping at the start of every step and at the final time.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergySample {
    pub t: f64,
    pub energy: f64,
    pub dissipation: f64,
    pub dissipation_rate: f64,
    pub hall_inner: f64,
    pub hall_scale: f64,
}

impl From<&StepDiagnostics> for EnergySample {
    fn from(d: &StepDiagnostics) -> Self {
        Self {
            t: d.t,
            energy: d.energy,
            dissipation: d.dissipation,
            dissipation_rate: d.dissipation_rate,
            hall_inner: d.hall_inner,
            hall_scale: d.hall_scale,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HaltInfo {
    pub step: usize,
    pub t: f64,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckpointEntry {
    pub step: usize,
    pub t: f64,
    pub file: String,
}

#[derive(Clone, Debug)]
pub struct RunOutput {
    /// Last valid state (the state before the failing step after a halt).
    pub final_state: SolverState,
    pub records: Vec<MonitorRecord>,
    pub energy: Vec<EnergySample>,
    pub warnings: Vec<StepWarning>,
    pub halted: Option<HaltInfo>,
    pub checkpoints: Vec<CheckpointEntry>,
    pub steps: usize,
}

pub const CHECKPOINT_INDEX: &str = "checkpoints.jsonl";

pub fn checkpoint_name(step: usize) -> String {
    format!("checkpoint_{step:06}.tfmhd")
}

fn save_checkpoint(dir: &Path, step: usize, state: &SolverState, index: &mut Vec<CheckpointEntry>) -> Result<()> {
    let file = checkpoint_name(step);
    let mut fields = Vec::with_capacity(6);
    fields.extend(state.u.components());
    fields.extend(state.b.components());
    write_checkpoint(dir.join(&file), &fields)?;
    index.push(CheckpointEntry { step, t: state.t, file });
    let mut text = String::new();
    for e in index.iter() {
        text.push_str(&serde_json::to_string(e).expect("plain struct"));
        text.push('\n');
    }
    let path = dir.join(CHECKPOINT_INDEX);
    fs::write(&path, text).map_err(|e| Error::io(&path, e))
}

/// Reads a checkpoint index and the (u, b) pairs it lists.
pub fn load_checkpoints(dir: &Path) -> Result<Vec<(CheckpointEntry, VectorField, VectorField)>> {
    let path = dir.join(CHECKPOINT_INDEX);
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let entry: CheckpointEntry =
            serde_json::from_str(line).map_err(|e| Error::Format(format!("{}: line {}: {e}", path.display(), i + 1)))?;
        let fields = read_checkpoint(dir.join(&entry.file))?;
        let [ux, uy, uz, bx, by, bz]: [_; 6] = fields
            .try_into()
            .map_err(|_| Error::Format(format!("{} must hold six fields", entry.file)))?;
        out.push((entry, VectorField::new(ux, uy, uz)?, VectorField::new(bx, by, bz)?));
    }
    Ok(out)
}

/// Number of steps and the size of the last one.
fn schedule(t_end: f64, dt: f64) -> (usize, f64) {
    let ratio = t_end / dt;
    let nearest = ratio.round();
    if (ratio - nearest).abs() <= 1e-9 * ratio.max(1.0) {
        return (nearest as usize, dt);
    }
    let n = ratio.ceil() as usize;
    (n, t_end - (n - 1) as f64 * dt)
}

/// Runs with the default scheme and no checkpoints.
pub fn run(initial: SolverState, t_end: f64, dt: f64, monitor: &MonitorConfig) -> Result<RunOutput> {
    run_with(initial, t_end, dt, monitor, &RunOptions::default())
}

/// Steps from `initial.t` to `initial.t + t_end`. Monitor samples are taken at
/// step 0, every `cadence` steps and at the last step. A numerical blow-up
/// ends the run early with `halted` set and the last valid state kept.
pub fn run_with(
    initial: SolverState,
    t_end: f64,
    dt: f64,
    monitor: &MonitorConfig,
    options: &RunOptions,
) -> Result<RunOutput> {
    if !(t_end >= 0.0) || !t_end.is_finite() {
        return Err(Error::param(format!("t_end must be finite and >= 0, got {t_end}")));
    }
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::param(format!("time step must be positive, got {dt}")));
    }
    if options.checkpoint_interval == Some(0) {
        return Err(Error::param("checkpoint interval must be at least 1"));
    }
    let mut mon = Monitor::new(monitor.clone(), initial.grid())?;
    let dir = options.checkpoint_dir.as_deref().filter(|_| options.checkpoint_interval.is_some());
    if let Some(d) = dir {
        fs::create_dir_all(d).map_err(|e| Error::io(d, e))?;
    }
    let mut out = RunOutput {
        final_state: initial.clone(),
        records: Vec::new(),
        energy: Vec::new(),
        warnings: Vec::new(),
        halted: None,
        checkpoints: Vec::new(),
        steps: 0,
    };
    if t_end == 0.0 {
        return Ok(out);
    }
    let (n_steps, last_dt) = schedule(t_end, dt);
    let interval = options.checkpoint_interval.unwrap_or(usize::MAX);
    let cadence = monitor.cadence;
    let mut it = Integrator::new(initial, options.scheme, options.step)?;

    for step in 0..=n_steps {
        let is_last = step == n_steps;
        if step % cadence == 0 || is_last {
            mon.observe(it.state())?;
        }
        if let Some(d) = dir {
            if step % interval == 0 || is_last {
                save_checkpoint(d, step, it.state(), &mut out.checkpoints)?;
            }
        }
        if is_last {
            out.energy.push(EnergySample::from(&it.measure()?));
            break;
        }
        let h = if step + 1 == n_steps { last_dt } else { dt };
        match it.step(h) {
            Ok(diag) => {
                out.energy.push(EnergySample::from(&diag));
                out.warnings.extend(diag.warnings);
                out.steps += 1;
            }
            Err(Error::BlowUp { t, reason }) => {
                if let Some(d) = dir {
                    if out.checkpoints.last().map(|c| c.step) != Some(step) {
                        save_checkpoint(d, step, it.state(), &mut out.checkpoints)?;
                    }
                }
                out.halted = Some(HaltInfo { step, t, reason });
                break;
            }
            Err(e) => return Err(e),
        }
    }
    out.final_state = it.into_state();
    out.records = mon.into_records();
    Ok(out)
}

/// Discrete residual of d/dt E + D = 0 along the samples.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyBalance {
    /// Σ |E₁ − E₀ + ∫D| over steps, ∫D by the corrected trapezoid rule.
    pub residual: f64,
    /// `residual / (E(0) · T)`
    pub relative_per_time: f64,
    /// |E(T) − E(0)| / E(0)
    pub drift: f64,
}

/// Uses ∫D ≈ h/2 (D₀ + D₁) + h²/12 (D₀' − D₁'), fourth order in h.
pub fn energy_balance(samples: &[EnergySample]) -> EnergyBalance {
    let mut residual = 0.0;
    for w in samples.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        let h = b.t - a.t;
        let integral = 0.5 * h * (a.dissipation + b.dissipation) + h * h / 12.0 * (a.dissipation_rate - b.dissipation_rate);
        residual += (b.energy - a.energy + integral).abs();
    }
    let (Some(first), Some(last)) = (samples.first(), samples.last()) else {
        return EnergyBalance {
            residual: 0.0,
            relative_per_time: 0.0,
            drift: 0.0,
        };
    };
    let span = last.t - first.t;
    let e0 = first.energy;
    EnergyBalance {
        residual,
        relative_per_time: if span > 0.0 && e0 > 0.0 { residual / (e0 * span) } else { 0.0 },
        drift: if e0 > 0.0 { (last.energy - e0).abs() / e0 } else { 0.0 },
    }
}

/// max |⟨∇×(J×b), b⟩| / (‖J‖₂‖b‖₂ max|b|) over the samples.
pub fn hall_neutrality(samples: &[EnergySample]) -> f64 {
    samples
        .iter()
        .filter(|s| s.hall_scale > 0.0)
        .map(|s| s.hall_inner.abs() / s.hall_scale)
        .fold(0.0, f64::max)
}
