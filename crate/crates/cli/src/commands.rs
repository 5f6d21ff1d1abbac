use std::fs;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use serde_json::json;

use tfmhd_core::lab::{calibration_report, verify as verify_one, InequalityId, VerifyConfig};
use tfmhd_core::littlewood_paley::FilterBank;
use tfmhd_core::monitor::{export, minimal_constants, CriterionSpec, ExportFormat, Monitor, MonitorConfig};
use tfmhd_core::solver::{
    contraction_ratios, energy_balance, hall_neutrality, initial_data, load_checkpoints, picard_mesh,
    picard_solve_with, run_with, InitialKind, InitialSpec, Integrator, PhysParams, PicardOptions, RunOptions,
    Scheme, SolverState, StepOptions, StepWarning,
};
use tfmhd_core::spectral::{Grid3, VectorField};

use crate::settings::Settings;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Ok = 0,
    Failed = 1,
    Halted = 2,
}

fn params(s: &Settings) -> Result<PhysParams> {
    Ok(PhysParams::new(s.f64("nu")?, s.f64("eta")?, s.f64("alpha")?, s.f64("hall")?)?)
}

fn fixed<const N: usize>(s: &Settings, name: &str) -> Result<[f64; N]> {
    let v = s.f64_list(name)?;
    v.try_into().map_err(|v: Vec<f64>| anyhow!("key '{name}': expected {N} comma-separated values, got {}", v.len()))
}

fn initial_spec(s: &Settings) -> Result<InitialSpec> {
    let [lo, hi] = fixed::<2>(s, "band")?;
    let mode = fixed::<3>(s, "mode")?;
    if mode.iter().any(|m| m.fract() != 0.0) {
        bail!("key 'mode': expected integer wavevector components");
    }
    Ok(InitialSpec {
        kind: s.parsed::<InitialKind>("initial")?,
        seed: s.u64("seed")?,
        amplitude: s.f64("amplitude")?,
        band: (lo, hi),
        slope: s.f64("slope")?,
        mode: mode.map(|m| m as i64),
        polarization: fixed::<3>(s, "polarization")?,
    })
}

fn initial_state(s: &Settings) -> Result<(VectorField, VectorField)> {
    let grid = Grid3::new(s.usize("n")?)?;
    Ok(initial_data(grid, &initial_spec(s)?)?)
}

fn monitor_config(s: &Settings) -> Result<MonitorConfig> {
    let (vp, vq) = (s.f64("vorticity_p")?, s.f64("vorticity_q")?);
    let cfg = MonitorConfig {
        velocity: CriterionSpec::velocity(s.f64("velocity_p")?, s.f64("velocity_q")?)?,
        vorticity: if s.bool("omega_only")? {
            CriterionSpec::omega_only(vp, vq)?
        } else {
            CriterionSpec::vorticity(vp, vq)?
        },
        s: s.f64("s")?,
        cadence: if s.raw("cadence").is_ok() { s.usize("cadence")? } else { 1 },
        envelope_constant: s.f64("envelope_constant")?,
        logsob_constant: s.f64("logsob_constant")?,
        oversample: s.usize("oversample")?,
        start_time: s.f64("start_time")?,
        b_time_exponent: s.f64("b_time_exponent")?,
    };
    cfg.validate()?;
    Ok(cfg)
}

fn step_options(s: &Settings) -> Result<StepOptions> {
    let mut o = StepOptions {
        cfl_limit: s.f64("cfl_limit")?,
        whistler_coeff: s.f64("whistler_coeff")?,
        ..StepOptions::default()
    };
    if s.raw("nonlinear").is_ok() {
        o.nonlinear = s.bool("nonlinear")?;
        o.blowup_factor = s.f64("blowup_factor")?;
    }
    Ok(o)
}

fn output_dir(s: &Settings) -> Result<std::path::PathBuf> {
    let dir = s.output_dir()?;
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    fs::write(dir.join("config.txt"), s.to_file_text()).context("writing config.txt")?;
    Ok(dir)
}

fn write_json(path: &Path, value: &serde_json::Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

pub fn run(s: &Settings) -> Result<Status> {
    let p = params(s)?;
    let monitor = monitor_config(s)?;
    let format = s.parsed::<ExportFormat>("format")?;
    let (t_end, dt) = (s.f64("t_end")?, s.f64("dt")?);
    let interval = s.usize("checkpoint_interval")?;
    let (u, b) = initial_state(s)?;
    let state = SolverState::new(u, b, 0.0, p)?;
    let scheme = s.parsed::<Scheme>("scheme")?;
    let step = step_options(s)?;
    let dir = output_dir(s)?;
    let options = RunOptions {
        scheme,
        step,
        checkpoint_interval: (interval > 0).then_some(interval),
        checkpoint_dir: Some(dir.join("checkpoints")),
    };
    let out = run_with(state, t_end, dt, &monitor, &options)?;

    let records_file = format!("records.{}", format.extension());
    export(&out.records, &dir.join(&records_file), format)?;
    let mut energy = String::new();
    for e in &out.energy {
        energy.push_str(&serde_json::to_string(e)?);
        energy.push('\n');
    }
    fs::write(dir.join("energy.jsonl"), energy).context("writing energy.jsonl")?;

    let cfl = out.warnings.iter().filter(|w| matches!(w, StepWarning::Cfl { .. })).count();
    let whistler = out.warnings.len() - cfl;
    let summary = json!({
        "command": "run",
        "n": out.final_state.grid().n(),
        "scheme": options.scheme.name(),
        "steps": out.steps,
        "t_final": out.final_state.t,
        "halted": out.halted,
        "energy_initial": out.energy.first().map(|e| e.energy),
        "energy_final": out.energy.last().map(|e| e.energy),
        "energy_balance": energy_balance(&out.energy),
        "hall_neutrality": hall_neutrality(&out.energy),
        "warnings": { "cfl": cfl, "whistler": whistler, "first": out.warnings.first() },
        "records": out.records.len(),
        "records_file": records_file,
        "minimal_constants": minimal_constants(&out.records, &monitor),
        "checkpoints": out.checkpoints.len(),
    });
    write_json(&dir.join("summary.json"), &summary)?;

    println!(
        "{} steps to t = {}, {} records in {}",
        out.steps,
        out.final_state.t,
        out.records.len(),
        dir.join(&records_file).display()
    );
    if cfl + whistler > 0 {
        eprintln!("warning: {cfl} CFL and {whistler} whistler time-step warnings (see summary.json)");
    }
    if let Some(h) = &out.halted {
        eprintln!("halted at step {} (t = {}): {}", h.step, h.t, h.reason);
        return Ok(Status::Halted);
    }
    Ok(Status::Ok)
}

fn l2_pair(u: &VectorField, b: &VectorField) -> f64 {
    (u.l2_norm().powi(2) + b.l2_norm().powi(2)).sqrt()
}

pub fn picard(s: &Settings) -> Result<Status> {
    let p = params(s)?;
    let dt = s.f64("dt")?;
    let iterations = s.usize("iterations")?;
    let target = s.f64("target_ratio")?;
    let search = s.bool("search")?;
    let max_halvings = s.usize("max_halvings")?;
    let options = PicardOptions {
        scheme: s.parsed::<Scheme>("scheme")?,
        s: s.f64("s")?,
    };
    let (u0, b0) = initial_state(s)?;
    let dir = output_dir(s)?;

    let mut t = s.f64("picard_t")?;
    let mut attempts = Vec::new();
    let (iterates, ratios, contracted) = loop {
        let its = picard_solve_with(&u0, &b0, p, t, iterations, dt, options)?;
        let ratios = contraction_ratios(&its);
        let ok = ratios.iter().all(|r| *r <= target);
        let worst = ratios.iter().copied().fold(0.0, f64::max);
        attempts.push(json!({ "t": t, "max_ratio": worst, "contracted": ok }));
        if ok || !search || attempts.len() > max_halvings {
            break (its, ratios, ok);
        }
        t *= 0.5;
    };
    let (steps, h) = picard_mesh(t, dt);

    let comparison = if s.bool("compare")? {
        let last = iterates.last().expect("at least one iterate");
        let step = StepOptions {
            cfl_limit: s.f64("cfl_limit")?,
            whistler_coeff: s.f64("whistler_coeff")?,
            ..StepOptions::default()
        };
        let mut it = Integrator::new(SolverState::new(u0.clone(), b0.clone(), 0.0, p)?, options.scheme, step)?;
        for _ in 0..steps {
            it.step(h)?;
        }
        let direct = it.state();
        let diff = l2_pair(&last.final_u.sub(&direct.u), &last.final_b.sub(&direct.b));
        let scale = l2_pair(&direct.u, &direct.b);
        Some(json!({ "l2_difference": diff, "relative": if scale > 0.0 { diff / scale } else { 0.0 } }))
    } else {
        None
    };

    let report = json!({
        "command": "picard",
        "n": u0.grid().n(),
        "t_final": t,
        "steps": steps,
        "dt_effective": h,
        "target_ratio": target,
        "contracted": contracted,
        "attempts": attempts,
        "iterates": iterates.iter().map(|it| json!({
            "index": it.index, "delta_e": it.delta_e, "sup_energy_s": it.sup_energy_s,
        })).collect::<Vec<_>>(),
        "ratios": ratios,
        "direct_comparison": comparison,
    });
    write_json(&dir.join("picard.json"), &report)?;

    println!("T = {t}: ratios {ratios:?}, contracted = {contracted}");
    if let Some(c) = &report["direct_comparison"].as_object() {
        println!("last iterate vs direct solve: L2 difference {}", c["l2_difference"]);
    }
    Ok(Status::Ok)
}

pub fn verify(id: &str, s: &Settings) -> Result<Status> {
    let ids: Vec<InequalityId> = if id == "all" {
        InequalityId::ALL.to_vec()
    } else {
        vec![id.parse::<InequalityId>()?]
    };
    let resolutions = s
        .raw("resolutions")?
        .split(',')
        .map(|r| r.trim().parse::<usize>().map_err(|_| anyhow!("key 'resolutions': bad grid size '{r}'")))
        .collect::<Result<Vec<_>>>()?;
    let config = VerifyConfig {
        trials: s.usize("trials")?,
        resolutions,
        seed: s.u64("seed")?,
        slope: s.f64("slope")?,
        stability_factor: s.f64("stability_factor")?,
        parallel: s.bool("parallel")?,
        ..VerifyConfig::default()
    };
    config.validate()?;
    let dir = output_dir(s)?;

    let mut reports = Vec::with_capacity(ids.len());
    for id in ids {
        let r = verify_one(id, &config)?;
        println!(
            "{:<26} {} max_ratio={:.4e} median={:.4e} residual={:.2e}",
            id.name(),
            if r.pass { "PASS" } else { "FAIL" },
            r.max_ratio,
            r.median_ratio,
            r.max_residual
        );
        for f in &r.failures {
            eprintln!("  {}: {f}", id.name());
        }
        reports.push(r);
    }
    let path = dir.join("calibration.json");
    calibration_report(&reports, &path)?;
    println!("calibration written to {}", path.display());
    Ok(if reports.iter().all(|r| r.pass) { Status::Ok } else { Status::Failed })
}

pub fn replay(s: &Settings) -> Result<Status> {
    let p = params(s)?;
    let config = monitor_config(s)?;
    let format = s.parsed::<ExportFormat>("format")?;
    let dir = output_dir(s)?;
    let source = match s.raw("checkpoints")? {
        "" => dir.join("checkpoints"),
        other => other.into(),
    };
    let entries = load_checkpoints(&source)?;
    if entries.is_empty() {
        bail!("no checkpoints listed in {}", source.display());
    }
    let grid = Grid3::new(first_grid(&entries)?)?;
    let mut monitor = Monitor::new(config.clone(), grid)?;
    for (entry, u, b) in &entries {
        let state = SolverState::new(u.clone(), b.clone(), entry.t, p)
            .with_context(|| format!("checkpoint {}", entry.file))?;
        monitor.observe(&state)?;
    }
    let records = monitor.into_records();
    let file = format!("replay.{}", format.extension());
    export(&records, &dir.join(&file), format)?;
    let summary = json!({
        "command": "monitor-replay",
        "checkpoints": entries.len(),
        "records_file": file,
        "minimal_constants": minimal_constants(&records, &config),
    });
    write_json(&dir.join("replay_summary.json"), &summary)?;
    println!("{} records from {} written to {}", records.len(), source.display(), dir.join(&file).display());
    Ok(Status::Ok)
}

fn first_grid(entries: &[(tfmhd_core::solver::CheckpointEntry, VectorField, VectorField)]) -> Result<usize> {
    let n = entries[0].1.grid().n();
    if entries.iter().any(|(_, u, b)| u.grid().n() != n || b.grid().n() != n) {
        bail!("checkpoints mix grid sizes");
    }
    Ok(n)
}

pub fn bank_info(s: &Settings) -> Result<Status> {
    let grid = Grid3::new(s.usize("n")?)?;
    let info = FilterBank::build(grid).info();
    println!("{}", serde_json::to_string_pretty(&info)?);
    Ok(Status::Ok)
}
