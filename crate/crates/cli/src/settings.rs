//! Flat `key = value` configuration shared by every subcommand.
//!
//! Values come from built-in defaults, then an optional config file, then
//! command-line flags (`--key value`, hyphens or underscores).

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};

pub const RUN: u8 = 1;
pub const PICARD: u8 = 2;
pub const VERIFY: u8 = 4;
pub const REPLAY: u8 = 8;
pub const BANK: u8 = 16;

const SOLVE: u8 = RUN | PICARD | REPLAY;
const MONITOR: u8 = RUN | REPLAY;

pub struct Key {
    pub name: &'static str,
    pub default: &'static str,
    pub help: &'static str,
    pub used_by: u8,
}

const fn key(name: &'static str, default: &'static str, used_by: u8, help: &'static str) -> Key {
    Key {
        name,
        default,
        help,
        used_by,
    }
}

pub const KEYS: &[Key] = &[
    key("n", "32", RUN | PICARD | BANK, "grid points per axis (even, >= 8)"),
    key("nu", "0.01", SOLVE, "kinematic viscosity"),
    key("eta", "0.01", SOLVE, "magnetic diffusivity"),
    key("alpha", "0.1", SOLVE, "electron-inertia coefficient"),
    key("hall", "0.5", SOLVE, "Hall coefficient"),
    key("dt", "0.001", RUN | PICARD, "time step"),
    key("t_end", "1", RUN, "integration time (0 writes empty records)"),
    key("scheme", "rk4_integrating_factor", RUN | PICARD, "rk4_integrating_factor or imex_cnab2"),
    key("initial", "taylor_green", RUN | PICARD, "taylor_green, beltrami_abc, random_band_limited or single_mode"),
    key("amplitude", "1", RUN | PICARD, "initial amplitude (H^3 norm of each field for random data)"),
    key("seed", "0", RUN | PICARD | VERIFY, "random seed"),
    key("band", "1,4", RUN | PICARD, "radial band k_lo,k_hi of random initial data"),
    key("slope", "-2", RUN | PICARD | VERIFY, "spectral slope of random fields"),
    key("mode", "1,0,0", RUN | PICARD, "wavevector of single-mode data"),
    key("polarization", "0,1,0", RUN | PICARD, "polarisation of single-mode data"),
    key("velocity_p", "inf", MONITOR, "p of the velocity criterion"),
    key("velocity_q", "2", MONITOR, "q of the velocity criterion"),
    key("vorticity_p", "3", MONITOR, "p of the vorticity criterion"),
    key("vorticity_q", "2", MONITOR, "q of the vorticity criterion"),
    key("omega_only", "false", MONITOR, "vorticity criterion on omega alone (3/2 < p)"),
    key("s", "3", MONITOR | PICARD, "Sobolev index of the monitored energy"),
    key("cadence", "10", RUN, "monitor sample every this many steps"),
    key("envelope_constant", "1", MONITOR, "constant C in the Gronwall envelopes"),
    key("logsob_constant", "1", MONITOR, "constant C in the log-Sobolev bound"),
    key("oversample", "1", MONITOR, "refinement factor for physical-space norms"),
    key("start_time", "0", MONITOR, "start of the integration window"),
    key("b_time_exponent", "1", MONITOR, "time exponent of the b term in the velocity criterion"),
    key("format", "csv", MONITOR, "record format: csv or jsonl"),
    key("output", "out", RUN | PICARD | VERIFY | REPLAY, "output directory, relative to $TFMHD_OUTPUT_ROOT"),
    key("checkpoint_interval", "0", RUN, "checkpoint every this many steps (0 disables)"),
    key("checkpoints", "", REPLAY, "checkpoint directory to replay (default <output>/checkpoints)"),
    key("cfl_limit", "0.5", RUN | PICARD, "Courant number above which a warning is recorded"),
    key("whistler_coeff", "0.25", RUN | PICARD, "whistler time-step coefficient for warnings"),
    key("blowup_factor", "1e12", RUN, "halt when the energy exceeds this multiple of its start value"),
    key("nonlinear", "true", RUN, "include the nonlinear terms"),
    key("picard_t", "1", PICARD, "initial Picard horizon T"),
    key("iterations", "6", PICARD, "number of Picard iterates"),
    key("search", "true", PICARD, "halve T until every contraction ratio is below target_ratio"),
    key("max_halvings", "12", PICARD, "maximal number of halvings of T"),
    key("target_ratio", "0.5", PICARD, "required contraction ratio"),
    key("compare", "true", PICARD, "compare the last iterate with a direct nonlinear solve"),
    key("trials", "100", VERIFY, "trials per resolution"),
    key("resolutions", "16,32,48", VERIFY, "comma-separated grid sizes"),
    key("stability_factor", "4", VERIFY, "allowed spread of the maximal ratio across grids"),
    key("parallel", "true", VERIFY, "run trials on the rayon thread pool"),
];

pub fn find_key(name: &str) -> Option<&'static Key> {
    let norm = name.replace('-', "_");
    KEYS.iter().find(|k| k.name == norm)
}

/// Effective key-value settings for one subcommand.
#[derive(Clone, Debug)]
pub struct Settings {
    values: BTreeMap<&'static str, String>,
    scope: u8,
}

impl Settings {
    pub fn defaults(scope: u8) -> Self {
        let values = KEYS
            .iter()
            .filter(|k| k.used_by & scope != 0)
            .map(|k| (k.name, k.default.to_string()))
            .collect();
        Self { values, scope }
    }

    /// Sets a key. Keys that belong to other subcommands are accepted and
    /// ignored so one file can serve several subcommands.
    pub fn set(&mut self, name: &str, value: &str) -> Result<()> {
        let k = find_key(name).ok_or_else(|| anyhow!("unknown configuration key '{name}'"))?;
        if k.used_by & self.scope != 0 {
            self.values.insert(k.name, value.trim().to_string());
        }
        Ok(())
    }

    pub fn load_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        self.load_str(&text).with_context(|| format!("in config {}", path.display()))
    }

    pub fn load_str(&mut self, text: &str) -> Result<()> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("line {}: expected 'key = value', got '{raw}'", lineno + 1))?;
            self.set(k.trim(), v).with_context(|| format!("line {}", lineno + 1))?;
        }
        Ok(())
    }

    /// The settings as a config file, keys in table order.
    pub fn to_file_text(&self) -> String {
        let mut out = String::new();
        for k in KEYS {
            if let Some(v) = self.values.get(k.name) {
                let _ = writeln!(out, "{} = {v}", k.name);
            }
        }
        out
    }

    pub fn raw(&self, name: &str) -> Result<&str> {
        self.values
            .get(name)
            .map(String::as_str)
            .ok_or_else(|| anyhow!("key '{name}' does not apply to this subcommand"))
    }

    pub fn f64(&self, name: &str) -> Result<f64> {
        parse_f64(self.raw(name)?).with_context(|| format!("key '{name}'"))
    }

    pub fn usize(&self, name: &str) -> Result<usize> {
        let v = self.raw(name)?;
        v.parse().map_err(|_| anyhow!("key '{name}': expected a non-negative integer, got '{v}'"))
    }

    pub fn u64(&self, name: &str) -> Result<u64> {
        let v = self.raw(name)?;
        v.parse().map_err(|_| anyhow!("key '{name}': expected a non-negative integer, got '{v}'"))
    }

    pub fn bool(&self, name: &str) -> Result<bool> {
        match self.raw(name)? {
            "true" | "yes" | "1" | "on" => Ok(true),
            "false" | "no" | "0" | "off" => Ok(false),
            v => bail!("key '{name}': expected true or false, got '{v}'"),
        }
    }

    pub fn f64_list(&self, name: &str) -> Result<Vec<f64>> {
        self.raw(name)?
            .split(',')
            .map(|s| parse_f64(s.trim()).with_context(|| format!("key '{name}'")))
            .collect()
    }

    pub fn parsed<T: std::str::FromStr>(&self, name: &str) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        self.raw(name)?.parse().map_err(|e| anyhow!("key '{name}': {e}"))
    }

    /// `$TFMHD_OUTPUT_ROOT/<output>`, or `./<output>` without the variable.
    pub fn output_dir(&self) -> Result<PathBuf> {
        let root = std::env::var_os("TFMHD_OUTPUT_ROOT").map(PathBuf::from).unwrap_or_else(|| PathBuf::from("."));
        Ok(root.join(self.raw("output")?))
    }
}

/// Reals, with `inf` / `infinity` for p = ∞.
pub fn parse_f64(s: &str) -> Result<f64> {
    match s {
        "inf" | "infinity" | "+inf" => Ok(f64::INFINITY),
        _ => s.parse::<f64>().map_err(|_| anyhow!("expected a real number, got '{s}'")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_then_override() {
        let mut s = Settings::defaults(RUN);
        s.load_str("# comment\nnu = 0.02\nvelocity-p = inf # trailing\n\ntrials = 5\n").unwrap();
        assert_eq!(s.f64("nu").unwrap(), 0.02);
        assert_eq!(s.f64("velocity_p").unwrap(), f64::INFINITY);
        // a verify-only key is accepted but not kept
        assert!(s.raw("trials").is_err());
        s.set("nu", "0.5").unwrap();
        assert_eq!(s.f64("nu").unwrap(), 0.5);
    }

    #[test]
    fn unknown_keys_and_bad_lines_fail() {
        let mut s = Settings::defaults(RUN);
        assert!(s.load_str("viscosity = 1").is_err());
        assert!(s.load_str("nu 1").is_err());
        assert!(s.set("nu", "abc").is_ok());
        assert!(s.f64("nu").is_err());
    }

    #[test]
    fn file_text_round_trips() {
        let mut s = Settings::defaults(PICARD);
        s.set("picard_t", "0.25").unwrap();
        let mut t = Settings::defaults(PICARD);
        t.load_str(&s.to_file_text()).unwrap();
        assert_eq!(s.values, t.values);
    }

    #[test]
    fn every_key_is_documented_and_unique() {
        let mut names: Vec<&str> = KEYS.iter().map(|k| k.name).collect();
        names.sort_unstable();
        names.dedup();
        assert_eq!(names.len(), KEYS.len());
        assert!(KEYS.iter().all(|k| !k.help.is_empty() && k.used_by != 0));
    }
}
