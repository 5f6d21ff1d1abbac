//! `tfmhd`: runs, Picard checks, estimate verification and checkpoint replay.
//!
//! Exit status: 0 on success, 1 on invalid input or a failed verification,
//! 2 when a run halts on numerical blow-up (its artifacts are still written).

mod commands;
mod settings;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Arg, ArgMatches, Command};

use settings::{Settings, BANK, KEYS, PICARD, REPLAY, RUN, VERIFY};

fn with_keys(mut cmd: Command, scope: u8) -> Command {
    for k in KEYS.iter().filter(|k| k.used_by & scope != 0) {
        let mut arg = Arg::new(k.name)
            .long(k.name.replace('_', "-"))
            .value_name("VALUE")
            .allow_hyphen_values(true)
            .help(format!("{} [default: {}]", k.help, if k.default.is_empty() { "none" } else { k.default }));
        if k.name.contains('_') {
            arg = arg.alias(k.name);
        }
        cmd = cmd.arg(arg);
    }
    cmd
}

fn cli() -> Command {
    Command::new("tfmhd")
        .version(env!("CARGO_PKG_VERSION"))
        .about("Pseudo-spectral Hall MHD with electron inertia: runs, blow-up monitoring and estimate checks")
        .subcommand_required(true)
        .arg_required_else_help(true)
        .arg(
            Arg::new("config")
                .long("config")
                .global(true)
                .value_name("FILE")
                .help("flat 'key = value' file; command-line flags take precedence"),
        )
        .subcommand(with_keys(
            Command::new("run").about("integrate in time and record the continuation-criterion diagnostics"),
            RUN,
        ))
        .subcommand(with_keys(
            Command::new("picard").about("successive approximations on [0, T] with contraction ratios"),
            PICARD,
        ))
        .subcommand(with_keys(
            Command::new("verify")
                .about("randomised check of an analytic estimate, or of all of them")
                .arg(Arg::new("id").required(true).value_name("ID|all").help("inequality id, or 'all'")),
            VERIFY,
        ))
        .subcommand(with_keys(
            Command::new("monitor-replay").about("recompute monitor records from saved checkpoints"),
            REPLAY,
        ))
        .subcommand(with_keys(
            Command::new("bank-info").about("print the Littlewood-Paley bank of an n^3 grid as JSON"),
            BANK,
        ))
}

fn settings(scope: u8, top: &ArgMatches, sub: &ArgMatches) -> anyhow::Result<Settings> {
    let mut s = Settings::defaults(scope);
    let file = sub.get_one::<String>("config").or_else(|| top.get_one::<String>("config"));
    if let Some(path) = file {
        s.load_file(&PathBuf::from(path))?;
    }
    for k in KEYS.iter().filter(|k| k.used_by & scope != 0) {
        if let Some(v) = sub.get_one::<String>(k.name) {
            s.set(k.name, v)?;
        }
    }
    Ok(s)
}

fn dispatch(top: &ArgMatches) -> anyhow::Result<commands::Status> {
    match top.subcommand() {
        Some(("run", m)) => commands::run(&settings(RUN, top, m)?),
        Some(("picard", m)) => commands::picard(&settings(PICARD, top, m)?),
        Some(("verify", m)) => {
            let id = m.get_one::<String>("id").expect("required");
            commands::verify(id, &settings(VERIFY, top, m)?)
        }
        Some(("monitor-replay", m)) => commands::replay(&settings(REPLAY, top, m)?),
        Some(("bank-info", m)) => commands::bank_info(&settings(BANK, top, m)?),
        _ => unreachable!("subcommand_required"),
    }
}

fn main() -> ExitCode {
    let matches = match cli().try_get_matches() {
        Ok(m) => m,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match dispatch(&matches) {
        Ok(status) => ExitCode::from(status as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn command_definition_is_consistent() {
        cli().debug_assert();
    }

    #[test]
    fn flags_override_defaults() {
        let m = cli().try_get_matches_from(["tfmhd", "run", "--t-end", "0.5", "--velocity_p", "4"]).unwrap();
        let (_, sub) = m.subcommand().unwrap();
        let s = settings(RUN, &m, sub).unwrap();
        assert_eq!(s.f64("t_end").unwrap(), 0.5);
        assert_eq!(s.f64("velocity_p").unwrap(), 4.0);
        assert_eq!(s.f64("nu").unwrap(), 0.01);
    }

    #[test]
    fn negative_values_parse() {
        let m = cli().try_get_matches_from(["tfmhd", "verify", "all", "--slope", "-3"]).unwrap();
        let (_, sub) = m.subcommand().unwrap();
        assert_eq!(settings(VERIFY, &m, sub).unwrap().f64("slope").unwrap(), -3.0);
    }
}
