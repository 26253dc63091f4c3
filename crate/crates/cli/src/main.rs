use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use elastolbm_cli::commands::{cmd_check, cmd_converge, cmd_run, cmd_stability};
use elastolbm_cli::config::{Configurable, RunConfig, StudyConfig};
use elastolbm_cli::presets::{preset, Preset, PRESETS};
use elastolbm_cli::{exit, with_workers, CliError};

#[derive(Parser)]
#[command(name = "elastolbm", version, about = "Lattice Boltzmann solver for 2D linear elastodynamics")]
struct Cli {
    /// Worker threads (0 uses all cores). Results do not depend on it.
    #[arg(long, global = true, default_value_t = 0)]
    workers: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one simulation and write snapshots, traces and an error report.
    Run(Source),
    /// Long run recording norm and error traces.
    Stability(Source),
    /// Grid convergence study with order thresholds.
    Converge(Source),
    /// Projector and symmetrizer algebra checks for one material.
    Check(Source),
    /// List the named presets.
    Presets,
}

#[derive(Args)]
struct Source {
    /// Start from a named preset (see `presets`).
    #[arg(long)]
    preset: Option<String>,
    /// Key/value config file applied after the preset.
    #[arg(long)]
    config: Option<PathBuf>,
    /// `key=value` override, applied last; may be repeated.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Source {
    fn finish<C: Configurable>(&self, mut c: C) -> Result<C, CliError> {
        if let Some(path) = &self.config {
            c.apply_file(path)?;
        }
        c.apply_overrides(&self.overrides)?;
        if let Some(out) = &self.out {
            c.set("out_dir", &out.to_string_lossy())?;
        }
        Ok(c)
    }

    fn run_config(&self) -> Result<RunConfig, CliError> {
        let base = match self.preset.as_deref().map(|p| (p, preset(p))) {
            None => RunConfig::default(),
            Some((_, Some(Preset::Run(c)))) => c,
            Some((p, Some(Preset::Study(_)))) => {
                return Err(CliError::Config(format!("'{p}' is a study preset; use `converge`")))
            }
            Some((p, None)) => return Err(CliError::Config(format!("unknown preset '{p}'"))),
        };
        self.finish(base)
    }

    fn study_config(&self) -> Result<StudyConfig, CliError> {
        let base = match self.preset.as_deref().map(|p| (p, preset(p))) {
            None => StudyConfig::default(),
            Some((p, Some(Preset::Study(c)))) => StudyConfig { out_dir: format!("out/{p}").into(), ..c },
            Some((p, Some(Preset::Run(_)))) => {
                return Err(CliError::Config(format!("'{p}' is a run preset; use `run` or `stability`")))
            }
            Some((p, None)) => return Err(CliError::Config(format!("unknown preset '{p}'"))),
        };
        self.finish(base)
    }
}

fn dispatch(command: &Command) -> Result<i32, CliError> {
    match command {
        Command::Run(src) | Command::Stability(src) => {
            let config = src.run_config()?;
            let report = match command {
                Command::Run(_) => cmd_run(&config)?,
                _ => cmd_stability(&config)?,
            };
            print!("{}", report.to_text());
            println!("output = {}", config.out_dir.display());
            Ok(if report.diverged_at.is_some() { exit::DIVERGED } else { exit::OK })
        }
        Command::Converge(src) => {
            let config = src.study_config()?;
            let report = cmd_converge(&config)?;
            print!("{}", report.verdicts_csv());
            println!("output = {}", config.out_dir.display());
            Ok(if report.passed() { exit::OK } else { exit::THRESHOLD })
        }
        Command::Check(src) => {
            let r = cmd_check(&src.run_config()?)?;
            println!("idempotency = {:.3e}", r.idempotency);
            println!("projector_spectrum = {:.3e}", r.projector_spectrum);
            println!("kj_asymmetry = {:.3e}", r.kj_asymmetry);
            println!("relaxation_spectrum = {:.3e}", r.relaxation_spectrum);
            println!("status = pass");
            Ok(exit::OK)
        }
        Command::Presets => {
            for (name, what) in PRESETS {
                println!("{name:32} {what}");
            }
            Ok(exit::OK)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let code = match with_workers(cli.workers, || dispatch(&cli.command)).and_then(|r| r) {
        Ok(code) => code,
        Err(e) => {
            log::error!("{e}");
            e.exit_code()
        }
    };
    ExitCode::from(code as u8)
}
