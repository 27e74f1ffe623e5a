mod commands;
mod config;
mod csv;
mod presets;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use config::ExperimentConfig;

#[derive(Parser, Debug)]
#[command(name = "ccpb", version, about = "Charge-conserving Poisson-Boltzmann solver and experiment driver")]
struct Cli {
    #[command(subcommand)]
    command: Option<Command>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct Common {
    /// Named experiment preset (see --list-presets)
    #[arg(long, global = true, conflicts_with = "config")]
    preset: Option<String>,
    /// TOML experiment config
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory, overrides the config's outputs.dir
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for independent solves (default: all cores)
    #[arg(long, global = true, value_parser = clap::value_parser!(u16).range(1..))]
    workers: Option<u16>,
    /// Print the preset names and exit
    #[arg(long, global = true)]
    list_presets: bool,
    /// Print the resolved config as TOML and exit
    #[arg(long, global = true)]
    dump_config: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve the boundary value problem for every species set, model and eps
    Solve,
    /// Limit pairs (t, c) at the configured gammas
    Limits,
    /// Limit pairs over a log-spaced gamma range
    Sweep,
    /// Non-electroneutral asymptotics checks
    Nonneutral,
    /// Run the built-in check suites
    Verify {
        /// Print the check inventory without computing
        #[arg(long)]
        list: bool,
        /// Reference values file (name,reference,tolerance)
        #[arg(long)]
        golden: Option<PathBuf>,
    },
}

fn load_config(common: &Common, fallback: Option<&str>) -> Result<ExperimentConfig> {
    match (&common.preset, &common.config, fallback) {
        (Some(name), _, _) => presets::preset(name),
        (None, Some(path), _) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            ExperimentConfig::from_toml(&text).with_context(|| format!("config {}", path.display()))
        }
        (None, None, Some(name)) => presets::preset(name),
        (None, None, None) => bail!("give --preset NAME or --config PATH"),
    }
}

fn run_verify(list: bool, golden: Option<PathBuf>) -> Result<bool> {
    let text = match &golden {
        Some(p) => std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?,
        None => verify::DEFAULT_GOLDEN.to_string(),
    };
    let g = verify::Golden::parse(&text)?;
    if list {
        for (name, kind) in verify::inventory(&g) {
            println!("{name}\t{kind}");
        }
        return Ok(true);
    }
    let checks = verify::run(&g)?;
    for c in &checks {
        println!("{}", verify::format_check(c));
    }
    let failed: Vec<&str> = checks.iter().filter(|c| !c.pass && !c.advisory).map(|c| c.name.as_str()).collect();
    let warned = checks.iter().filter(|c| !c.pass && c.advisory).count();
    if failed.is_empty() {
        println!("verify: {} checks passed ({warned} advisory warnings)", checks.len() - warned);
    } else {
        println!("verify: {} of {} checks FAILED: {}", failed.len(), checks.len(), failed.join(", "));
    }
    Ok(failed.is_empty())
}

fn run(cli: Cli) -> Result<bool> {
    let common = &cli.common;
    if common.list_presets {
        for name in presets::NAMES {
            println!("{name}");
        }
        return Ok(true);
    }
    let Some(command) = cli.command else {
        bail!("no subcommand given; try --help");
    };
    if let Command::Verify { list, golden } = command {
        if common.preset.is_some() || common.config.is_some() {
            bail!("verify runs fixed suites and takes no --preset/--config");
        }
        return run_verify(list, golden);
    }
    let fallback = matches!(command, Command::Nonneutral).then_some("nonneutral");
    let cfg = load_config(common, fallback)?;
    if common.dump_config {
        print!("{}", cfg.to_toml()?);
        return Ok(true);
    }
    let out = common.out.clone().unwrap_or_else(|| PathBuf::from(&cfg.outputs.dir));
    let written = match command {
        Command::Solve => commands::cmd_solve(&cfg, &out)?,
        Command::Limits => commands::cmd_limits(&cfg, &out)?,
        Command::Sweep => commands::cmd_sweep(&cfg, &out)?,
        Command::Nonneutral => commands::cmd_nonneutral(&cfg, &out)?,
        Command::Verify { .. } => unreachable!(),
    };
    for p in written {
        println!("wrote {}", p.display());
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.common.workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n as usize)
            .build()
            .map_err(anyhow::Error::from)
            .and_then(|pool| pool.install(|| run(cli))),
        None => run(cli),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
