mod commands;
mod config;
mod error;
mod sweep;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use colur::eval::ReportFormat;

use crate::config::ExperimentConfig;
use crate::error::CliResult;

/// Restore classifiers degraded by noisy-label training.
#[derive(Debug, Parser)]
#[command(name = "colur", version)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Debug, Args)]
struct Common {
    /// TOML experiment configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Directory for every artifact.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Report format.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Switch {
    On,
    Off,
}

impl Switch {
    fn on(self) -> bool {
        matches!(self, Switch::On)
    }
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Generate D0, Du (observed and truth) and the test set.
    Prepare,
    /// Train the original model on D0.
    Train,
    /// Continue training on the noisy Du.
    Degrade,
    /// Unlearn and relearn the degraded model.
    Restore(RestoreArgs),
    /// Report metrics for any checkpoint.
    Eval(EvalArgs),
    /// Aggregate results over noise ratios, seeds and toggle sets.
    Sweep(SweepArgs),
}

#[derive(Debug, Args)]
struct RestoreArgs {
    #[arg(long, value_enum)]
    toggle_ul: Option<Switch>,
    #[arg(long, value_enum)]
    toggle_ls: Option<Switch>,
    #[arg(long, value_enum)]
    toggle_mp: Option<Switch>,
    /// Also unlearn the teacher.
    #[arg(long)]
    teacher_unlearn: bool,
    /// Save both models every N iterations under `checkpoints/`.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    save_every: Option<u64>,
}

#[derive(Debug, Args)]
struct EvalArgs {
    #[arg(long)]
    checkpoint: PathBuf,
    /// Labelled CSV to evaluate on; defaults to the prepared test set.
    #[arg(long)]
    data: Option<PathBuf>,
    /// Also write last-hidden-layer activations.
    #[arg(long)]
    activations: bool,
}

#[derive(Debug, Args)]
struct SweepArgs {
    /// Comma-separated noise ratios.
    #[arg(long, value_delimiter = ',')]
    etas: Option<Vec<f64>>,
    /// Comma-separated seeds.
    #[arg(long, value_delimiter = ',')]
    seeds: Option<Vec<u64>>,
    /// Comma-separated toggle sets such as `ul+ls+mp,ls`, or `all`.
    #[arg(long, value_delimiter = ',')]
    toggle_sets: Option<Vec<String>>,
    #[arg(long)]
    teacher_unlearn: bool,
}

fn load_config(c: &Common) -> CliResult<ExperimentConfig> {
    let mut cfg = match &c.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(s) = c.seed {
        cfg.seed = s;
    }
    if let Some(o) = &c.out {
        cfg.out = o.clone();
    }
    Ok(cfg)
}

fn run(cli: Cli) -> CliResult<()> {
    let mut cfg = load_config(&cli.common)?;
    let format = match cli.common.format {
        Some(Format::Csv) => ReportFormat::Csv,
        _ => ReportFormat::Json,
    };
    let mut save_every = None;
    match &cli.cmd {
        Cmd::Restore(a) => {
            let t = &mut cfg.lur.toggles;
            for (flag, slot) in [(a.toggle_ul, &mut t.unlearn), (a.toggle_ls, &mut t.smooth), (a.toggle_mp, &mut t.mixup)] {
                if let Some(f) = flag {
                    *slot = f.on();
                }
            }
            cfg.lur.teacher_unlearn |= a.teacher_unlearn;
            save_every = a.save_every.map(|n| n as usize);
        }
        Cmd::Sweep(a) => {
            if let Some(e) = &a.etas {
                cfg.sweep.etas = e.clone();
            }
            if let Some(s) = &a.seeds {
                cfg.sweep.seeds = s.clone();
            }
            if let Some(t) = &a.toggle_sets {
                cfg.sweep.toggle_sets = t.clone();
            }
            cfg.lur.teacher_unlearn |= a.teacher_unlearn;
        }
        _ => {}
    }
    cfg.validate()?;
    cfg.ensure_out()?;

    match cli.cmd {
        Cmd::Prepare => commands::prepare(&cfg),
        Cmd::Train => commands::train(&cfg, format),
        Cmd::Degrade => commands::degrade(&cfg, format),
        Cmd::Restore(_) => commands::restore(&cfg, format, save_every),
        Cmd::Eval(a) => commands::evaluate(&cfg, format, &a.checkpoint, a.data.as_ref(), a.activations),
        Cmd::Sweep(_) => sweep::sweep(&cfg),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
