//! Command line front end.

use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::config::{self, ConfigError, ExperimentConfig, Kind};
use crate::eval::RunOptions;
use crate::table::Table;
use crate::{fig2, fig3, sweep, verify, CliError};

pub const THREADS_ENV: &str = "QST_THREADS";

#[derive(Debug, Parser)]
#[command(name = "qst", version, about = "State transfer experiments on XXZ spin-S chains")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Average fidelity against spin size.
    Fig2(Common),
    /// Average fidelity against bus temperature.
    Fig3 {
        #[arg(long, value_enum)]
        variant: Option<VariantArg>,
        #[command(flatten)]
        common: Common,
    },
    /// Full-model check of the effective swap.
    VerifyEffective(Common),
    /// Cartesian parameter sweep.
    Sweep(Common),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VariantArg {
    A,
    B,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// CSV destination; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long, env = THREADS_ENV)]
    pub threads: Option<usize>,
}

impl Command {
    fn common(&self) -> &Common {
        match self {
            Command::Fig2(c) | Command::VerifyEffective(c) | Command::Sweep(c) => c,
            Command::Fig3 { common, .. } => common,
        }
    }
}

/// What a finished run produced.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub config: ExperimentConfig,
    pub csv: Vec<u8>,
    pub summary: Vec<String>,
    /// Points that failed a verification tolerance.
    pub failures: usize,
}

fn kind_for(cmd: &Command, file: Option<Kind>) -> Result<Kind, CliError> {
    let wanted = match cmd {
        Command::Fig2(_) => Kind::Fig2,
        Command::VerifyEffective(_) => Kind::VerifyEffective,
        Command::Sweep(_) => Kind::Sweep,
        Command::Fig3 { variant, .. } => match (variant, file) {
            (Some(VariantArg::A), _) => Kind::Fig3a,
            (Some(VariantArg::B), _) => Kind::Fig3b,
            (None, Some(k @ (Kind::Fig3a | Kind::Fig3b))) => k,
            (None, _) => {
                return Err(ConfigError { field: "experiment".into(), message: "fig3 needs --variant a|b".into(), line: None }.into())
            }
        },
    };
    match file {
        Some(k) if k != wanted => Err(ConfigError {
            field: "experiment".into(),
            message: format!("config is for `{k}` but `{wanted}` was requested"),
            line: None,
        }
        .into()),
        _ => Ok(wanted),
    }
}

fn auto_seed() -> u64 {
    use std::time::{SystemTime, UNIX_EPOCH};
    let nanos = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_nanos()).unwrap_or(0);
    (nanos as u64) ^ ((nanos >> 64) as u64) ^ u64::from(std::process::id())
}

/// Loads the config, applies command line overrides and fills defaults.
pub fn resolve(cmd: &Command) -> Result<(Kind, ExperimentConfig), CliError> {
    let common = cmd.common();
    let mut cfg = match &common.config {
        Some(path) => config::load(path)?,
        None => ExperimentConfig::default(),
    };
    let kind = kind_for(cmd, cfg.experiment)?;
    cfg.experiment = Some(kind);
    if let Some(s) = common.seed {
        cfg.seed = Some(s);
    }
    if cfg.seed.is_none() {
        let s = auto_seed();
        log::info!("no seed given, using {s}");
        cfg.seed = Some(s);
    }
    if let Some(n) = common.samples {
        cfg.samples = Some(n);
    }
    cfg.samples.get_or_insert(config::DEFAULT_SAMPLES);
    cfg.sampler.get_or_insert_default();
    match kind {
        Kind::Fig2 => {
            cfg.fig2.get_or_insert_with(Default::default);
        }
        Kind::Fig3a => {
            cfg.fig3a.get_or_insert_with(Default::default);
        }
        Kind::Fig3b => {
            cfg.fig3b.get_or_insert_with(Default::default);
        }
        Kind::VerifyEffective => {
            cfg.verify.get_or_insert_with(Default::default);
        }
        Kind::Sweep => {
            cfg.sweep.get_or_insert_with(Default::default);
        }
    }
    // only the running section is echoed
    let keep = |k: Kind| kind == k;
    if !keep(Kind::Fig2) {
        cfg.fig2 = None;
    }
    if !keep(Kind::Fig3a) {
        cfg.fig3a = None;
    }
    if !keep(Kind::Fig3b) {
        cfg.fig3b = None;
    }
    if !keep(Kind::VerifyEffective) {
        cfg.verify = None;
    }
    if !keep(Kind::Sweep) {
        cfg.sweep = None;
    }
    cfg.validate()?;
    Ok((kind, cfg))
}

/// Header comment block: artifact version and the resolved config.
pub fn header(cfg: &ExperimentConfig) -> String {
    format!("qst {}\n\n{}", env!("CARGO_PKG_VERSION"), cfg.to_toml().trim_end())
}

/// Runs one experiment with the given worker count.
pub fn execute(kind: Kind, cfg: &ExperimentConfig, threads: Option<usize>) -> Result<Outcome, CliError> {
    let opts = RunOptions {
        seed: cfg.seed.expect("resolved"),
        samples: cfg.samples.expect("resolved"),
        sampler: cfg.sampler.unwrap_or_default().into(),
        threads,
    };
    let mut failures = 0;
    let (table, summary): (Table, Vec<String>) = match kind {
        Kind::Fig2 => {
            let rows = fig2::run(cfg.fig2.as_ref().expect("resolved"), &opts)?;
            (fig2::table(&rows), fig2::summary(&rows))
        }
        Kind::Fig3a => {
            let rows = fig3::run_a(cfg.fig3a.as_ref().expect("resolved"), &opts)?;
            (fig3::table(&rows), fig3::summary(&rows))
        }
        Kind::Fig3b => {
            let rows = fig3::run_b(cfg.fig3b.as_ref().expect("resolved"), &opts)?;
            (fig3::table(&rows), fig3::summary(&rows))
        }
        Kind::VerifyEffective => {
            let rows = verify::run(cfg.verify.as_ref().expect("resolved"), &opts)?;
            failures = rows.iter().filter(|r| !r.pass).count();
            (verify::table(&rows), verify::summary(&rows))
        }
        Kind::Sweep => {
            let sc = cfg.sweep.as_ref().expect("resolved");
            let rows = sweep::run(sc, &opts)?;
            (sweep::table(&rows, !sc.temperatures.is_empty()), Vec::new())
        }
    };
    Ok(Outcome { config: cfg.clone(), csv: table.to_bytes(&header(cfg)), summary, failures })
}

/// Runs a parsed command and writes its outputs.
pub fn run(cli: &Cli) -> Result<Outcome, CliError> {
    let (kind, cfg) = resolve(&cli.command)?;
    let common = cli.command.common();
    if common.threads == Some(0) {
        return Err(ConfigError { field: "threads".into(), message: "must be at least 1".into(), line: None }.into());
    }
    let outcome = execute(kind, &cfg, common.threads)?;
    match &common.out {
        Some(path) => {
            File::create(path)?.write_all(&outcome.csv)?;
            let mut out = io::stdout().lock();
            for l in &outcome.summary {
                writeln!(out, "{l}")?;
            }
        }
        None => {
            io::stdout().lock().write_all(&outcome.csv)?;
            let mut err = io::stderr().lock();
            for l in &outcome.summary {
                writeln!(err, "{l}")?;
            }
        }
    }
    if outcome.failures > 0 {
        return Err(CliError::Tolerance(format!("{} grid point(s) outside tolerance", outcome.failures)));
    }
    Ok(outcome)
}
