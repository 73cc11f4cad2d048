//! Command-line front end for `qnl-core`.

pub mod commands;
pub mod config;
pub mod error;
pub mod format;
pub mod presets;

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::commands::{CheckReport, Outcome};
use crate::config::{KernelName, RunConfig, SchemeName};
use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "qnl", version, about = "Quasinonlocal coupling of local and nonlocal diffusion in 1-D")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// TOML run configuration.
    #[arg(long, global = true, value_name = "PATH", conflicts_with = "preset")]
    pub config: Option<PathBuf>,

    /// Built-in configuration (see `qnl presets`).
    #[arg(long, global = true, value_name = "NAME")]
    pub preset: Option<String>,

    /// Output directory [default: output.dir from the config, else ./out].
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,

    /// Evaluate the configured tolerances, write check.json and exit 3 on failure.
    #[arg(long, global = true)]
    pub check: bool,

    #[arg(long, global = true, value_name = "U64")]
    pub seed: Option<u64>,

    #[arg(long, global = true, value_enum)]
    pub scheme: Option<SchemeName>,

    #[arg(long, global = true, value_enum)]
    pub kernel: Option<KernelName>,

    /// Horizon in cells, `r = δ/h`; replaces any configured `delta`.
    #[arg(long, global = true, value_name = "R")]
    pub ratio: Option<usize>,

    /// Comma-separated mesh levels `N` (`h = (x_right − x_left)/(2N)`).
    #[arg(long = "N", global = true, value_name = "LIST", value_delimiter = ',')]
    pub n: Option<Vec<usize>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Solve once on the first mesh level.
    Solve,
    /// Refinement study at fixed `δ/h`.
    Convergence,
    /// Residual of a linear function on every configured arrangement, kernel and ratio.
    PatchTest,
    /// Symmetry, definiteness, maximum principle and inverse positivity.
    Properties,
    /// Compatible versus direct transitional rows.
    CompareDirect,
    /// Boundary layer next to a volumetric constraint, with and without local buffers.
    BoundaryLayer,
    /// Forcing with an integrable singularity.
    Singular,
    /// Tabulate ω, ω′ and the effective diffusion coefficient.
    Weights,
    /// Assemble the operator and describe its rows.
    Assemble {
        /// Also write the dense matrix and its row labels.
        #[arg(long)]
        dump: bool,
    },
    /// List the built-in presets.
    Presets,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Solve => "solve",
            Command::Convergence => "convergence",
            Command::PatchTest => "patch-test",
            Command::Properties => "properties",
            Command::CompareDirect => "compare-direct",
            Command::BoundaryLayer => "boundary-layer",
            Command::Singular => "singular",
            Command::Weights => "weights",
            Command::Assemble { .. } => "assemble",
            Command::Presets => "presets",
        }
    }
}

fn load_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut cfg = match (&cli.config, &cli.preset) {
        (Some(path), _) => {
            let text = fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
            toml::from_str(&text).map_err(|e| CliError::Config(format!("invalid config {}: {e}", path.display())))?
        }
        (None, Some(name)) => {
            let text = presets::lookup(name).ok_or_else(|| {
                CliError::Config(format!("unknown preset '{name}' (available: {})", presets::names().join(", ")))
            })?;
            toml::from_str(text).map_err(|e| CliError::Config(format!("invalid preset {name}: {e}")))?
        }
        (None, None) => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(scheme) = cli.scheme {
        cfg.scheme = scheme;
    }
    if let Some(kernel) = cli.kernel {
        cfg.kernel.kind = kernel;
    }
    if let Some(r) = cli.ratio {
        cfg.kernel.ratio = Some(r);
        cfg.kernel.delta = None;
    }
    if let Some(n) = &cli.n {
        cfg.mesh.n = n.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn execute(command: Command, cfg: &RunConfig) -> Result<Outcome, CliError> {
    match command {
        Command::Solve => commands::solve(cfg),
        Command::Convergence => commands::convergence(cfg),
        Command::PatchTest => commands::patch(cfg),
        Command::Properties => commands::properties(cfg),
        Command::CompareDirect => commands::compare_direct(cfg),
        Command::BoundaryLayer => commands::boundary_layer(cfg),
        Command::Singular => commands::singular(cfg),
        Command::Weights => commands::weights(cfg),
        Command::Assemble { dump } => commands::assemble_cmd(cfg, dump),
        Command::Presets => Ok(Outcome { summary: presets::names().join("\n") + "\n", ..Outcome::default() }),
    }
}

fn write_files(dir: &Path, files: &[(String, String)]) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::Io(format!("cannot write to {}: {e}", dir.display()));
    fs::create_dir_all(dir).map_err(io)?;
    for (name, content) in files {
        fs::write(dir.join(name), content).map_err(io)?;
    }
    Ok(())
}

/// Everything is computed before the output directory is touched, so a failed
/// run leaves no files behind.
fn run_cli(cli: &Cli) -> Result<i32, CliError> {
    if cli.command == Command::Presets {
        print!("{}", execute(cli.command, &RunConfig::default())?.summary);
        return Ok(0);
    }
    let cfg = load_config(cli)?;
    let mut outcome = execute(cli.command, &cfg)?;
    let mut code = 0;
    if cli.check {
        let pass = outcome.checks.iter().all(|c| c.pass);
        let report = CheckReport { command: cli.command.name(), pass, checks: &outcome.checks, advisory: &outcome.advisory };
        outcome.files.push(("check.json".into(), format::json(&report)));
        if !pass {
            code = 3;
        }
    }
    outcome.files.push(("config.toml".into(), cfg.to_toml()));
    let dir = cli.out.clone().or_else(|| cfg.output.dir.as_ref().map(PathBuf::from)).unwrap_or_else(|| PathBuf::from("out"));
    write_files(&dir, &outcome.files)?;
    print!("{}", outcome.summary);
    if cli.check {
        for c in &outcome.checks {
            if !c.pass {
                eprintln!("check failed: {} = {} (threshold {})", c.check, format::sci(c.value), format::sci(c.threshold));
            }
        }
    }
    Ok(code)
}

/// Parses `args` (including the program name) and runs; returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match run_cli(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
