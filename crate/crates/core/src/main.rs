//! `qbe` command-line entry point.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use log::info;

use qbe_core::config::SimConfig;
use qbe_core::run::{figures, simulate, sweep};
use qbe_core::validation::{run_suite, Suite};
use qbe_core::{QbeError, Result};

#[derive(Parser)]
#[command(name = "qbe", version, about = "Electron-phonon phase-space transport simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one configuration and write forces, currents, potentials and metadata.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Override the base temperature in kelvin.
        #[arg(long)]
        t0: Option<f64>,
        /// Override the perturbative order (1 or 2).
        #[arg(long)]
        order: Option<usize>,
        /// Output directory; defaults to `output.dir` from the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the configuration at several base temperatures.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "100,200,300")]
        t0: Vec<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run built-in validation suites.
    Validate {
        #[arg(long, default_value = "all")]
        suite: Suite,
        /// Configuration to validate against; defaults to the reference set.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Emit the four figure-ready CSVs.
    Figures {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

enum Outcome {
    Done,
    ChecksFailed,
}

fn init_threads() -> Result<()> {
    let n = match std::env::var("QBE_THREADS") {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .map_err(|_| QbeError::config("QBE_THREADS", format!("expected a non-negative integer, got `{v}`")))?,
        Err(_) => 0,
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| QbeError::config("QBE_THREADS", e.to_string()))
}

fn out_dir(cfg: &SimConfig, out: Option<PathBuf>) -> PathBuf {
    out.unwrap_or_else(|| cfg.output.dir.clone())
}

fn load(path: &Path) -> Result<SimConfig> {
    info!("loading {}", path.display());
    SimConfig::load(path)
}

fn execute(command: Command) -> Result<Outcome> {
    match command {
        Command::Simulate { config, t0, order, out } => {
            let mut cfg = load(&config)?;
            if let Some(t0) = t0 {
                cfg.thermal.t0_kelvin = t0;
            }
            if let Some(order) = order {
                cfg.solver.order = order;
            }
            cfg.validate()?;
            let dir = out_dir(&cfg, out);
            let run = simulate(&cfg)?;
            run.write(&dir)?;
            info!("wrote {}", dir.display());
        }
        Command::Sweep { config, t0, out } => {
            let cfg = load(&config)?;
            let dir = out_dir(&cfg, out);
            for (path, _) in sweep(&cfg, &t0, &dir)? {
                info!("wrote {}", path.display());
            }
        }
        Command::Validate { suite, config } => {
            let cfg = match config {
                Some(p) => load(&p)?,
                None => SimConfig::reference(),
            };
            let checks = run_suite(suite, &cfg)?;
            let mut ok = true;
            for c in &checks {
                println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
                ok &= c.passed;
            }
            if !ok {
                return Ok(Outcome::ChecksFailed);
            }
        }
        Command::Figures { config, out } => {
            let cfg = load(&config)?;
            figures(&cfg, &out)?;
            info!("wrote figure tables to {}", out.display());
        }
    }
    Ok(Outcome::Done)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let result = init_threads().and_then(|_| execute(cli.command));
    match result {
        Ok(Outcome::Done) => ExitCode::SUCCESS,
        Ok(Outcome::ChecksFailed) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_configuration() { 2 } else { 1 })
        }
    }
}
