use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use lilfields::{run, ExperimentConfig, ExperimentTag, Pool, RunError};
use lilfields_core::{Executor, Serial};

/// Simulation and numerical checks of LIL-normalized maximal inequalities
/// for stationary random fields.
#[derive(Parser, Debug)]
#[command(name = "lilfields", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Debug)]
struct Common {
    /// JSON experiment configuration.
    #[arg(long)]
    config: PathBuf,
    /// Overrides the configuration's seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output file; standard output when absent and the config names none.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Run every replication on the calling thread.
    #[arg(long)]
    strict_serial: bool,
    /// Worker threads (0 = one per core).
    #[arg(long, env = "LILFIELDS_THREADS", default_value_t = 0)]
    threads: usize,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Lp norms of maximal functions (full, dyadic, saturation, set sequences).
    Maxnorm(Common),
    /// Constant-free bound series for a model.
    Bound(Common),
    /// Empirical maximal norms next to the bound series.
    Compare(Common),
    /// Monte Carlo checks of the deviation and maximal ergodic inequalities.
    Verify(Common),
    /// Luxemburg norms of samples or innovation laws.
    Orlicz(Common),
    /// Hermite coefficients and series constants.
    Hermite(Common),
    /// Residue partitions and growth certificates.
    Sets(Common),
    /// One realization of a model on a block.
    Simulate(Common),
    /// Run whatever experiment the configuration names.
    Run(Common),
}

impl Command {
    fn split(self) -> (Option<ExperimentTag>, Common) {
        use Command::*;
        match self {
            Maxnorm(c) => (Some(ExperimentTag::Maxnorm), c),
            Bound(c) => (Some(ExperimentTag::Bound), c),
            Compare(c) => (Some(ExperimentTag::Compare), c),
            Verify(c) => (Some(ExperimentTag::Verify), c),
            Orlicz(c) => (Some(ExperimentTag::Orlicz), c),
            Hermite(c) => (Some(ExperimentTag::Hermite), c),
            Sets(c) => (Some(ExperimentTag::Sets), c),
            Simulate(c) => (Some(ExperimentTag::Simulate), c),
            Run(c) => (None, c),
        }
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), RunError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| RunError::Io(format!("{}: {e}", dir.display())))?;
    }
    std::fs::write(path, bytes).map_err(|e| RunError::Io(format!("{}: {e}", path.display())))
}

fn execute(expected: Option<ExperimentTag>, c: Common) -> Result<bool, RunError> {
    let text = std::fs::read_to_string(&c.config)
        .map_err(|e| RunError::Io(format!("cannot read {}: {e}", c.config.display())))?;
    let base = c.config.parent().map(Path::to_path_buf).unwrap_or_default();
    let mut cfg = ExperimentConfig::from_json(&text, c.seed, &base)?;
    if let Some(tag) = expected {
        if tag != cfg.experiment {
            return Err(RunError::Usage(format!(
                "subcommand `{}` given a `{}` configuration",
                tag.name(),
                cfg.experiment.name()
            )));
        }
    }
    if c.out.is_some() {
        cfg.out = c.out;
    }
    let pool;
    let exec: &dyn Executor = if c.strict_serial {
        &Serial
    } else {
        pool = Pool::new(c.threads).map_err(|e| RunError::Usage(format!("thread pool: {e}")))?;
        &pool
    };
    let art = run(&cfg, exec)?;
    match &cfg.out {
        Some(path) => write_file(path, &art.bytes)?,
        None => std::io::stdout().write_all(&art.bytes).map_err(|e| RunError::Io(e.to_string()))?,
    }
    for (path, bytes) in &art.extra {
        write_file(path, bytes)?;
    }
    Ok(!art.checks_failed)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 64 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let (tag, common) = cli.command.split();
    match execute(tag, common) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("lilfields: some checks did not pass");
            ExitCode::from(3)
        }
        Err(e) => {
            eprintln!("lilfields: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
