mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{ConfigError, Profile};
use output::Format;

/// Two qubits dephasing through a gapped harmonic chain.
#[derive(Parser, Debug)]
#[command(version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Run configuration (TOML, or JSON with a `.json` extension).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory, created if missing.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,

    /// Default chain size and time span; overrides the config file.
    #[arg(long, global = true, value_enum)]
    profile: Option<Profile>,

    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[arg(long, global = true, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Density matrix and concurrence on the time grid.
    Evolve,
    /// Pauli expectations and connected correlators on the time grid.
    Correlations,
    /// Average concurrence over a two-parameter grid.
    Sweep,
    /// Entanglement generation time against distance.
    Tgen,
    /// Closed-form generation-time estimate against distance.
    Estimate,
    /// Compare the analytic propagator with the truncated Fock simulation.
    OracleCheck,
}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<ConfigError>().is_some() {
        return 2;
    }
    match err.downcast_ref::<dephasing::Error>() {
        Some(dephasing::Error::InvalidParameter(_)) => 2,
        Some(dephasing::Error::NotConverged { .. }) => 4,
        Some(dephasing::Error::Io(_)) | None => 1,
        Some(_) => 3,
    }
}

fn run(cli: &Cli) -> anyhow::Result<()> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(ConfigError("--threads must be at least 1".into()).into());
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    let Some(path) = &cli.config else {
        return Err(ConfigError("--config is required".into()).into());
    };
    let cfg = config::load(path)?.resolve(cli.profile)?;
    log::info!("{:?} with N = {}, t_end = {}", cli.command, cfg.params.n_sites, cfg.t_end);
    let tables = match cli.command {
        Command::Evolve => commands::evolve(&cfg)?,
        Command::Correlations => commands::correlations(&cfg)?,
        Command::Sweep => commands::sweep(&cfg)?,
        Command::Tgen => commands::tgen(&cfg)?,
        Command::Estimate => commands::estimate(&cfg)?,
        Command::OracleCheck => commands::oracle_check(&cfg)?,
    };
    std::fs::create_dir_all(&cli.out)?;
    for t in &tables {
        for p in t.write(&cli.out, cli.format)? {
            log::info!("wrote {}", p.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let mut logger = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"));
    if std::env::var_os("NO_COLOR").is_some_and(|v| !v.is_empty()) {
        logger.write_style(env_logger::WriteStyle::Never);
    }
    logger.init();

    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
