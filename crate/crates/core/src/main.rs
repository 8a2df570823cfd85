use clap::Parser;
use std::path::PathBuf;
use std::process::ExitCode;

use fracheat::harness::{error_record, run, ExperimentConfig, Kind};
use fracheat::Error;

/// Seeded experiments on fractional noise and the rough heat equation.
#[derive(Parser, Debug)]
#[command(name = "fracheat", version)]
struct Cli {
    /// Experiment kind; must match `kind` in the config file.
    #[arg(value_enum)]
    kind: Kind,
    #[arg(long)]
    config: PathBuf,
    /// Overrides the configured seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (default: `out` from the config, else `out/<kind>`).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, env = "FRACHEAT_THREADS")]
    threads: Option<usize>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", error_record(&e));
            ExitCode::FAILURE
        }
    }
}

fn execute(cli: Cli) -> Result<(), Error> {
    let mut cfg = ExperimentConfig::load(&cli.config)?;
    if cfg.kind != cli.kind {
        return Err(Error::Config(format!("config is for kind {}, not {}", cfg.kind.name(), cli.kind.name())));
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    let out = cli.out.or_else(|| cfg.out.clone()).unwrap_or_else(|| PathBuf::from("out").join(cfg.kind.name()));
    cfg.out = Some(out.clone());
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Config(e.to_string()))?;
    }
    let report = run(&cfg, &out)?;
    for f in &report.files {
        println!("{}", f.display());
    }
    Ok(())
}
