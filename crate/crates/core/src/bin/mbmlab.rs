use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, ValueEnum};
use mbmlab::experiment::{load_config, run, Subcommand};

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Command {
    PsiTable,
    Synthesize,
    Residual,
    EstimateHolder,
    Tangent,
    Diagnostics,
    Region,
    Exponent,
    Validate,
}

impl From<Command> for Subcommand {
    fn from(c: Command) -> Self {
        match c {
            Command::PsiTable => Subcommand::PsiTable,
            Command::Synthesize => Subcommand::Synthesize,
            Command::Residual => Subcommand::Residual,
            Command::EstimateHolder => Subcommand::EstimateHolder,
            Command::Tangent => Subcommand::Tangent,
            Command::Diagnostics => Subcommand::Diagnostics,
            Command::Region => Subcommand::Region,
            Command::Exponent => Subcommand::Exponent,
            Command::Validate => Subcommand::Validate,
        }
    }
}

/// Wavelet synthesis of multifractional Brownian motion and its dyadic variant.
#[derive(Debug, Parser)]
#[command(version)]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// Flat `key = value` configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Overrides the `seed` key.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the `out_dir` key.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    match real_main() {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn real_main() -> anyhow::Result<bool> {
    let cli = Cli::parse();
    let mut config = load_config(&cli.config).with_context(|| format!("reading {}", cli.config.display()))?;
    if let Some(seed) = cli.seed {
        config.set_seed(seed);
    }
    if let Some(out) = cli.out {
        config.set_out_dir(out);
    }
    let cmd = Subcommand::from(cli.command);
    let outcome = run(cmd, &config).with_context(|| format!("{cmd} failed"))?;
    for f in &outcome.files {
        eprintln!("wrote {}", f.display());
    }
    Ok(outcome.passed)
}
