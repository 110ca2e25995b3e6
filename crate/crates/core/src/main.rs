use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use zero_one::experiments::{
    cmd_exact, cmd_index, cmd_mixing, cmd_sample, cmd_sweep, index_text, ExperimentConfig,
    Overrides,
};
use zero_one::sentence::{parse_sentence, DEFAULT_ENUMERATION_CAP};
use zero_one::{Error, Lattice, Norm, Result};

#[derive(Parser)]
#[command(name = "zero-one", version, about = "Zero-one law experiments on lattice tori")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Experiment file (TOML).
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    /// Output file; standard output when neither this nor run.output is set.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    replicas: Option<usize>,
}

#[derive(Args)]
struct IndexArgs {
    /// Experiment file supplying the lattice and the sentence.
    #[arg(long, conflicts_with = "sentence")]
    config: Option<PathBuf>,
    /// Sentence file, read on the lattice given by --d, --norm, --rho.
    #[arg(long)]
    sentence: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    d: usize,
    #[arg(long, default_value = "1")]
    norm: Norm,
    #[arg(long, default_value_t = 1)]
    rho: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Print the index k(L) of each basic local sentence.
    Index(IndexArgs),
    /// Estimate a sentence's probability along a sequence of torus sizes.
    Sweep(Common),
    /// Exact sentence probabilities by enumeration on tiny tori.
    Exact(Common),
    /// Covariances of ball events against distance.
    Mixing(Common),
    /// Write sampled configurations as text dumps.
    Sample(Common),
}

fn load(common: &Common) -> Result<ExperimentConfig> {
    let mut config = ExperimentConfig::load(&common.config)?;
    config.apply(&Overrides {
        seed: common.seed,
        replicas: common.replicas,
        out: common.out.clone(),
    });
    Ok(config)
}

fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(Error::from),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Index(args) => {
            let text = match (&args.config, &args.sentence) {
                (Some(path), _) => cmd_index(&ExperimentConfig::load(path)?)?,
                (None, Some(path)) => {
                    let lattice = Lattice::new(args.d, args.norm, args.rho)?;
                    let body = std::fs::read_to_string(path)
                        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
                    index_text(&parse_sentence(&body, &lattice)?, &lattice, DEFAULT_ENUMERATION_CAP)?
                }
                (None, None) => return Err(Error::Config("index needs --config or --sentence".into())),
            };
            emit(&text, args.out.as_deref())
        }
        Command::Sweep(c) => {
            let config = load(&c)?;
            emit(&cmd_sweep(&config)?, config.output())
        }
        Command::Exact(c) => {
            let config = load(&c)?;
            emit(&cmd_exact(&config)?, config.output())
        }
        Command::Mixing(c) => {
            let config = load(&c)?;
            emit(&cmd_mixing(&config)?, config.output())
        }
        Command::Sample(c) => {
            let config = load(&c)?;
            emit(&cmd_sample(&config)?, config.output())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
