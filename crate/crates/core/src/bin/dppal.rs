use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use dppal::cli::{self, RunConfig};
use dppal::dataset::SyntheticKind;

#[derive(Parser)]
#[command(name = "dppal", version, about = "Batch active learning with k-DPP query selection")]
struct Args {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment grid from a key = value config file.
    Run {
        config: PathBuf,
        /// Config overrides as --key=value, e.g. --kernel.kind=heat.
        #[arg(trailing_var_arg = true, allow_hyphen_values = true)]
        overrides: Vec<String>,
    },
    /// Turn curves.csv into per-dataset, per-metric plot data.
    Plot {
        curves: PathBuf,
        /// Output directory; defaults to the directory holding curves.csv.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Write a synthetic dataset to CSV.
    Gen {
        kind: SyntheticKind,
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn apply_overrides(cfg: &mut RunConfig, raw: &[String]) -> dppal::Result<()> {
    let mut it = raw.iter();
    while let Some(arg) = it.next() {
        let key = arg
            .strip_prefix("--")
            .ok_or_else(|| dppal::Error::Config(format!("expected --key=value, got {arg:?}")))?;
        match key.split_once('=') {
            Some((k, v)) => cfg.set(k, v)?,
            None => {
                let v = it
                    .next()
                    .ok_or_else(|| dppal::Error::Config(format!("--{key} needs a value")))?;
                cfg.set(key, v)?
            }
        }
    }
    Ok(())
}

fn real_main(args: Args) -> dppal::Result<()> {
    match args.command {
        Command::Run { config, overrides } => {
            let mut cfg = RunConfig::load(&config)?;
            apply_overrides(&mut cfg, &overrides)?;
            if let Some(n) = cli::workers_from_env()? {
                cfg.workers = Some(n);
            }
            let out = cli::run(&cfg)?;
            for f in out.files {
                println!("{}", f.display());
            }
        }
        Command::Plot { curves, out_dir } => {
            let dir = out_dir.unwrap_or_else(|| curves.parent().map(PathBuf::from).unwrap_or_default());
            for f in cli::plot_data(&curves, &dir)? {
                println!("{}", f.display());
            }
        }
        Command::Gen { kind, out, seed } => {
            println!("{}", cli::gen_csv(kind, seed, &out)?.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match real_main(Args::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("dppal: {e}");
            ExitCode::FAILURE
        }
    }
}
