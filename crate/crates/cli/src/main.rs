use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use worstcase_cli::{list_components, run_manifest, Overrides};

/// Run a conversion experiment described by a TOML manifest.
#[derive(Debug, Parser)]
#[command(name = "worstcase", version)]
struct Args {
    /// Experiment manifest.
    #[arg(required_unless_present = "list")]
    manifest: Option<PathBuf>,

    /// Output directory, replacing `[output] dir`.
    #[arg(long)]
    out: Option<PathBuf>,

    /// Trial count, replacing `trials`.
    #[arg(long)]
    trials: Option<usize>,

    /// Seed, replacing `seed`.
    #[arg(long)]
    seed: Option<u64>,

    /// Print progress to stderr.
    #[arg(short, long, action = clap::ArgAction::Count)]
    verbose: u8,

    /// Print the available schemes, families, networks and converters.
    #[arg(long)]
    list: bool,
}

fn main() -> ExitCode {
    let args = Args::parse();
    if args.list {
        for line in list_components().lines() {
            println!("{line}");
        }
        return ExitCode::SUCCESS;
    }
    let Some(path) = args.manifest else {
        return ExitCode::FAILURE;
    };
    let overrides = Overrides {
        out_dir: args.out,
        trials: args.trials,
        seed: args.seed,
    };
    match run_manifest(&path, &overrides, args.verbose > 0) {
        Ok((bundle, written)) => {
            if args.verbose > 0 {
                eprintln!("finished in {:.1} s", bundle.wall_clock_seconds);
            }
            println!("{}", written.csv.display());
            println!("{}", written.json.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
