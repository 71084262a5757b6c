//! Command-line front end: parse a JSON run configuration, execute it, print
//! one line per assertion, and exit 0 iff every assertion passed (2 on a
//! schema violation, 1 otherwise).

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use csgs::error::Error;
use csgs::runner::{run, RunConfig};

#[derive(Parser)]
#[command(name = "csgs", version, about = "Ground states of the 2D average-field-Pauli energy")]
struct Args {
    /// JSON run configuration (documented in the repository README).
    #[arg(long)]
    config: PathBuf,
    /// Worker threads for sweeps (default: machine parallelism).
    #[arg(long)]
    threads: Option<usize>,
    /// Override the configured output directory.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Dump final fields alongside the tables.
    #[arg(long)]
    emit_fields: bool,
    /// Use the pi^2 R^2 mollifier normalization instead of the unit-mass one.
    #[arg(long)]
    compat_pi2: bool,
}

fn main() -> ExitCode {
    let args = Args::parse();
    if let Some(threads) = args.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            eprintln!("csgs: failed to size the worker pool: {e}");
            return ExitCode::from(1);
        }
    }

    let mut config = match RunConfig::from_path(&args.config) {
        Ok(c) => c,
        Err(e @ Error::Schema { .. }) => {
            eprintln!("csgs: {e}");
            return ExitCode::from(2);
        }
        Err(e) => {
            eprintln!("csgs: {e}");
            return ExitCode::from(1);
        }
    };
    if let Some(output) = args.output {
        config.output_dir = output;
    }
    config.emit_fields |= args.emit_fields;
    config.compat_pi2 |= args.compat_pi2;

    match run(&config) {
        Ok(manifest) => {
            for a in &manifest.assertions {
                let tag = if a.passed { "PASS" } else { "FAIL" };
                println!("{tag} {} = {:.6e} (bounds [{:.3e}, {:.3e}]) -- {}",
                    a.name, a.value, a.lo, a.hi, a.detail);
            }
            println!(
                "manifest: {}",
                config.output_dir.join("manifest.json").display()
            );
            if manifest.all_passed() {
                ExitCode::SUCCESS
            } else {
                eprintln!("csgs: one or more assertions failed");
                ExitCode::from(1)
            }
        }
        Err(e @ Error::Schema { .. }) => {
            eprintln!("csgs: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("csgs: {e}");
            ExitCode::from(1)
        }
    }
}
