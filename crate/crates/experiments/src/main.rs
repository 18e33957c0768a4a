use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use homspec::{execute, Command, ExperimentConfig};

#[derive(Parser)]
#[command(name = "homspec", version, about = "Homogenization rate experiments for periodic higher-order operators")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(clap::Args)]
struct Common {
    /// TOML experiment configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory for CSV tables and the JSON summary.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Worker threads; 0 uses the config value, then all cores.
    #[arg(long, default_value_t = 0)]
    threads: usize,
}

#[derive(Subcommand)]
enum Sub {
    /// Check the lattice, symbol, coefficient and truncation.
    Validate(Common),
    /// Solve the cell problem and report the effective matrix with its bounds.
    Cell(Common),
    /// Germ and first-order correction over a direction sample.
    Germ(Common),
    /// Sup-norm error ladders in eps.
    Rates(Common),
    /// Error exponents for a range of smoothing orders.
    Interp(Common),
    /// Threshold approximation slopes near the bottom of the spectrum.
    Threshold(Common),
    /// Exact and homogenized Cauchy problems.
    Evolve(Common),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, args) = match cli.command {
        Sub::Validate(a) => (Command::Validate, a),
        Sub::Cell(a) => (Command::Cell, a),
        Sub::Germ(a) => (Command::Germ, a),
        Sub::Rates(a) => (Command::Rates, a),
        Sub::Interp(a) => (Command::Interp, a),
        Sub::Threshold(a) => (Command::Threshold, a),
        Sub::Evolve(a) => (Command::Evolve, a),
    };
    let result = ExperimentConfig::from_path(&args.config).and_then(|cfg| execute(command, &cfg, args.threads, &args.out));
    match result {
        Ok((report, files)) => {
            for c in &report.checks {
                println!("{} {}: {}", if c.passed { "ok  " } else { "FAIL" }, c.name, c.detail);
            }
            for f in files {
                println!("wrote {}", f.display());
            }
            if report.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
