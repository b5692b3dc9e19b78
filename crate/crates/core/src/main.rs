use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};

use maghdg::driver::{format_table, run_checks, run_convergence, run_field_dump, CheckStatus, RunConfig};

#[derive(Parser)]
#[command(name = "maghdg", version, about = "HDG solver for magnetic advection-diffusion")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Convergence tables against the exact solution
    Convergence {
        /// JSON run configuration; defaults apply to missing keys
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Sample the discrete fields on a lattice and write CSV and VTK files
    Dump {
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Run the invariant suite on tiny meshes
    Check {
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn load(path: Option<PathBuf>) -> anyhow::Result<RunConfig> {
    match path {
        Some(p) => RunConfig::from_path(&p).with_context(|| format!("reading config {}", p.display())),
        None => Ok(RunConfig::default()),
    }
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    match cli.command {
        Command::Convergence { config } => {
            let cfg = load(config)?;
            for out in run_convergence(&cfg)? {
                println!("{}", format_table(&out.report));
                println!("wrote {} and {}", out.csv.display(), out.full_csv.display());
            }
            Ok(true)
        }
        Command::Dump { config } => {
            let cfg = load(config)?;
            for out in run_field_dump(&cfg)? {
                println!(
                    "eps={:e} n={}: max|u_h|={:.4} finite={} -> {}, {}",
                    out.epsilon,
                    out.n,
                    out.max_abs_u,
                    out.finite,
                    out.csv.display(),
                    out.vtk.display()
                );
            }
            Ok(true)
        }
        Command::Check { seed } => {
            let outcomes = run_checks(seed);
            for o in &outcomes {
                println!("{o}");
            }
            Ok(outcomes.iter().all(|o| o.status != CheckStatus::Fail))
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
