use christoffel_cli::{cmd_check, cmd_nirenberg, cmd_reconstruct, cmd_solve, cmd_verify, RunConfig, RunOptions};
use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

/// Exit status: 0 certified, 2 solved but not certified, 1 failure.
/// Thread count follows RAYON_NUM_THREADS.
#[derive(Parser)]
#[command(name = "christoffel", version, about = "Christoffel problem in hyperbolic space")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check admissibility of f
    Check(Common),
    /// Solve and verify
    Solve(Common),
    /// Embed a solution and export the mesh
    Reconstruct(Common),
    /// Solve and transform to the scalar curvature equation
    Nirenberg(Common),
    /// Verify an existing solution
    Verify(Common),
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    /// Output directory, overriding the config
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    resolution: Option<usize>,
    /// Solve even if the semi-definiteness condition fails
    #[arg(long)]
    force: bool,
    #[arg(long)]
    seed: Option<u64>,
    /// Solution CSV for reconstruct and verify
    #[arg(long)]
    solution: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (name, common, run): (_, _, fn(&RunConfig, &RunOptions) -> _) = match cli.command {
        Command::Check(c) => ("check", c, cmd_check),
        Command::Solve(c) => ("solve", c, cmd_solve),
        Command::Reconstruct(c) => ("reconstruct", c, cmd_reconstruct),
        Command::Nirenberg(c) => ("nirenberg", c, cmd_nirenberg),
        Command::Verify(c) => ("verify", c, cmd_verify),
    };
    let mut cfg = match RunConfig::from_path(&common.config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    if let Some(out) = common.out {
        cfg.output = std::env::current_dir().map(|d| d.join(&out)).unwrap_or(out);
    }
    if let Some(l) = common.resolution {
        cfg.resolution = l;
    }
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    let opts = RunOptions { force: common.force, solution: common.solution };
    match run(&cfg, &opts) {
        Ok(report) => {
            for note in &report.notes {
                eprintln!("note: {note}");
            }
            eprintln!("{name}: {:?}, report in {}", report.status, cfg.output_dir().display());
            ExitCode::from(report.status.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
