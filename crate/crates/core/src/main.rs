use clap::Parser;
use renormlab::cli::{run, Command};
use std::path::PathBuf;
use std::process::ExitCode;

/// Renormalization and rigidity experiments for circle maps with a break.
#[derive(Parser, Debug)]
#[command(name = "renormlab", version)]
struct Args {
    /// One of partition-stats, renorm-converge, rigidity, cohomology, zygmund-check, admissibility, pilot.
    command: Command,
    /// Experiment configuration (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; defaults to the config's output_dir, then the working directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Accept maps whose break sizes differ.
    #[arg(long)]
    override_break_mismatch: bool,
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) if !e.use_stderr() => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprint!("{e}");
            return ExitCode::from(2);
        }
    };
    let (code, _) = run(
        args.command,
        &args.config,
        args.out.as_deref(),
        args.override_break_mismatch,
    );
    ExitCode::from(code as u8)
}
