mod commands;
mod error;
mod output;
mod report;

use clap::Parser;

use crate::commands::{execute, Command};

/// Remote two-qubit state creation through boundary-tuned XY spin chains.
#[derive(Parser, Debug)]
#[command(name = "chainstate", version, about)]
struct Cli {
    /// Worker threads; defaults to the number of cores.
    #[arg(long, global = true, env = "CHAINSTATE_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

fn main() {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("configuration error: {e}");
            std::process::exit(2);
        }
    }
    if let Err(e) = execute(&cli.command) {
        eprintln!("chainstate: {e}");
        std::process::exit(e.exit_code());
    }
}
