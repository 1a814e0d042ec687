use std::path::PathBuf;
use std::process::ExitCode;

use bfvar_cli::{run, CliError, Command, Overrides, RunConfig};
use clap::Parser;

#[derive(Debug, Parser)]
#[command(
    name = "bfvar",
    version,
    about = "Posterior model probabilities and Bayes factor variability"
)]
struct Args {
    command: Command,
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    replicates: Option<usize>,
    #[arg(long)]
    block_length: Option<usize>,
    /// Worker threads; overrides BFVAR_THREADS.
    #[arg(long)]
    threads: Option<usize>,
}

fn threads(flag: Option<usize>) -> Result<Option<usize>, CliError> {
    let n = match flag {
        Some(n) => Some(n),
        None => match std::env::var("BFVAR_THREADS") {
            Ok(v) => Some(
                v.trim()
                    .parse()
                    .map_err(|_| CliError::input(format!("BFVAR_THREADS: `{v}` is not a thread count")))?,
            ),
            Err(_) => None,
        },
    };
    if n == Some(0) {
        return Err(CliError::input("thread count must be at least 1"));
    }
    Ok(n)
}

fn execute(args: Args) -> Result<(), CliError> {
    let cfg = RunConfig::load(&args.config)?;
    let overrides = Overrides {
        seed: args.seed,
        out: args.out,
        replicates: args.replicates,
        block_length: args.block_length,
    };
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads(args.threads)? {
        pool = pool.num_threads(n);
    }
    let pool = pool
        .build()
        .map_err(|e| CliError::Numerical(format!("cannot start worker threads: {e}")))?;
    let written = pool.install(|| run(args.command, &cfg, &overrides))?;
    for path in written {
        println!("{}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match std::panic::catch_unwind(|| execute(args)) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(e)) => {
            eprintln!("bfvar: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
        Err(_) => {
            eprintln!("bfvar: internal error");
            ExitCode::from(1)
        }
    }
}
