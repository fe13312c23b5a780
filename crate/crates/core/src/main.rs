use clap::Parser;
use std::path::PathBuf;
use std::process::ExitCode;

/// Run a skew-diffusion experiment described by a TOML config.
#[derive(Parser)]
#[command(name = "skewdiff", version)]
struct Args {
    /// Config file
    config: PathBuf,
    /// Worker threads, overriding the config's `threads` key
    #[arg(long)]
    threads: Option<usize>,
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            let code = if e.use_stderr() { skewdiff::cli::EXIT_CONFIG } else { skewdiff::cli::EXIT_OK };
            return ExitCode::from(code as u8);
        }
    };
    ExitCode::from(skewdiff::cli::main_with(&args.config, args.threads) as u8)
}
