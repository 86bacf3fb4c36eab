use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use mdim_core::config::Config;
use mdim_core::error::Error;
use mdim_core::runner::{run, CONFIG_EXIT};

/// Runs one experiment from a config file and writes `<experiment>.csv` and `<experiment>.json`.
#[derive(Parser)]
#[command(name = "mdim", version)]
struct Args {
    #[arg(long)]
    config: PathBuf,
    /// overrides the seed in the config
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

fn fail(e: &Error) -> ExitCode {
    match e {
        Error::Config { field, line, msg } => {
            eprintln!("config error: field '{field}' (line {line}): {msg}");
        }
        other => eprintln!("error: {other}"),
    }
    ExitCode::from(CONFIG_EXIT as u8)
}

fn main() -> ExitCode {
    let args = Args::parse();
    let mut cfg = match Config::load(&args.config) {
        Ok(c) => c,
        Err(e) => return fail(&e),
    };
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(t) = args.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(CONFIG_EXIT as u8);
        }
    }
    let base = args.config.parent().map(PathBuf::from).unwrap_or_default();
    let out = match run(&cfg, &base) {
        Ok(o) => o,
        Err(e) => return fail(&e),
    };
    if let Err(e) = out.write(&args.out) {
        return fail(&e);
    }
    eprintln!("{}: {:?}", cfg.experiment.name(), out.status);
    ExitCode::from(out.status.exit_code() as u8)
}
