use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use czframe_cli::{emit, exit, run_suite_with, CliError, SuiteConfig, Verdict};
use czframe_core::model_zoo;

/// Runs the czframe diagnostic suite described by a JSON config.
#[derive(Debug, Parser)]
#[command(name = "czframe", version)]
struct Args {
    /// Suite configuration (JSON). Defaults apply to omitted fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory; overrides `output_dir` in the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Random seed; overrides `seed` in the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Print the operator zoo and exit.
    #[arg(long)]
    list_operators: bool,
}

fn run(args: Args) -> Result<i32, CliError> {
    if args.list_operators {
        for m in model_zoo() {
            let c = m.kernel.constants();
            println!("{:<20} C_K = {:<8.4} delta = {}  {:?}", m.label, c.c_k, c.delta, m.compactness);
        }
        return Ok(exit::PASS);
    }
    let mut config = match &args.config {
        Some(p) => SuiteConfig::load(p)?,
        None => SuiteConfig::default(),
    };
    if let Some(s) = args.seed {
        config.seed = s;
    }
    let out = args
        .out
        .or_else(|| config.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("results"));
    config.validate()?;
    let report = run_suite_with(&config, |r, dt| {
        eprintln!("{:?} {} [{}] ({:.1}s)", r.verdict, r.diagnostic, r.subject, dt.as_secs_f64());
    })?;
    emit(&report, &out)?;
    println!("{}", czframe_cli::report::render_summary(&report));
    Ok(if report.verdict == Verdict::Pass { exit::PASS } else { exit::FAIL })
}

fn main() -> ExitCode {
    let args = Args::parse();
    let code = match run(args) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("czframe: {e}");
            if e.is_config() {
                exit::CONFIG
            } else {
                exit::FAIL
            }
        }
    };
    ExitCode::from(code as u8)
}
