mod config;
mod run;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use idealsum::corpus;

use crate::config::{AnalysisConfig, Mode};

const ERROR_EXIT: u8 = 3;

#[derive(Parser)]
#[command(name = "idealsum", version, about = "Summability and ideal-convergence checks on sequence prefixes")]
#[command(args_conflicts_with_subcommands = true)]
struct Cli {
    #[command(subcommand)]
    command: Option<Command>,
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Subcommand)]
enum Command {
    /// Analyse a sequence file under a JSON config (exit 0 holds, 1 fails, 2 inconclusive).
    Run(RunArgs),
    /// Write the first N terms of a named sequence, one per line.
    Generate {
        /// squares, periodic2, alternating, harmonic_drift, tauberian_ok, tauberian_violator,
        /// density_half, random_bounded (a seed may be given as name(seed))
        name: String,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Args, Default)]
struct RunArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    input: Option<PathBuf>,
    /// Report path; stdout when absent.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Also write the diagnostic series next to the report as CSV.
    #[arg(long)]
    csv: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long = "scale-N")]
    scale_n: Option<usize>,
    #[arg(long)]
    imax: Option<usize>,
}

/// Writes through a temporary file in the target directory and renames it into place.
fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).with_context(|| format!("cannot write in {}", dir.display()))?;
    tmp.write_all(bytes)?;
    tmp.persist(path).with_context(|| format!("cannot create {}", path.display()))?;
    Ok(())
}

fn run(args: RunArgs) -> Result<u8> {
    let (Some(cfg_path), Some(input_path)) = (args.config.as_ref(), args.input.as_ref()) else {
        bail!("run needs --config and --input");
    };
    if args.csv && args.output.is_none() {
        bail!("--csv needs --output");
    }
    let text = std::fs::read_to_string(cfg_path).with_context(|| format!("cannot read config {}", cfg_path.display()))?;
    let cfg = AnalysisConfig::parse(&text)?;
    let data = std::fs::read_to_string(input_path).with_context(|| format!("cannot read input {}", input_path.display()))?;
    let input = run::parse_input(&data, cfg.mode == Mode::Simons)?;
    let dir = cfg_path.parent().unwrap_or(Path::new("."));
    let report = run::run(&cfg, &input, input_path, dir, args.scale_n, args.imax, args.seed)?;
    let mut json = serde_json::to_string_pretty(&report)?;
    json.push('\n');
    match &args.output {
        Some(out) => {
            write_atomic(out, json.as_bytes())?;
            if args.csv {
                write_atomic(&out.with_extension("csv"), run::series_csv(&report)?.as_bytes())?;
            }
        }
        None => print!("{json}"),
    }
    Ok(report.exit_code as u8)
}

fn generate(name: &str, n: usize, seed: Option<u64>, output: Option<PathBuf>) -> Result<u8> {
    let (base, inline) = corpus::parse_name(name)?;
    let seed = seed.or(inline).unwrap_or(0);
    let s = corpus::generate::<f64>(&base, n, seed)?;
    let mut text = String::with_capacity(n * 8);
    for v in s.values() {
        text.push_str(&v.to_string());
        text.push('\n');
    }
    match output {
        Some(p) => write_atomic(&p, text.as_bytes())?,
        None => print!("{text}"),
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Some(Command::Run(args)) => run(args),
        Some(Command::Generate { name, n, seed, output }) => generate(&name, n, seed, output),
        None => run(cli.run),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(ERROR_EXIT)
        }
    }
}
