use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use defquant::error::{Error, Result};
use defquant::io::{
    cmd_quantize, cmd_twist_solve, cmd_verify, parse_spec, parse_twist_file, Options, ProblemSpec, Report, TwistChoice,
};

#[derive(Parser)]
#[command(name = "defquant", version, about = "Exact twists and star products from triangular r-matrices")]
struct Cli {
    /// Seed for sampled checks.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Ansatz degree per ħ-order, e.g. "1:2,2:4".
    #[arg(long, global = true)]
    schedule: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    spec: PathBuf,
    /// Use the twist in this file instead of the one named in the spec.
    #[arg(long)]
    twist: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the algebraic checks on a specification.
    Verify {
        #[command(flatten)]
        common: Common,
    },
    /// Tabulate the star product on monomials.
    Quantize {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        order: Option<usize>,
        #[arg(long, default_value_t = 3)]
        max_degree: usize,
        /// Write the report here as well as to stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve for a twist and certify it.
    TwistSolve {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        order: Option<usize>,
        /// Write the twist file here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Schema(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::Schema(format!("{}: {e}", path.display())))
}

fn load(common: &Common) -> Result<ProblemSpec> {
    let mut spec = parse_spec(&read(&common.spec)?)?;
    if let Some(path) = &common.twist {
        spec.twist = Some(TwistChoice::Imported {
            imported: parse_twist_file(&read(path)?)?,
        });
    }
    Ok(spec)
}

fn run(cli: Cli) -> Result<Report> {
    let mut opts = Options {
        seed: cli.seed,
        schedule: cli.schedule,
        ..Options::default()
    };
    match cli.command {
        Command::Verify { common } => cmd_verify(&load(&common)?, &opts),
        Command::Quantize {
            common,
            order,
            max_degree,
            out,
        } => {
            opts.order = order;
            opts.max_degree = max_degree;
            let report = cmd_quantize(&load(&common)?, &opts)?;
            if let Some(path) = out {
                write(&path, &report.to_json())?;
            }
            Ok(report)
        }
        Command::TwistSolve { common, order, out } => {
            opts.order = order;
            let report = cmd_twist_solve(&load(&common)?, &opts)?;
            if let (Some(path), Some(twist)) = (out, &report.twist) {
                let mut text = serde_json::to_string_pretty(twist).expect("twist serializes");
                text.push('\n');
                write(&path, &text)?;
            }
            Ok(report)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(report) => {
            print!("{}", report.to_json());
            ExitCode::from(report.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
