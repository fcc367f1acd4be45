use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use thinout_core::pipeline::{self, FileFormat, RunConfig, ThinOptions};
use thinout_core::{Algorithm, NormMode, ThinError};

/// Thin out a set of empirical points.
#[derive(Parser, Debug)]
#[command(name = "thin", version)]
struct Args {
    /// aa, da, grid, grid+aa or grid+da.
    #[arg(long, default_value = "aa")]
    algo: Algorithm,
    /// Tolerance, one value per coordinate or a single value for all.
    #[arg(
        long,
        value_delimiter = ',',
        required = true,
        allow_negative_numbers = true
    )]
    tol: Vec<f64>,
    #[arg(long)]
    grid_radius: Option<f64>,
    /// weighted or unweighted sum of squares for divisive redistribution.
    #[arg(long, default_value = "weighted")]
    norm_mode: NormMode,
    /// Print every intermediate partition to stderr and include it in the JSON.
    #[arg(long)]
    trace: bool,
    /// Input file; `.json` is read as JSON, anything else as CSV.
    #[arg(short, long)]
    input: PathBuf,
    /// Output file; standard output when omitted.
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Output format.
    #[arg(long, default_value = "json")]
    format: FileFormat,
    /// Input format, overriding the extension.
    #[arg(long)]
    input_format: Option<FileFormat>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let config = RunConfig {
        algorithm: args.algo,
        tolerance: args.tol,
        options: ThinOptions {
            grid_radius: args.grid_radius,
            norm_mode: args.norm_mode,
            emit_trace: args.trace,
        },
        input_path: args.input,
        input_format: args.input_format,
        output_path: args.output,
        output_format: args.format,
    };
    match pipeline::run(&config) {
        Ok(out) => {
            if let Some(trace) = &out.trace {
                for (i, part) in trace.iter().enumerate() {
                    eprintln!("step {i}: {:?}", part.subsets());
                }
            }
            eprint!("{}", pipeline::summary(&out));
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("thin: {e}");
            exit_code(&e)
        }
    }
}

fn exit_code(e: &ThinError) -> ExitCode {
    if e.is_internal() {
        ExitCode::from(2)
    } else {
        ExitCode::from(1)
    }
}
