use std::process::ExitCode;

use clap::Parser;
use thinout_core::bench::{self, run_table, Suite};
use thinout_core::Algorithm;

/// Tolerance sweep over a synthetic dataset.
#[derive(Parser, Debug)]
#[command(name = "thin-bench", version)]
struct Args {
    /// circle or clouds.
    #[arg(long, default_value = "circle")]
    suite: Suite,
    #[arg(long, value_delimiter = ',')]
    eps: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', default_value = "aa,da")]
    algos: Vec<Algorithm>,
    /// Generator seed; THIN_SEED overrides it.
    #[arg(long)]
    seed: Option<u64>,
    /// Print only the CSV report.
    #[arg(long)]
    csv: bool,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let seed = match bench::seed_from_env(args.seed.unwrap_or(args.suite.default_seed())) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("thin-bench: {e}");
            return ExitCode::from(1);
        }
    };
    let eps = args.eps.unwrap_or_else(|| match args.suite {
        Suite::Circle => bench::DEFAULT_EPS.to_vec(),
        Suite::Clouds => vec![bench::CLOUDS_EPS],
    });
    let points = args.suite.points(seed);
    let mut table = match run_table(&points, &eps, &args.algos, seed) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("thin-bench: {e}");
            return ExitCode::from(if e.is_internal() { 2 } else { 1 });
        }
    };
    table.label = match args.suite {
        Suite::Circle => format!(
            "circle, {} points, seed {seed} (uniform radial jitter stand-in)",
            points.len()
        ),
        Suite::Clouds => format!("clouds, {} points, seed {seed}", points.len()),
    };
    match table.to_csv() {
        Ok(csv) if args.csv => print!("{csv}"),
        Ok(csv) => print!("{}\n{csv}", table.to_text()),
        Err(e) => {
            eprintln!("thin-bench: {e}");
            return ExitCode::from(2);
        }
    }
    ExitCode::SUCCESS
}
