//! Loading point files, running a thinning strategy and writing the result.
//!
//! The composite strategies `grid+aa` and `grid+da` first collapse the input
//! onto grid representatives and then thin those representatives, each with
//! weight one. Their output subsets are reported in terms of the original
//! point indices, while the representatives are the second stage's centroids.

use std::fmt;
use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::agglomerative::{aa_run_with, AaOptions, AaTrace};
use crate::divisive::{da_run_with, DaTrace};
use crate::error::{Result, ThinError};
use crate::geometry::{
    collapsable_unchecked, NormMode, Partition, Point, PointSet, ThinningResult, Tolerance,
};
use crate::grid::{grid_partition, DEFAULT_RADIUS, PREFILTER_RADIUS_AA, PREFILTER_RADIUS_DA};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Algorithm {
    #[serde(rename = "aa")]
    Aa,
    #[serde(rename = "da")]
    Da,
    #[serde(rename = "grid")]
    Grid,
    #[serde(rename = "grid+aa")]
    GridAa,
    #[serde(rename = "grid+da")]
    GridDa,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] = [
        Algorithm::Aa,
        Algorithm::Da,
        Algorithm::Grid,
        Algorithm::GridAa,
        Algorithm::GridDa,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Aa => "aa",
            Algorithm::Da => "da",
            Algorithm::Grid => "grid",
            Algorithm::GridAa => "grid+aa",
            Algorithm::GridDa => "grid+da",
        }
    }

    /// Grid radius used when none is given.
    pub fn default_radius(self) -> Option<f64> {
        match self {
            Algorithm::Aa | Algorithm::Da => None,
            Algorithm::Grid => Some(DEFAULT_RADIUS),
            Algorithm::GridAa => Some(PREFILTER_RADIUS_AA),
            Algorithm::GridDa => Some(PREFILTER_RADIUS_DA),
        }
    }

    fn uses_grid(self) -> bool {
        self.default_radius().is_some()
    }
}

impl FromStr for Algorithm {
    type Err = ThinError;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| ThinError::Config(format!("unknown algorithm '{s}'")))
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FileFormat {
    #[default]
    Csv,
    Json,
}

impl FileFormat {
    /// `.json` means JSON, anything else CSV.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("json") => FileFormat::Json,
            _ => FileFormat::Csv,
        }
    }
}

impl FromStr for FileFormat {
    type Err = ThinError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(FileFormat::Csv),
            "json" => Ok(FileFormat::Json),
            other => Err(ThinError::Config(format!("unknown format '{other}'"))),
        }
    }
}

/// Knobs shared by every strategy.
#[derive(Debug, Clone, Default)]
pub struct ThinOptions {
    /// Overrides the strategy's default grid radius.
    pub grid_radius: Option<f64>,
    pub norm_mode: NormMode,
    pub emit_trace: bool,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub algorithm: Algorithm,
    /// Per-coordinate tolerance; a single value is broadcast to every coordinate.
    pub tolerance: Vec<f64>,
    pub options: ThinOptions,
    pub input_path: PathBuf,
    /// Inferred from the input extension when `None`.
    pub input_format: Option<FileFormat>,
    /// `None` means standard output.
    pub output_path: Option<PathBuf>,
    pub output_format: FileFormat,
}

/// Expands a scalar tolerance to `dim` coordinates and validates it.
pub fn resolve_tolerance(values: &[f64], dim: usize) -> Result<Tolerance> {
    match values {
        [v] => Tolerance::uniform(*v, dim),
        _ if values.len() == dim => Tolerance::new(values.to_vec()),
        _ => Err(ThinError::DimensionMismatch {
            expected: dim,
            got: values.len(),
        }),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageStats {
    pub stage: String,
    pub input_size: usize,
    pub output_size: usize,
    #[serde(skip)]
    pub wall_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunStats {
    pub input_size: usize,
    pub subset_count: usize,
    pub stages: Vec<StageStats>,
    /// Kept out of the serialized form so identical runs write identical bytes.
    #[serde(skip)]
    pub wall_ms: f64,
}

/// Everything a run produces.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub algorithm: Algorithm,
    pub tolerance: Tolerance,
    pub norm_mode: NormMode,
    pub grid_radius: Option<f64>,
    /// Subsets over the original input indices.
    pub subsets: Vec<Vec<usize>>,
    pub representatives: Vec<Point>,
    /// Whether each subset is collapsable with respect to the original points.
    pub collapsable: Vec<bool>,
    pub stats: RunStats,
    /// Partitions of the final stage's input, one per iteration.
    pub trace: Option<Vec<Partition>>,
    /// The final stage's result over its own input.
    pub final_stage: ThinningResult,
}

/// On-disk JSON layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultDocument {
    pub tolerance: Vec<f64>,
    pub algorithm: Algorithm,
    pub norm_mode: NormMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_radius: Option<f64>,
    pub subsets: Vec<Vec<usize>>,
    pub representatives: Vec<Vec<f64>>,
    pub collapsable: Vec<bool>,
    pub stats: RunStats,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace: Option<Vec<Vec<Vec<usize>>>>,
}

impl RunOutput {
    pub fn document(&self) -> ResultDocument {
        ResultDocument {
            tolerance: self.tolerance.eps().to_vec(),
            algorithm: self.algorithm,
            norm_mode: self.norm_mode,
            grid_radius: self.grid_radius,
            subsets: self.subsets.clone(),
            representatives: self
                .representatives
                .iter()
                .map(|p| p.coords().to_vec())
                .collect(),
            collapsable: self.collapsable.clone(),
            stats: self.stats.clone(),
            trace: self
                .trace
                .as_ref()
                .map(|t| t.iter().map(|p| p.subsets().to_vec()).collect()),
        }
    }
}

/// Reads points from a file, preserving file order.
pub fn load_points(path: &Path, format: FileFormat) -> Result<Vec<Point>> {
    let mut text = String::new();
    fs::File::open(path)?.read_to_string(&mut text)?;
    match format {
        FileFormat::Csv => parse_csv(&text),
        FileFormat::Json => parse_json(&text),
    }
}

/// One point per line, comma-separated. Lines starting with `#` are skipped.
pub fn parse_csv(text: &str) -> Result<Vec<Point>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut points = Vec::new();
    let mut dim = None;
    for record in reader.records() {
        let record = record.map_err(|e| ThinError::Parse {
            line: e.position().map_or(0, |p| p.line()),
            msg: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let coords = record
            .iter()
            .map(|field| parse_coordinate(field, line))
            .collect::<Result<Vec<f64>>>()?;
        check_row(&coords, &mut dim, line)?;
        points.push(Point::new(coords));
    }
    if points.is_empty() {
        return Err(ThinError::EmptyInput);
    }
    Ok(points)
}

#[derive(Deserialize)]
#[serde(untagged)]
enum JsonPoints {
    Rows(Vec<Vec<f64>>),
    Wrapped { points: Vec<Vec<f64>> },
}

/// Either `[[x, y], ...]` or `{"points": [[x, y], ...]}`.
pub fn parse_json(text: &str) -> Result<Vec<Point>> {
    let rows = match serde_json::from_str::<JsonPoints>(text)? {
        JsonPoints::Rows(rows) | JsonPoints::Wrapped { points: rows } => rows,
    };
    let mut dim = None;
    let mut points = Vec::with_capacity(rows.len());
    for (i, row) in rows.into_iter().enumerate() {
        let line = i as u64 + 1;
        if let Some(bad) = row.iter().find(|c| !c.is_finite()) {
            return Err(ThinError::Parse {
                line,
                msg: format!("non-finite coordinate {bad}"),
            });
        }
        check_row(&row, &mut dim, line)?;
        points.push(Point::new(row));
    }
    if points.is_empty() {
        return Err(ThinError::EmptyInput);
    }
    Ok(points)
}

fn parse_coordinate(field: &str, line: u64) -> Result<f64> {
    let value: f64 = field.parse().map_err(|_| ThinError::Parse {
        line,
        msg: format!("cannot parse '{field}' as a number"),
    })?;
    if !value.is_finite() {
        return Err(ThinError::Parse {
            line,
            msg: format!("non-finite coordinate '{field}'"),
        });
    }
    Ok(value)
}

fn check_row(coords: &[f64], dim: &mut Option<usize>, line: u64) -> Result<()> {
    if coords.is_empty() {
        return Err(ThinError::Parse {
            line,
            msg: "empty row".into(),
        });
    }
    match *dim {
        None => *dim = Some(coords.len()),
        Some(d) if d != coords.len() => {
            return Err(ThinError::Parse {
                line,
                msg: format!("expected {d} coordinates, found {}", coords.len()),
            })
        }
        Some(_) => {}
    }
    Ok(())
}

fn elapsed_ms(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

fn single_stage(
    ps: &PointSet,
    algorithm: Algorithm,
    radius: Option<f64>,
    options: &ThinOptions,
) -> Result<(ThinningResult, Option<Vec<Partition>>)> {
    match algorithm {
        Algorithm::Aa => {
            let mut trace = AaTrace {
                partitions: vec![Partition::singletons(ps.len())],
            };
            let result = if options.emit_trace {
                aa_run_with(ps, AaOptions::default(), &mut trace)?
            } else {
                aa_run_with(ps, AaOptions::default(), &mut ())?
            };
            Ok((result, options.emit_trace.then_some(trace.partitions)))
        }
        Algorithm::Da => {
            let mut trace = DaTrace::default();
            let result = if options.emit_trace {
                da_run_with(ps, options.norm_mode, &mut trace)?
            } else {
                da_run_with(ps, options.norm_mode, &mut ())?
            };
            Ok((result, options.emit_trace.then_some(trace.partitions)))
        }
        Algorithm::Grid | Algorithm::GridAa | Algorithm::GridDa => {
            let result = grid_partition(ps, radius.unwrap_or(DEFAULT_RADIUS))?;
            let trace = options.emit_trace.then(|| vec![result.partition().clone()]);
            Ok((result, trace))
        }
    }
}

/// Runs `algorithm` on an in-memory point set.
pub fn thin(ps: &PointSet, algorithm: Algorithm, options: &ThinOptions) -> Result<RunOutput> {
    ps.require_non_empty()?;
    let start = Instant::now();
    let radius = if algorithm.uses_grid() {
        options.grid_radius.or(algorithm.default_radius())
    } else {
        None
    };
    let mut stages = Vec::new();

    let (subsets, final_stage, trace) = match algorithm {
        Algorithm::Aa | Algorithm::Da | Algorithm::Grid => {
            let t = Instant::now();
            let (result, trace) = single_stage(ps, algorithm, radius, options)?;
            stages.push(StageStats {
                stage: algorithm.name().to_string(),
                input_size: ps.len(),
                output_size: result.len(),
                wall_ms: elapsed_ms(t),
            });
            (result.subsets().to_vec(), result, trace)
        }
        Algorithm::GridAa | Algorithm::GridDa => {
            let t = Instant::now();
            let (cells, _) = single_stage(ps, Algorithm::Grid, radius, options)?;
            stages.push(StageStats {
                stage: "grid".to_string(),
                input_size: ps.len(),
                output_size: cells.len(),
                wall_ms: elapsed_ms(t),
            });

            let second = if algorithm == Algorithm::GridAa {
                Algorithm::Aa
            } else {
                Algorithm::Da
            };
            let reduced = PointSet::new(cells.representatives().to_vec(), ps.tolerance().clone())?;
            let t = Instant::now();
            let (result, trace) = single_stage(&reduced, second, None, options)?;
            stages.push(StageStats {
                stage: second.name().to_string(),
                input_size: reduced.len(),
                output_size: result.len(),
                wall_ms: elapsed_ms(t),
            });

            let composed = result
                .subsets()
                .iter()
                .map(|s| {
                    let mut members: Vec<usize> = s
                        .iter()
                        .flat_map(|&c| cells.subsets()[c].iter().copied())
                        .collect();
                    members.sort_unstable();
                    members
                })
                .collect();
            (composed, result, trace)
        }
    };

    let collapsable = subsets
        .iter()
        .map(|s| collapsable_unchecked(ps, s))
        .collect();
    let stats = RunStats {
        input_size: ps.len(),
        subset_count: subsets.len(),
        stages,
        wall_ms: elapsed_ms(start),
    };
    Ok(RunOutput {
        algorithm,
        tolerance: ps.tolerance().clone(),
        norm_mode: options.norm_mode,
        grid_radius: radius,
        representatives: final_stage.representatives().to_vec(),
        subsets,
        collapsable,
        stats,
        trace,
        final_stage,
    })
}

/// Loads the configured input, runs, and writes the configured output.
pub fn run(config: &RunConfig) -> Result<RunOutput> {
    let format = config
        .input_format
        .unwrap_or_else(|| FileFormat::from_path(&config.input_path));
    let points = load_points(&config.input_path, format)?;
    let tol = resolve_tolerance(&config.tolerance, points[0].dim())?;
    let ps = PointSet::new(points, tol)?;
    let output = thin(&ps, config.algorithm, &config.options)?;
    match &config.output_path {
        Some(path) => write_result(&output, path, config.output_format)?,
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            lock.write_all(render(&output, config.output_format)?.as_bytes())?;
        }
    }
    Ok(output)
}

/// Serialized bytes for `format`.
pub fn render(output: &RunOutput, format: FileFormat) -> Result<String> {
    if output.representatives.is_empty() {
        return Err(ThinError::ContractViolation(
            "result has no representatives".into(),
        ));
    }
    match format {
        FileFormat::Json => {
            let mut s = serde_json::to_string_pretty(&output.document())?;
            s.push('\n');
            Ok(s)
        }
        FileFormat::Csv => {
            let mut s = String::new();
            for p in &output.representatives {
                let row: Vec<String> = p.iter().map(|c| c.to_string()).collect();
                s.push_str(&row.join(","));
                s.push('\n');
            }
            Ok(s)
        }
    }
}

pub fn write_result(output: &RunOutput, path: &Path, format: FileFormat) -> Result<()> {
    fs::write(path, render(output, format)?)?;
    Ok(())
}

pub fn read_result(path: &Path) -> Result<ResultDocument> {
    Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
}

/// Short human-readable summary.
pub fn summary(output: &RunOutput) -> String {
    let mut s = format!(
        "{}: {} points -> {} representatives in {:.3} ms\n",
        output.algorithm, output.stats.input_size, output.stats.subset_count, output.stats.wall_ms
    );
    for stage in &output.stats.stages {
        s.push_str(&format!(
            "  {:<5} {:>8} -> {:<8} {:.3} ms\n",
            stage.stage, stage.input_size, stage.output_size, stage.wall_ms
        ));
    }
    let bad = output.collapsable.iter().filter(|c| !**c).count();
    if bad > 0 {
        s.push_str(&format!(
            "  {bad} subset(s) not collapsable with respect to the input points\n"
        ));
    }
    s
}

/// Representative coordinates with six significant digits.
pub fn format_point(p: &Point) -> String {
    let coords: Vec<String> = p.iter().map(|c| format!("{c:.6}")).collect();
    format!("({})", coords.join(", "))
}
