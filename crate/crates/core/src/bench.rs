//! Synthetic datasets and a timing table over a tolerance sweep.
//!
//! Random generation uses `ChaCha8Rng` seeded with `seed_from_u64`, so a seed
//! gives the same points on every platform.
//!
//! The circle generator is a stand-in: points are placed at uniform angles
//! with uniform radial jitter, which is a guess at how the original
//! measurements were perturbed.

use std::f64::consts::TAU;
use std::fmt::Write as _;
use std::str::FromStr;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, ThinError};
use crate::geometry::{Point, PointSet, Tolerance};
use crate::pipeline::{thin, Algorithm, ThinOptions};

pub const CIRCLE_RADIUS: f64 = 200.0;
pub const CIRCLE_COUNT: usize = 2504;
pub const DEFAULT_JITTER: f64 = 2.0;
pub const DEFAULT_SEED: u64 = 1;
pub const CLOUDS_SEED: u64 = 7;
pub const DEFAULT_EPS: [f64; 7] = [1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0];
pub const CLOUDS_EPS: f64 = 20.0;
/// Variable overriding the seed passed on the command line.
pub const SEED_ENV: &str = "THIN_SEED";

/// Points near a circle in the plane.
#[derive(Debug, Clone, PartialEq)]
pub struct CircleSpec {
    pub count: usize,
    pub radius: f64,
    pub center: Point,
    /// Half-width of the uniform radial perturbation.
    pub jitter: f64,
    pub seed: u64,
}

impl Default for CircleSpec {
    fn default() -> Self {
        CircleSpec {
            count: CIRCLE_COUNT,
            radius: CIRCLE_RADIUS,
            center: Point::new(vec![0.0, 0.0]),
            jitter: DEFAULT_JITTER,
            seed: DEFAULT_SEED,
        }
    }
}

pub fn gen_circle(spec: &CircleSpec) -> Vec<Point> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let (cx, cy) = (spec.center[0], spec.center[1]);
    (0..spec.count)
        .map(|_| {
            let angle = rng.random_range(0.0..TAU);
            let r = if spec.jitter > 0.0 {
                spec.radius + rng.random_range(-spec.jitter..=spec.jitter)
            } else {
                spec.radius
            };
            Point::new(vec![cx + r * angle.cos(), cy + r * angle.sin()])
        })
        .collect()
}

fn disk(
    rng: &mut ChaCha8Rng,
    count: usize,
    center: [f64; 2],
    radius: f64,
) -> impl Iterator<Item = Point> + '_ {
    (0..count).map(move |_| {
        let r = radius * rng.random::<f64>().sqrt();
        let angle = rng.random_range(0.0..TAU);
        Point::new(vec![
            center[0] + r * angle.cos(),
            center[1] + r * angle.sin(),
        ])
    })
}

/// Sizes of the five groups, in output order.
pub const CLOUD_GROUPS: [usize; 5] = [82, 64, 3, 1, 1];

/// Two disks of 82 and 64 points plus five fixed points, 151 in all.
pub fn gen_clouds() -> Vec<Point> {
    gen_clouds_seeded(CLOUDS_SEED)
}

pub fn gen_clouds_seeded(seed: u64) -> Vec<Point> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points: Vec<Point> = disk(&mut rng, 82, [0.0, 0.0], 10.0).collect();
    points.extend(disk(&mut rng, 64, [40.0, 50.0], 10.0));
    for p in [
        [49.0, 0.0],
        [50.0, 0.0],
        [50.0, 1.0],
        [9.0, 41.0],
        [-10.0, 80.0],
    ] {
        points.push(p.into());
    }
    points
}

/// Index ranges of the five cloud groups.
pub fn cloud_groups() -> Vec<Vec<usize>> {
    let mut start = 0;
    CLOUD_GROUPS
        .iter()
        .map(|&n| {
            let group = (start..start + n).collect();
            start += n;
            group
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Circle,
    Clouds,
}

impl FromStr for Suite {
    type Err = ThinError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "circle" => Ok(Suite::Circle),
            "clouds" => Ok(Suite::Clouds),
            other => Err(ThinError::Config(format!("unknown suite '{other}'"))),
        }
    }
}

impl Suite {
    pub fn points(self, seed: u64) -> Vec<Point> {
        match self {
            Suite::Circle => gen_circle(&CircleSpec {
                seed,
                ..CircleSpec::default()
            }),
            Suite::Clouds => gen_clouds_seeded(seed),
        }
    }

    pub fn default_seed(self) -> u64 {
        match self {
            Suite::Circle => DEFAULT_SEED,
            Suite::Clouds => CLOUDS_SEED,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub eps: f64,
    pub algo: Algorithm,
    pub n_points: usize,
    pub n_vr: usize,
    pub wall_ms: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, Default)]
pub struct BenchTable {
    pub label: String,
    pub rows: Vec<BenchRow>,
}

/// Runs every `(eps, algo)` cell one after another.
pub fn run_table(
    points: &[Point],
    eps: &[f64],
    algos: &[Algorithm],
    seed: u64,
) -> Result<BenchTable> {
    let dim = points.first().ok_or(ThinError::EmptyInput)?.dim();
    let mut rows = Vec::with_capacity(eps.len() * algos.len());
    for &e in eps {
        let ps = PointSet::new(points.to_vec(), Tolerance::uniform(e, dim)?)?;
        for &algo in algos {
            let start = Instant::now();
            let out = thin(&ps, algo, &ThinOptions::default())?;
            let wall_ms = start.elapsed().as_secs_f64() * 1e3;
            rows.push(BenchRow {
                eps: e,
                algo,
                n_points: ps.len(),
                n_vr: out.stats.subset_count,
                wall_ms,
                seed,
            });
        }
    }
    Ok(BenchTable {
        label: String::new(),
        rows,
    })
}

impl BenchTable {
    pub fn row(&self, eps: f64, algo: Algorithm) -> Option<&BenchRow> {
        self.rows.iter().find(|r| r.eps == eps && r.algo == algo)
    }

    fn algos(&self) -> Vec<Algorithm> {
        let mut out = Vec::new();
        for r in &self.rows {
            if !out.contains(&r.algo) {
                out.push(r.algo);
            }
        }
        out
    }

    fn eps_values(&self) -> Vec<f64> {
        let mut out: Vec<f64> = Vec::new();
        for r in &self.rows {
            if !out.contains(&r.eps) {
                out.push(r.eps);
            }
        }
        out
    }

    /// One line per eps, a `#VR  Time` column pair per algorithm.
    pub fn to_text(&self) -> String {
        let algos = self.algos();
        let mut s = String::new();
        if !self.label.is_empty() {
            let _ = writeln!(s, "{}", self.label);
        }
        let _ = write!(s, "{:>8}", "eps");
        for a in &algos {
            let _ = write!(s, " | {:>7} {:>10}", format!("{a} #VR"), "ms");
        }
        s.push('\n');
        for e in self.eps_values() {
            let _ = write!(s, "{e:>8}");
            for &a in &algos {
                match self.row(e, a) {
                    Some(r) => {
                        let _ = write!(s, " | {:>7} {:>10.2}", r.n_vr, r.wall_ms);
                    }
                    None => {
                        let _ = write!(s, " | {:>7} {:>10}", "-", "-");
                    }
                }
            }
            s.push('\n');
        }
        s
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in &self.rows {
            w.serialize(r)
                .map_err(|e| ThinError::Config(e.to_string()))?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| ThinError::Config(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

/// Seed from the environment if set, otherwise `fallback`.
pub fn seed_from_env(fallback: u64) -> Result<u64> {
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| ThinError::Config(format!("{SEED_ENV}={v} is not an unsigned integer"))),
        Err(_) => Ok(fallback),
    }
}
