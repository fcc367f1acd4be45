//! Small reference point sets used in tests, the CLI and the Python bindings.

use crate::geometry::{PointSet, Tolerance};

fn plane(rows: &[[f64; 2]], eps: f64) -> PointSet {
    PointSet::from_rows(
        rows.iter().copied(),
        Tolerance::uniform(eps, 2).expect("valid tolerance"),
    )
    .expect("finite fixture")
}

/// Coordinates of the twelve-point example: a unit 3x3 block and three outliers.
pub const TWELVE_POINTS: [[f64; 2]; 12] = [
    [-1.0, -1.0],
    [0.0, -1.0],
    [1.0, -1.0],
    [-1.0, 0.0],
    [0.0, 0.0],
    [1.0, 0.0],
    [-1.0, 1.0],
    [0.0, 1.0],
    [1.0, 1.0],
    [5.0, -2.9],
    [5.0, 0.0],
    [5.0, 2.9],
];

/// Twelve points with tolerance (1.43, 1.43).
pub fn twelve_points() -> PointSet {
    plane(&TWELVE_POINTS, 1.43)
}

pub const ZIP: [[f64; 2]; 8] = [
    [0.1, 2.0],
    [2.0, 0.0],
    [4.2, 0.0],
    [6.4, 0.0],
    [8.6, 0.0],
    [3.1, 3.0],
    [5.3, 3.0],
    [7.5, 3.0],
];

/// Two interleaved rows of points spaced just over one tolerance apart, eps = (2.199, 2.199).
pub fn zip() -> PointSet {
    plane(&ZIP, 2.199)
}

pub const STAR: [[f64; 2]; 6] = [
    [0.577, 0.99],
    [0.577, -0.99],
    [0.0, 0.0001],
    [0.0, 0.0],
    [-1.1551, 0.0],
    [-1.155, 0.0],
];

/// Three-pointed star with unit tolerance.
pub fn three_pointed_star() -> PointSet {
    plane(&STAR, 1.0)
}

pub const QT_LINE: [f64; 5] = [0.0, 0.05, 0.9, 1.0, 1.2];

/// Five points on the line with tolerance 0.5.
pub fn qt_line() -> PointSet {
    PointSet::from_rows(
        QT_LINE.iter().map(|&x| [x]),
        Tolerance::uniform(0.5, 1).expect("valid tolerance"),
    )
    .expect("finite fixture")
}

pub fn all() -> Vec<PointSet> {
    vec![twelve_points(), zip(), three_pointed_star(), qt_line()]
}
