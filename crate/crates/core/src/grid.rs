//! Grid prefilter.
//!
//! Space is tiled by half-open boxes `[c - r*eps, c + r*eps)` per coordinate,
//! i.e. balls of weighted inf-norm radius `r`, with one box centred at the
//! origin. Points in the same box form one subset and are replaced by their
//! centroid. Each member ends up within weighted inf-distance `2r` of the
//! centroid, but subsets are not necessarily collapsable.

use std::collections::BTreeMap;

use crate::error::{Result, ThinError};
use crate::geometry::{centroid_unchecked, Partition, Point, PointSet, ThinningResult, Tolerance};

/// Radius for a standalone grid reduction.
pub const DEFAULT_RADIUS: f64 = 0.5;
/// Radius used before agglomerative thinning.
pub const PREFILTER_RADIUS_AA: f64 = 0.25;
/// Radius used before divisive thinning.
pub const PREFILTER_RADIUS_DA: f64 = 0.5;

/// Integer coordinates of a grid box.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CellIndex(pub Vec<i64>);

fn check_radius(radius: f64) -> Result<()> {
    if !(radius.is_finite() && radius > 0.0) {
        return Err(ThinError::InvalidRadius(radius));
    }
    Ok(())
}

/// Box containing `p`: `floor(p_i / (2 r eps_i) + 1/2)` in each coordinate.
pub fn grid_cell(p: &[f64], tol: &Tolerance, radius: f64) -> Result<CellIndex> {
    check_radius(radius)?;
    if p.len() != tol.dim() {
        return Err(ThinError::DimensionMismatch {
            expected: tol.dim(),
            got: p.len(),
        });
    }
    Ok(cell_unchecked(p, tol.eps(), radius))
}

fn cell_unchecked(p: &[f64], eps: &[f64], radius: f64) -> CellIndex {
    CellIndex(
        p.iter()
            .zip(eps)
            .map(|(x, e)| (x / (2.0 * radius * e) + 0.5).floor() as i64)
            .collect(),
    )
}

fn buckets(ps: &PointSet, radius: f64) -> BTreeMap<CellIndex, Vec<usize>> {
    let eps = ps.tolerance().eps();
    let mut cells: BTreeMap<CellIndex, Vec<usize>> = BTreeMap::new();
    for (i, p) in ps.points().iter().enumerate() {
        cells
            .entry(cell_unchecked(p, eps, radius))
            .or_default()
            .push(i);
    }
    cells
}

/// Groups points by box. Subsets come out in ascending lexicographic box order.
pub fn grid_partition(ps: &PointSet, radius: f64) -> Result<ThinningResult> {
    check_radius(radius)?;
    ps.require_non_empty()?;
    let subsets: Vec<Vec<usize>> = buckets(ps, radius).into_values().collect();
    let reps: Vec<Point> = subsets
        .iter()
        .map(|s| centroid_unchecked(ps.points(), s))
        .collect();
    let partition = Partition::new(subsets, ps.len())?;
    Ok(ThinningResult::from_parts(partition, reps))
}

/// Number of occupied boxes, a cheap estimate of how far the set can be thinned.
pub fn grid_cell_count(ps: &PointSet, radius: f64) -> Result<usize> {
    check_radius(radius)?;
    Ok(buckets(ps, radius).len())
}
