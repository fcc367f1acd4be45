//! Empirical points, E-weighted norms and the collapsability test.
//!
//! Every point of a [`PointSet`] shares one [`Tolerance`] `eps`. Distances are
//! measured in the E-weighted norm, where `E = diag(1/eps_1, ..., 1/eps_n)`, so
//! a weighted distance of 1 means "one tolerance away".

use std::borrow::Cow;
use std::ops::Deref;

use serde::{Deserialize, Serialize};

use crate::error::{Result, ThinError};

/// Componentwise error bounds shared by every point of a set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Tolerance {
    eps: Vec<f64>,
}

impl Tolerance {
    pub fn new(eps: Vec<f64>) -> Result<Self> {
        if eps.is_empty() {
            return Err(ThinError::InvalidTolerance(
                "tolerance needs at least one component".into(),
            ));
        }
        if let Some(bad) = eps.iter().find(|e| !(e.is_finite() && **e > 0.0)) {
            return Err(ThinError::InvalidTolerance(format!(
                "every component must be positive and finite, got {bad}"
            )));
        }
        Ok(Self { eps })
    }

    /// The same bound `value` in each of `dim` coordinates.
    pub fn uniform(value: f64, dim: usize) -> Result<Self> {
        Self::new(vec![value; dim])
    }

    pub fn dim(&self) -> usize {
        self.eps.len()
    }

    pub fn eps(&self) -> &[f64] {
        &self.eps
    }

    /// Every component multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.eps.iter().map(|e| e * factor).collect())
    }

    fn check_dim(&self, got: usize) -> Result<()> {
        if got != self.dim() {
            return Err(ThinError::DimensionMismatch {
                expected: self.dim(),
                got,
            });
        }
        Ok(())
    }
}

impl TryFrom<Vec<f64>> for Tolerance {
    type Error = ThinError;

    fn try_from(eps: Vec<f64>) -> Result<Self> {
        Self::new(eps)
    }
}

impl From<Tolerance> for Vec<f64> {
    fn from(tol: Tolerance) -> Self {
        tol.eps
    }
}

/// A specified value in `R^n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Point(Vec<f64>);

impl Point {
    pub fn new(coords: Vec<f64>) -> Self {
        Self(coords)
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|c| c.is_finite())
    }
}

impl Deref for Point {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl From<Vec<f64>> for Point {
    fn from(coords: Vec<f64>) -> Self {
        Self(coords)
    }
}

impl<const N: usize> From<[f64; N]> for Point {
    fn from(coords: [f64; N]) -> Self {
        Self(coords.to_vec())
    }
}

/// Ordered empirical points with a common tolerance. Duplicates are allowed.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    points: Vec<Point>,
    tol: Tolerance,
}

impl PointSet {
    pub fn new(points: Vec<Point>, tol: Tolerance) -> Result<Self> {
        for (i, p) in points.iter().enumerate() {
            tol.check_dim(p.dim())?;
            if !p.is_finite() {
                return Err(ThinError::NonFinite { point: i });
            }
        }
        Ok(Self { points, tol })
    }

    /// Builds a set from plain coordinate rows.
    pub fn from_rows<I, R>(rows: I, tol: Tolerance) -> Result<Self>
    where
        I: IntoIterator<Item = R>,
        R: Into<Point>,
    {
        Self::new(rows.into_iter().map(Into::into).collect(), tol)
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn point(&self, index: usize) -> &Point {
        &self.points[index]
    }

    pub fn tolerance(&self) -> &Tolerance {
        &self.tol
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.tol.dim()
    }

    pub(crate) fn require_non_empty(&self) -> Result<()> {
        if self.points.is_empty() {
            return Err(ThinError::EmptyInput);
        }
        Ok(())
    }
}

/// Disjoint, non-empty index subsets covering `0..len`.
///
/// Each subset is kept in ascending index order; the order of the subsets
/// themselves is whatever the producing algorithm emitted.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    subsets: Vec<Vec<usize>>,
    len: usize,
}

impl Partition {
    pub fn new(mut subsets: Vec<Vec<usize>>, len: usize) -> Result<Self> {
        let mut seen = vec![false; len];
        for subset in &mut subsets {
            if subset.is_empty() {
                return Err(ThinError::InvalidPartition("empty subset".into()));
            }
            subset.sort_unstable();
            for &i in subset.iter() {
                if i >= len {
                    return Err(ThinError::InvalidPartition(format!(
                        "index {i} out of range {len}"
                    )));
                }
                if seen[i] {
                    return Err(ThinError::InvalidPartition(format!(
                        "index {i} in two subsets"
                    )));
                }
                seen[i] = true;
            }
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(ThinError::InvalidPartition(format!(
                "index {missing} not covered"
            )));
        }
        Ok(Self { subsets, len })
    }

    /// Every index in its own subset.
    pub fn singletons(len: usize) -> Self {
        Self {
            subsets: (0..len).map(|i| vec![i]).collect(),
            len,
        }
    }

    pub fn subsets(&self) -> &[Vec<usize>] {
        &self.subsets
    }

    pub fn into_subsets(self) -> Vec<Vec<usize>> {
        self.subsets
    }

    /// Number of subsets.
    pub fn len(&self) -> usize {
        self.subsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subsets.is_empty()
    }

    /// Size of the underlying point set.
    pub fn universe(&self) -> usize {
        self.len
    }

    /// Subsets sorted by their smallest index; handy for order-insensitive comparison.
    pub fn canonical(&self) -> Vec<Vec<usize>> {
        let mut out = self.subsets.clone();
        out.sort();
        out
    }
}

/// A partition together with the centroid of each subset.
#[derive(Debug, Clone, PartialEq)]
pub struct ThinningResult {
    partition: Partition,
    representatives: Vec<Point>,
}

impl ThinningResult {
    /// Computes the representatives of `partition` over `ps`.
    pub fn from_partition(partition: Partition, ps: &PointSet) -> Result<Self> {
        if partition.universe() != ps.len() {
            return Err(ThinError::InvalidPartition(format!(
                "partition covers {} points, set has {}",
                partition.universe(),
                ps.len()
            )));
        }
        let representatives = partition
            .subsets()
            .iter()
            .map(|s| centroid_unchecked(ps.points(), s))
            .collect();
        Ok(Self {
            partition,
            representatives,
        })
    }

    pub(crate) fn from_parts(partition: Partition, representatives: Vec<Point>) -> Self {
        debug_assert_eq!(partition.len(), representatives.len());
        Self {
            partition,
            representatives,
        }
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    pub fn representatives(&self) -> &[Point] {
        &self.representatives
    }

    pub fn subsets(&self) -> &[Vec<usize>] {
        self.partition.subsets()
    }

    /// Number of valid representatives.
    pub fn len(&self) -> usize {
        self.representatives.len()
    }

    pub fn is_empty(&self) -> bool {
        self.representatives.is_empty()
    }

    /// Checks that each representative is the exact centroid of its subset and
    /// that every subset is collapsable.
    pub fn validate(&self, ps: &PointSet) -> Result<()> {
        if self.partition.universe() != ps.len() {
            return Err(ThinError::InvalidPartition(
                "partition and point set sizes differ".into(),
            ));
        }
        for (subset, rep) in self.partition.subsets().iter().zip(&self.representatives) {
            if centroid_unchecked(ps.points(), subset) != *rep {
                return Err(ThinError::ContractViolation(format!(
                    "representative of {subset:?} is not its centroid"
                )));
            }
            if !collapsable_unchecked(ps, subset) {
                return Err(ThinError::ContractViolation(format!(
                    "subset {subset:?} is not collapsable"
                )));
            }
        }
        Ok(())
    }
}

/// Which norm the central sum of squares is measured in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormMode {
    /// `||E v||_2^2`, the geometry of the stopping tests.
    #[default]
    Weighted,
    /// `||v||_2^2`.
    Unweighted,
}

impl std::str::FromStr for NormMode {
    type Err = ThinError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "weighted" => Ok(NormMode::Weighted),
            "unweighted" => Ok(NormMode::Unweighted),
            other => Err(ThinError::Config(format!("unknown norm mode '{other}'"))),
        }
    }
}

impl std::fmt::Display for NormMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            NormMode::Weighted => "weighted",
            NormMode::Unweighted => "unweighted",
        })
    }
}

/// `||E v||_2`.
pub fn weighted_norm_2(v: &[f64], tol: &Tolerance) -> Result<f64> {
    tol.check_dim(v.len())?;
    Ok(v.iter()
        .zip(tol.eps())
        .map(|(x, e)| (x / e) * (x / e))
        .sum::<f64>()
        .sqrt())
}

/// `||E v||_inf`.
pub fn weighted_norm_inf(v: &[f64], tol: &Tolerance) -> Result<f64> {
    tol.check_dim(v.len())?;
    Ok(weighted_inf_unchecked(v.iter().copied(), tol.eps()))
}

/// Arithmetic mean of the indexed points, accumulated in ascending index order.
pub fn centroid(indices: &[usize], ps: &PointSet) -> Result<Point> {
    let indices = checked_indices(indices, ps.len())?;
    Ok(centroid_unchecked(ps.points(), &indices))
}

/// Whether every indexed point lies within weighted distance 1 of the centroid.
pub fn is_collapsable(indices: &[usize], ps: &PointSet) -> Result<bool> {
    let indices = checked_indices(indices, ps.len())?;
    Ok(collapsable_unchecked(ps, &indices))
}

/// Whether `r` lies in the closed weighted unit ball around `p`.
pub fn in_neighborhood(r: &[f64], p: &[f64], tol: &Tolerance) -> Result<bool> {
    tol.check_dim(r.len())?;
    tol.check_dim(p.len())?;
    Ok(weighted_dist_unchecked(p, r, tol.eps()) <= 1.0)
}

/// Sum of squared distances of the indexed points to their centroid.
pub fn central_ssq(indices: &[usize], ps: &PointSet, mode: NormMode) -> Result<f64> {
    let indices = checked_indices(indices, ps.len())?;
    Ok(central_ssq_unchecked(ps, &indices, mode))
}

/// Sum of [`central_ssq`] over every subset of `part`.
pub fn total_ssq(part: &Partition, ps: &PointSet, mode: NormMode) -> Result<f64> {
    if part.universe() != ps.len() {
        return Err(ThinError::InvalidPartition(format!(
            "partition covers {} points, set has {}",
            part.universe(),
            ps.len()
        )));
    }
    Ok(part
        .subsets()
        .iter()
        .map(|s| central_ssq_unchecked(ps, s, mode))
        .sum())
}

/// Sum of squared distances of the indexed points to an arbitrary `center`.
pub fn ssq_about(indices: &[usize], ps: &PointSet, center: &[f64], mode: NormMode) -> Result<f64> {
    let indices = checked_indices(indices, ps.len())?;
    ps.tolerance().check_dim(center.len())?;
    Ok(indices
        .iter()
        .map(|&i| squared_dist_unchecked(ps.point(i), center, ps.tolerance().eps(), mode))
        .sum())
}

fn checked_indices(indices: &[usize], len: usize) -> Result<Cow<'_, [usize]>> {
    if indices.is_empty() {
        return Err(ThinError::EmptyIndexSet);
    }
    if let Some(&index) = indices.iter().find(|&&i| i >= len) {
        return Err(ThinError::IndexOutOfRange { index, len });
    }
    let sorted: Cow<'_, [usize]> = if indices.is_sorted() {
        Cow::Borrowed(indices)
    } else {
        let mut v = indices.to_vec();
        v.sort_unstable();
        Cow::Owned(v)
    };
    if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
        return Err(ThinError::DuplicateIndex(w[0]));
    }
    Ok(sorted)
}

// Kernel helpers shared by the algorithms. Callers guarantee dimensions match,
// indices are in range and ascending.

pub(crate) fn weighted_dist_unchecked(a: &[f64], b: &[f64], eps: &[f64]) -> f64 {
    let mut acc = 0.0;
    for ((x, y), e) in a.iter().zip(b).zip(eps) {
        let t = (x - y) / e;
        acc += t * t;
    }
    acc.sqrt()
}

pub(crate) fn squared_dist_unchecked(a: &[f64], b: &[f64], eps: &[f64], mode: NormMode) -> f64 {
    let mut acc = 0.0;
    match mode {
        NormMode::Weighted => {
            for ((x, y), e) in a.iter().zip(b).zip(eps) {
                let t = (x - y) / e;
                acc += t * t;
            }
        }
        NormMode::Unweighted => {
            for (x, y) in a.iter().zip(b) {
                let t = x - y;
                acc += t * t;
            }
        }
    }
    acc
}

pub(crate) fn weighted_inf_unchecked(v: impl Iterator<Item = f64>, eps: &[f64]) -> f64 {
    v.zip(eps).map(|(x, e)| x.abs() / e).fold(0.0, f64::max)
}

#[cfg(not(feature = "compensated-sum"))]
pub(crate) fn centroid_unchecked(points: &[Point], indices: &[usize]) -> Point {
    debug_assert!(!indices.is_empty());
    let dim = points[indices[0]].dim();
    let mut sum = vec![0.0; dim];
    for &i in indices {
        for (s, c) in sum.iter_mut().zip(points[i].coords()) {
            *s += c;
        }
    }
    let count = indices.len() as f64;
    Point(sum.into_iter().map(|s| s / count).collect())
}

#[cfg(feature = "compensated-sum")]
pub(crate) fn centroid_unchecked(points: &[Point], indices: &[usize]) -> Point {
    debug_assert!(!indices.is_empty());
    let dim = points[indices[0]].dim();
    let mut sum = vec![0.0; dim];
    let mut comp = vec![0.0; dim];
    // Neumaier summation, still in ascending index order.
    for &i in indices {
        for ((s, c), x) in sum.iter_mut().zip(comp.iter_mut()).zip(points[i].coords()) {
            let t = *s + x;
            if s.abs() >= x.abs() {
                *c += (*s - t) + x;
            } else {
                *c += (x - t) + *s;
            }
            *s = t;
        }
    }
    let count = indices.len() as f64;
    Point(
        sum.into_iter()
            .zip(comp)
            .map(|(s, c)| (s + c) / count)
            .collect(),
    )
}

pub(crate) fn collapsable_with_center(ps: &PointSet, indices: &[usize], center: &[f64]) -> bool {
    let eps = ps.tolerance().eps();
    indices
        .iter()
        .all(|&i| weighted_dist_unchecked(ps.point(i), center, eps) <= 1.0)
}

pub(crate) fn collapsable_unchecked(ps: &PointSet, indices: &[usize]) -> bool {
    let q = centroid_unchecked(ps.points(), indices);
    collapsable_with_center(ps, indices, &q)
}

pub(crate) fn central_ssq_unchecked(ps: &PointSet, indices: &[usize], mode: NormMode) -> f64 {
    let q = centroid_unchecked(ps.points(), indices);
    let eps = ps.tolerance().eps();
    indices
        .iter()
        .map(|&i| squared_dist_unchecked(ps.point(i), &q, eps, mode))
        .sum()
}
