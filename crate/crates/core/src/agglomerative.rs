//! Agglomerative thinning.
//!
//! Start from singletons and repeatedly take the pair of subsets whose
//! centroids are closest in the E-weighted norm. The pair is unified when
//! every member of the union is within weighted distance 1 of the union's
//! centroid; otherwise that matrix entry is replaced by an infinite sentinel.
//! The loop stops when one subset is left or every remaining entry exceeds 2.
//!
//! Subsets live in *slots*. Slot `i` starts as `{p_i}`; a merge of slots
//! `i < j` keeps the union in slot `i` and retires slot `j`, so a slot id is
//! always the smallest point index of its subset and slot order equals list
//! order. Ties in the minimum search go to the lexicographically smallest
//! `(i, j)`.

use crate::error::{Result, ThinError};
use crate::geometry::{
    centroid_unchecked, collapsable_with_center, weighted_dist_unchecked, Partition, Point,
    PointSet, ThinningResult,
};

/// Entries above this can never be unified.
pub const MERGE_THRESHOLD: f64 = 2.0;

/// Marker stored for a pair whose union failed the collapsability test.
pub const SENTINEL: f64 = f64::INFINITY;

/// How a proposed union is accepted.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum MergeTest {
    /// Every member of the union must lie within weighted distance 1 of its centroid.
    #[default]
    Members,
    /// Accept whenever the centroid distance is at most the given value.
    ///
    /// This skips the member test and can build non-collapsable subsets; it
    /// exists to demonstrate why the member test is required.
    CentroidDistance(f64),
}

/// What happens to the matrix after a successful merge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MatrixRefresh {
    /// Drop the retired slot and recompute the surviving slot's row and column.
    /// Sentinels between untouched subsets stay in place.
    #[default]
    Incremental,
    /// Recompute every entry from the current centroids, clearing all sentinels.
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AaOptions {
    pub merge_test: MergeTest,
    pub refresh: MatrixRefresh,
}

/// Symmetric matrix of centroid distances, stored as its strict upper triangle.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    size: usize,
    entries: Vec<f64>,
}

impl DistanceMatrix {
    fn new(centroids: &[Point], eps: &[f64]) -> Self {
        let size = centroids.len();
        let mut entries = Vec::with_capacity(size * size.saturating_sub(1) / 2);
        for i in 0..size {
            for j in i + 1..size {
                entries.push(weighted_dist_unchecked(&centroids[i], &centroids[j], eps));
            }
        }
        Self { size, entries }
    }

    fn offset(&self, i: usize, j: usize) -> usize {
        let (i, j) = if i < j { (i, j) } else { (j, i) };
        debug_assert!(i != j && j < self.size);
        i * (2 * self.size - i - 1) / 2 + (j - i - 1)
    }

    /// Entry for the slot pair `(i, j)`, `i != j`, in either order.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[self.offset(i, j)]
    }

    fn set(&mut self, i: usize, j: usize, value: f64) {
        let k = self.offset(i, j);
        self.entries[k] = value;
    }

    /// Number of slots (the size of the original point set).
    pub fn size(&self) -> usize {
        self.size
    }
}

/// Result of one pass through the selection and merge steps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepOutcome {
    /// Slot `removed` was unified into slot `kept`.
    Merged {
        kept: usize,
        removed: usize,
        distance: f64,
    },
    /// The union of the two slots is not collapsable; their entry is now a sentinel.
    Rejected {
        first: usize,
        second: usize,
        distance: f64,
    },
    /// Nothing more can be unified.
    Done,
}

/// Mutable state of a run.
#[derive(Debug, Clone)]
pub struct AaState<'a> {
    ps: &'a PointSet,
    options: AaOptions,
    members: Vec<Vec<usize>>,
    centroids: Vec<Point>,
    live: Vec<usize>,
    matrix: DistanceMatrix,
    /// For each live slot `i`, the smallest entry `(i, j)` over live `j > i`
    /// and the smallest such `j`. `usize::MAX` marks an empty row.
    row_min: Vec<(f64, usize)>,
    merges: usize,
    rejections: usize,
}

impl<'a> AaState<'a> {
    pub fn new(ps: &'a PointSet, options: AaOptions) -> Result<Self> {
        ps.require_non_empty()?;
        let s = ps.len();
        let centroids = ps.points().to_vec();
        let matrix = DistanceMatrix::new(&centroids, ps.tolerance().eps());
        let mut state = Self {
            ps,
            options,
            members: (0..s).map(|i| vec![i]).collect(),
            centroids,
            live: (0..s).collect(),
            matrix,
            row_min: vec![(SENTINEL, usize::MAX); s],
            merges: 0,
            rejections: 0,
        };
        for pos in 0..s {
            state.row_min[pos] = state.scan_row(pos);
        }
        Ok(state)
    }

    pub fn point_set(&self) -> &PointSet {
        self.ps
    }

    /// Live slot ids in list order.
    pub fn live_slots(&self) -> &[usize] {
        &self.live
    }

    pub fn members(&self, slot: usize) -> &[usize] {
        &self.members[slot]
    }

    pub fn centroid(&self, slot: usize) -> &Point {
        &self.centroids[slot]
    }

    pub fn matrix(&self) -> &DistanceMatrix {
        &self.matrix
    }

    pub fn subset_count(&self) -> usize {
        self.live.len()
    }

    pub fn merges(&self) -> usize {
        self.merges
    }

    pub fn rejections(&self) -> usize {
        self.rejections
    }

    /// The smallest live entry and its slot pair, if any live pair exists.
    pub fn min_entry(&self) -> Option<(f64, usize, usize)> {
        let mut best: Option<(f64, usize, usize)> = None;
        for &i in &self.live {
            let (v, j) = self.row_min[i];
            if j == usize::MAX {
                continue;
            }
            if best.is_none_or(|(bv, _, _)| v < bv) {
                best = Some((v, i, j));
            }
        }
        best
    }

    /// Current subsets in list order.
    pub fn partition(&self) -> Partition {
        let subsets = self.live.iter().map(|&i| self.members[i].clone()).collect();
        Partition::new(subsets, self.ps.len()).expect("live slots always partition the point set")
    }

    /// Current subsets with their centroids.
    pub fn result(&self) -> ThinningResult {
        let reps = self
            .live
            .iter()
            .map(|&i| self.centroids[i].clone())
            .collect();
        ThinningResult::from_parts(self.partition(), reps)
    }

    /// Runs one selection step: merge, reject, or report that the loop is done.
    pub fn step(&mut self) -> StepOutcome {
        if self.live.len() <= 1 {
            return StepOutcome::Done;
        }
        let Some((distance, i, j)) = self.min_entry() else {
            return StepOutcome::Done;
        };
        if distance > MERGE_THRESHOLD {
            return StepOutcome::Done;
        }

        let union = merge_sorted(&self.members[i], &self.members[j]);
        let q = centroid_unchecked(self.ps.points(), &union);
        let accept = match self.options.merge_test {
            MergeTest::Members => collapsable_with_center(self.ps, &union, &q),
            MergeTest::CentroidDistance(limit) => distance <= limit,
        };

        if accept {
            self.apply_merge(i, j, union, q);
            self.merges += 1;
            StepOutcome::Merged {
                kept: i,
                removed: j,
                distance,
            }
        } else {
            self.matrix.set(i, j, SENTINEL);
            self.row_min[i] = self.scan_row(i);
            self.rejections += 1;
            StepOutcome::Rejected {
                first: i,
                second: j,
                distance,
            }
        }
    }

    fn apply_merge(&mut self, i: usize, j: usize, union: Vec<usize>, q: Point) {
        self.members[i] = union;
        self.members[j].clear();
        self.centroids[i] = q;
        let pos = self.live.binary_search(&j).expect("retired slot was live");
        self.live.remove(pos);

        let eps = self.ps.tolerance().eps();
        match self.options.refresh {
            MatrixRefresh::Full => {
                for (a, &x) in self.live.iter().enumerate() {
                    for &y in &self.live[a + 1..] {
                        let d =
                            weighted_dist_unchecked(&self.centroids[x], &self.centroids[y], eps);
                        self.matrix.set(x, y, d);
                    }
                }
                for idx in 0..self.live.len() {
                    let x = self.live[idx];
                    self.row_min[x] = self.scan_row(x);
                }
            }
            MatrixRefresh::Incremental => {
                for idx in 0..self.live.len() {
                    let x = self.live[idx];
                    if x != i {
                        let d =
                            weighted_dist_unchecked(&self.centroids[x], &self.centroids[i], eps);
                        self.matrix.set(x, i, d);
                    }
                }
                self.row_min[i] = self.scan_row(i);
                for idx in 0..self.live.len() {
                    let x = self.live[idx];
                    if x >= j {
                        break;
                    }
                    if x == i {
                        continue;
                    }
                    let (v, arg) = self.row_min[x];
                    if arg == i || arg == j {
                        self.row_min[x] = self.scan_row(x);
                    } else if x < i {
                        let d = self.matrix.get(x, i);
                        if d < v || (d == v && i < arg) {
                            self.row_min[x] = (d, i);
                        }
                    }
                }
            }
        }
    }

    fn scan_row(&self, i: usize) -> (f64, usize) {
        let start = self.live.partition_point(|&x| x <= i);
        let mut best = (SENTINEL, usize::MAX);
        for &j in &self.live[start..] {
            let v = self.matrix.get(i, j);
            if best.1 == usize::MAX || v < best.0 {
                best = (v, j);
            }
        }
        best
    }

    /// Verifies the bookkeeping: members partition the set, centroids are exact,
    /// live matrix entries are either the current distance or a sentinel, and
    /// the cached row minima agree with the matrix.
    pub fn check_consistency(&self) -> Result<()> {
        let subsets: Vec<Vec<usize>> = self.live.iter().map(|&i| self.members[i].clone()).collect();
        Partition::new(subsets, self.ps.len())
            .map_err(|e| ThinError::ContractViolation(format!("live subsets: {e}")))?;
        let eps = self.ps.tolerance().eps();
        for (a, &i) in self.live.iter().enumerate() {
            if self.members[i].first() != Some(&i) {
                return Err(ThinError::ContractViolation(format!(
                    "slot {i} does not own its smallest index"
                )));
            }
            if centroid_unchecked(self.ps.points(), &self.members[i]) != self.centroids[i] {
                return Err(ThinError::ContractViolation(format!(
                    "stale centroid in slot {i}"
                )));
            }
            for &j in &self.live[a + 1..] {
                let m = self.matrix.get(i, j);
                let d = weighted_dist_unchecked(&self.centroids[i], &self.centroids[j], eps);
                if m != d && m != SENTINEL {
                    return Err(ThinError::ContractViolation(format!(
                        "entry ({i},{j}) = {m}, distance {d}"
                    )));
                }
            }
            if self.row_min[i] != self.scan_row(i) {
                return Err(ThinError::ContractViolation(format!(
                    "cached row minimum of slot {i} is stale"
                )));
            }
        }
        Ok(())
    }
}

/// Hook called after every step of a run.
pub trait AaObserver {
    fn on_step(&mut self, state: &AaState<'_>, outcome: &StepOutcome);
}

impl AaObserver for () {
    fn on_step(&mut self, _: &AaState<'_>, _: &StepOutcome) {}
}

impl<F: FnMut(&AaState<'_>, &StepOutcome)> AaObserver for F {
    fn on_step(&mut self, state: &AaState<'_>, outcome: &StepOutcome) {
        self(state, outcome)
    }
}

/// Records the partition before the first step and after every merge.
#[derive(Debug, Clone, Default)]
pub struct AaTrace {
    pub partitions: Vec<Partition>,
}

impl AaObserver for AaTrace {
    fn on_step(&mut self, state: &AaState<'_>, outcome: &StepOutcome) {
        if matches!(outcome, StepOutcome::Merged { .. }) {
            self.partitions.push(state.partition());
        }
    }
}

/// One step of the loop on an existing state.
pub fn aa_merge_step(state: &mut AaState<'_>) -> StepOutcome {
    state.step()
}

/// Thins `ps` with the default options.
pub fn aa_run(ps: &PointSet) -> Result<ThinningResult> {
    aa_run_with(ps, AaOptions::default(), &mut ())
}

/// Thins `ps` and returns the result along with the sequence of partitions,
/// starting from the all-singletons partition.
pub fn aa_run_traced(ps: &PointSet) -> Result<(ThinningResult, Vec<Partition>)> {
    let mut trace = AaTrace {
        partitions: vec![Partition::singletons(ps.len())],
    };
    let result = aa_run_with(ps, AaOptions::default(), &mut trace)?;
    Ok((result, trace.partitions))
}

pub fn aa_run_with(
    ps: &PointSet,
    options: AaOptions,
    observer: &mut impl AaObserver,
) -> Result<ThinningResult> {
    let mut state = AaState::new(ps, options)?;
    let s = ps.len();
    // s - 1 merges, and each pair can be rejected at most once per pair of centroids.
    let max_steps = s + s * s;
    for _ in 0..=max_steps {
        let outcome = state.step();
        observer.on_step(&state, &outcome);
        if outcome == StepOutcome::Done {
            return Ok(state.result());
        }
    }
    Err(ThinError::ContractViolation(format!(
        "agglomerative loop exceeded {max_steps} steps"
    )))
}

fn merge_sorted(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut x, mut y) = (0, 0);
    while x < a.len() && y < b.len() {
        if a[x] <= b[y] {
            out.push(a[x]);
            x += 1;
        } else {
            out.push(b[y]);
            y += 1;
        }
    }
    out.extend_from_slice(&a[x..]);
    out.extend_from_slice(&b[y..]);
    out
}
