//! Divisive thinning.
//!
//! Start with every point in one subset. While some point lies farther than
//! weighted distance 1 from its subset's centroid, split the worst such point
//! into a new singleton, then redistribute: repeatedly apply the single-point
//! move that lowers the total central sum of squares the most, until no move
//! strictly lowers it.
//!
//! Ties go to the smallest point index when splitting, and to the smallest
//! `(point, target subset)` pair when choosing a move. Candidate moves are
//! scored with the closed-form change in sum of squares
//!
//! ```text
//! delta(p, k) = |L_k| / (|L_k| + 1) * ||p - q_k||^2  -  |L_o| / (|L_o| - 1) * ||p - q_o||^2
//! ```
//!
//! where `L_o` is the current owner of `p` (the second term is zero when `L_o`
//! is a singleton, so emptying moves never win). The second term does not
//! depend on `k`, so each point caches its cheapest target under the first
//! term alone, plus a lower bound on the runner-up. A change touches only two
//! centroids, so one pass over the points rescores them against those two,
//! and a full rescan is needed only when a point's target got worse than the
//! runner-up bound.

use crate::error::{Result, ThinError};
use crate::geometry::{
    centroid_unchecked, squared_dist_unchecked, weighted_dist_unchecked, NormMode, Partition,
    Point, PointSet, ThinningResult,
};

const NO_TARGET: usize = usize::MAX;

/// A single-point move between subsets.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Move {
    pub point: usize,
    pub from: usize,
    pub to: usize,
    /// Change in total central sum of squares; negative for an improvement.
    pub delta: f64,
}

/// Scores of every candidate move, for one norm mode.
#[derive(Debug, Clone)]
struct MoveCache {
    mode: NormMode,
    /// `|L_k| / (|L_k| + 1) * ||p - q_k||^2` for the best target `k`.
    add: Vec<f64>,
    target: Vec<usize>,
    /// Lower bound on the add term of every subset other than owner and target.
    runner_up: Vec<f64>,
    /// Removal term of each point from its owner.
    gain: Vec<f64>,
    /// `add - gain`, or infinity without a target.
    delta: Vec<f64>,
    /// Squared distances to the two centroids that just changed.
    scratch: [Vec<f64>; 2],
    flagged: Vec<usize>,
    /// Smallest `(delta, point)` over all points with a target.
    best: Option<(f64, usize)>,
}

#[derive(Debug, Clone)]
pub struct DaState<'a> {
    ps: &'a PointSet,
    /// Coordinates by axis, for the per-move passes.
    columns: Vec<Vec<f64>>,
    subsets: Vec<Vec<usize>>,
    owner: Vec<usize>,
    centroids: Vec<Point>,
    distances: Vec<f64>,
    cache: Option<MoveCache>,
}

impl<'a> DaState<'a> {
    /// One subset holding every point.
    pub fn new(ps: &'a PointSet) -> Result<Self> {
        ps.require_non_empty()?;
        let all: Vec<usize> = (0..ps.len()).collect();
        let q = centroid_unchecked(ps.points(), &all);
        let columns = (0..ps.dim())
            .map(|k| ps.points().iter().map(|p| p[k]).collect())
            .collect();
        let mut state = Self {
            ps,
            columns,
            subsets: vec![all],
            owner: vec![0; ps.len()],
            centroids: vec![q],
            distances: vec![0.0; ps.len()],
            cache: None,
        };
        state.refresh_distances(0);
        Ok(state)
    }

    pub fn point_set(&self) -> &PointSet {
        self.ps
    }

    pub fn subsets(&self) -> &[Vec<usize>] {
        &self.subsets
    }

    pub fn centroids(&self) -> &[Point] {
        &self.centroids
    }

    /// Weighted distance of each point to its subset's centroid.
    pub fn distances(&self) -> &[f64] {
        &self.distances
    }

    pub fn owner(&self, point: usize) -> usize {
        self.owner[point]
    }

    pub fn subset_count(&self) -> usize {
        self.subsets.len()
    }

    /// Largest distance and the smallest index attaining it.
    pub fn max_distance(&self) -> (f64, usize) {
        let mut best = (self.distances[0], 0);
        for (i, &d) in self.distances.iter().enumerate().skip(1) {
            if d > best.0 {
                best = (d, i);
            }
        }
        best
    }

    pub fn partition(&self) -> Partition {
        Partition::new(self.subsets.clone(), self.ps.len())
            .expect("subsets always partition the point set")
    }

    pub fn result(&self) -> ThinningResult {
        ThinningResult::from_parts(self.partition(), self.centroids.clone())
    }

    /// Total central sum of squares, recomputed from scratch.
    pub fn total_ssq(&self, mode: NormMode) -> f64 {
        let eps = self.ps.tolerance().eps();
        self.subsets
            .iter()
            .zip(&self.centroids)
            .map(|(s, q)| {
                s.iter()
                    .map(|&i| squared_dist_unchecked(self.ps.point(i), q, eps, mode))
                    .sum::<f64>()
            })
            .sum()
    }

    /// Closed-form change in total sum of squares if `point` moved into subset `to`.
    pub fn move_delta(&self, point: usize, to: usize, mode: NormMode) -> f64 {
        debug_assert_ne!(self.owner[point], to);
        self.add_term(point, to, mode) - self.removal_gain(point, mode)
    }

    fn add_term(&self, point: usize, to: usize, mode: NormMode) -> f64 {
        let eps = self.ps.tolerance().eps();
        let n = self.subsets[to].len() as f64;
        n / (n + 1.0) * squared_dist_unchecked(self.ps.point(point), &self.centroids[to], eps, mode)
    }

    fn removal_gain(&self, point: usize, mode: NormMode) -> f64 {
        let from = self.owner[point];
        let n_from = self.subsets[from].len();
        if n_from <= 1 {
            return 0.0;
        }
        let n_from = n_from as f64;
        let eps = self.ps.tolerance().eps();
        n_from / (n_from - 1.0)
            * squared_dist_unchecked(self.ps.point(point), &self.centroids[from], eps, mode)
    }

    fn refresh_distances(&mut self, subset: usize) {
        let eps = self.ps.tolerance().eps();
        let q = &self.centroids[subset];
        for &i in &self.subsets[subset] {
            self.distances[i] = weighted_dist_unchecked(self.ps.point(i), q, eps);
        }
    }

    /// Cheapest target of `point` under the add term, ties to the smaller
    /// subset index, and the smallest add term among the remaining subsets.
    fn best_target(&self, point: usize, mode: NormMode) -> (f64, usize, f64) {
        let from = self.owner[point];
        let mut best = (f64::INFINITY, NO_TARGET);
        let mut runner_up = f64::INFINITY;
        for k in 0..self.subsets.len() {
            if k == from {
                continue;
            }
            let add = self.add_term(point, k, mode);
            if best.1 == NO_TARGET || add < best.0 {
                runner_up = runner_up.min(best.0);
                best = (add, k);
            } else {
                runner_up = runner_up.min(add);
            }
        }
        (best.0, best.1, runner_up)
    }

    /// Squared distance of every point to the centroid of `subset`, computed
    /// exactly as `squared_dist_unchecked` does.
    fn fill_squares(&self, subset: usize, mode: NormMode, out: &mut Vec<f64>) {
        let q = &self.centroids[subset];
        let eps = self.ps.tolerance().eps();
        out.resize(self.ps.len(), 0.0);
        for (k, col) in self.columns.iter().enumerate() {
            let c = q[k];
            let e = match mode {
                NormMode::Weighted => eps[k],
                NormMode::Unweighted => 1.0,
            };
            // Dividing by 1 is exact, so both modes share one loop.
            if k == 0 {
                for (o, &x) in out.iter_mut().zip(col) {
                    let t = (x - c) / e;
                    *o = t * t;
                }
            } else {
                for (o, &x) in out.iter_mut().zip(col) {
                    let t = (x - c) / e;
                    *o += t * t;
                }
            }
        }
    }

    fn global_best(cache: &MoveCache) -> Option<(f64, usize)> {
        let mut best: Option<(f64, usize)> = None;
        for p in 0..cache.add.len() {
            if cache.target[p] == NO_TARGET {
                continue;
            }
            let delta = cache.add[p] - cache.gain[p];
            if best.is_none_or(|(bd, _)| delta < bd) {
                best = Some((delta, p));
            }
        }
        best
    }

    fn rebuild_cache(&mut self, mode: NormMode) {
        let n = self.ps.len();
        let mut cache = MoveCache {
            mode,
            add: vec![f64::INFINITY; n],
            target: vec![NO_TARGET; n],
            runner_up: vec![f64::INFINITY; n],
            gain: (0..n).map(|p| self.removal_gain(p, mode)).collect(),
            delta: vec![f64::INFINITY; n],
            scratch: [Vec::new(), Vec::new()],
            flagged: Vec::new(),
            best: None,
        };
        for p in 0..n {
            (cache.add[p], cache.target[p], cache.runner_up[p]) = self.best_target(p, mode);
            if cache.target[p] != NO_TARGET {
                cache.delta[p] = cache.add[p] - cache.gain[p];
            }
        }
        cache.best = Self::global_best(&cache);
        self.cache = Some(cache);
    }

    /// Same value as `centroid_unchecked`, summed axis by axis.
    #[cfg(not(feature = "compensated-sum"))]
    fn centroid_of(&self, subset: usize) -> Point {
        let members = &self.subsets[subset];
        let count = members.len() as f64;
        Point::new(
            self.columns
                .iter()
                .map(|col| {
                    let mut sum = 0.0;
                    for &i in members {
                        sum += col[i];
                    }
                    sum / count
                })
                .collect(),
        )
    }

    #[cfg(feature = "compensated-sum")]
    fn centroid_of(&self, subset: usize) -> Point {
        centroid_unchecked(self.ps.points(), &self.subsets[subset])
    }

    /// Moves `point` from its owner into `to`, which may be one past the last subset.
    fn relocate(&mut self, point: usize, to: usize) {
        let from = self.owner[point];
        let pos = self.subsets[from]
            .binary_search(&point)
            .expect("point is in its owner");
        self.subsets[from].remove(pos);
        if to == self.subsets.len() {
            self.subsets.push(vec![point]);
            self.centroids.push(self.ps.point(point).clone());
        } else {
            let ins = self.subsets[to].binary_search(&point).unwrap_err();
            self.subsets[to].insert(ins, point);
            self.centroids[to] = self.centroid_of(to);
        }
        self.owner[point] = to;
        self.centroids[from] = self.centroid_of(from);
        self.rescore(point, [from, to]);
    }

    /// Brings distances and the move cache up to date after `moved` changed owner.
    fn rescore(&mut self, moved: usize, changed: [usize; 2]) {
        let Some(mut cache) = self.cache.take() else {
            for c in changed {
                self.refresh_distances(c);
            }
            return;
        };
        let mode = cache.mode;
        let eps = self.ps.tolerance().eps();
        let mut scratch = std::mem::take(&mut cache.scratch);
        for (buf, &c) in scratch.iter_mut().zip(&changed) {
            self.fill_squares(c, mode, buf);
        }

        for (buf, &c) in scratch.iter().zip(&changed) {
            let m = self.subsets[c].len();
            let w = m as f64 / (m as f64 - 1.0);
            for &i in &self.subsets[c] {
                cache.gain[i] = if m > 1 { w * buf[i] } else { 0.0 };
                self.distances[i] = match mode {
                    NormMode::Weighted => buf[i].sqrt(),
                    NormMode::Unweighted => {
                        weighted_dist_unchecked(self.ps.point(i), &self.centroids[c], eps)
                    }
                };
            }
        }

        let [c0, c1] = changed;
        let [w0, w1] = changed.map(|c| {
            let n = self.subsets[c].len() as f64;
            n / (n + 1.0)
        });
        let n = self.ps.len();
        let (s0, s1) = (&scratch[0][..n], &scratch[1][..n]);
        let owner = &self.owner[..n];

        // A point that neither belongs to nor targets a changed subset, and
        // for which neither changed subset beats its runner-up bound, keeps
        // every cached value.
        let mut flagged = std::mem::take(&mut cache.flagged);
        flagged.resize(n, 0);
        let mut count = 0;
        {
            let targets = &cache.target[..n];
            let runners = &cache.runner_up[..n];
            for p in 0..n {
                let (o, t, r) = (owner[p], targets[p], runners[p]);
                let hit = (o == c0)
                    | (o == c1)
                    | (t == c0)
                    | (t == c1)
                    | (w0 * s0[p] <= r)
                    | (w1 * s1[p] <= r);
                flagged[count] = p;
                count += hit as usize;
            }
        }
        if !flagged[..count].contains(&moved) {
            flagged[count] = moved;
            count += 1;
        }

        let mut rescan = Vec::new();
        for &p in &flagged[..count] {
            let (o, t) = (owner[p], cache.target[p]);
            let (v0, v1) = (w0 * s0[p], w1 * s1[p]);
            let (mut a, mut t_new, mut r) = (cache.add[p], t, cache.runner_up[p]);
            let mut worse = false;
            if t == c0 || t == c1 {
                let (v_t, v_c, c, own_c) = if t == c0 {
                    (v0, v1, c1, o == c1)
                } else {
                    (v1, v0, c0, o == c0)
                };
                worse = v_t > a;
                a = v_t;
                if !own_c {
                    if v_c < a || (v_c == a && c < t) {
                        if a < r {
                            r = a;
                        }
                        a = v_c;
                        t_new = c;
                    } else if v_c < r {
                        r = v_c;
                    }
                }
            } else {
                for (v, c) in [(v0, c0), (v1, c1)] {
                    if o == c {
                        continue;
                    }
                    if v < a || (v == a && c < t_new) {
                        if a < r {
                            r = a;
                        }
                        a = v;
                        t_new = c;
                    } else if v < r {
                        r = v;
                    }
                }
            }
            if p == moved || (worse && a >= r) {
                rescan.push(p);
                continue;
            }
            cache.add[p] = a;
            cache.target[p] = t_new;
            cache.runner_up[p] = r;
            cache.delta[p] = if t_new == NO_TARGET {
                f64::INFINITY
            } else {
                a - cache.gain[p]
            };
        }
        for p in rescan {
            let (a, t, r) = self.best_target(p, mode);
            (cache.add[p], cache.target[p], cache.runner_up[p]) = (a, t, r);
            cache.delta[p] = if t == NO_TARGET {
                f64::INFINITY
            } else {
                a - cache.gain[p]
            };
        }
        cache.flagged = flagged;
        let best = smallest(&cache.delta);
        cache.best = best;
        cache.scratch = scratch;
        self.cache = Some(cache);
    }

    /// The candidate move with the smallest delta, ties to the smallest (point, target).
    pub fn best_move(&mut self, mode: NormMode) -> Option<Move> {
        if self.cache.as_ref().is_none_or(|c| c.mode != mode) {
            self.rebuild_cache(mode);
        }
        let cache = self.cache.as_ref().expect("cache was just built");
        cache.best.map(|(delta, point)| Move {
            point,
            from: self.owner[point],
            to: cache.target[point],
            delta,
        })
    }

    fn apply_move(&mut self, mv: Move) -> Result<()> {
        let Move {
            point, from, to, ..
        } = mv;
        if self.subsets[from].len() <= 1 {
            return Err(ThinError::ContractViolation(format!(
                "move of {point} would empty subset {from}"
            )));
        }
        self.relocate(point, to);
        Ok(())
    }

    /// Checks owners, exact centroids, distances and cached move scores
    /// against a full recomputation.
    pub fn check_consistency(&self) -> Result<()> {
        Partition::new(self.subsets.clone(), self.ps.len())
            .map_err(|e| ThinError::ContractViolation(format!("subsets: {e}")))?;
        let eps = self.ps.tolerance().eps();
        for (k, subset) in self.subsets.iter().enumerate() {
            if centroid_unchecked(self.ps.points(), subset) != self.centroids[k] {
                return Err(ThinError::ContractViolation(format!(
                    "stale centroid for subset {k}"
                )));
            }
            for &i in subset {
                if self.owner[i] != k {
                    return Err(ThinError::ContractViolation(format!(
                        "owner of point {i} is stale"
                    )));
                }
                if self.distances[i]
                    != weighted_dist_unchecked(self.ps.point(i), &self.centroids[k], eps)
                {
                    return Err(ThinError::ContractViolation(format!(
                        "stale distance for point {i}"
                    )));
                }
            }
        }
        let Some(cache) = &self.cache else {
            return Ok(());
        };
        for p in 0..self.ps.len() {
            let (add, target, runner_up) = self.best_target(p, cache.mode);
            if (add, target) != (cache.add[p], cache.target[p]) {
                return Err(ThinError::ContractViolation(format!(
                    "stale move score for point {p}: cached ({}, {}), actual ({add}, {target})",
                    cache.add[p], cache.target[p]
                )));
            }
            if cache.runner_up[p] > runner_up {
                return Err(ThinError::ContractViolation(format!(
                    "runner-up bound too high for point {p}"
                )));
            }
            if cache.gain[p] != self.removal_gain(p, cache.mode) {
                return Err(ThinError::ContractViolation(format!(
                    "stale removal term for point {p}"
                )));
            }
        }
        if cache.best != Self::global_best(cache) {
            return Err(ThinError::ContractViolation("stale best move".into()));
        }
        Ok(())
    }
}

/// Smallest finite value and the first index holding it.
fn smallest(values: &[f64]) -> Option<(f64, usize)> {
    const LANES: usize = 8;
    let mut lanes = [f64::INFINITY; LANES];
    let chunks = values.chunks_exact(LANES);
    let rest = chunks.remainder();
    for chunk in chunks {
        for (m, &v) in lanes.iter_mut().zip(chunk) {
            *m = if v < *m { v } else { *m };
        }
    }
    let mut min = f64::INFINITY;
    for &v in lanes.iter().chain(rest) {
        if v < min {
            min = v;
        }
    }
    if min == f64::INFINITY {
        return None;
    }
    values.iter().position(|&v| v == min).map(|p| (min, p))
}

/// Hooks into a run. Every method defaults to doing nothing.
pub trait DaObserver {
    fn on_split(&mut self, _state: &DaState<'_>, _point: usize) {}
    /// Called after each applied move.
    fn on_move(&mut self, _state: &DaState<'_>, _mv: &Move) {}
    fn on_redistributed(&mut self, _state: &DaState<'_>) {}
}

impl DaObserver for () {}

/// Records the partition at the start and after each redistribution phase.
#[derive(Debug, Clone, Default)]
pub struct DaTrace {
    pub partitions: Vec<Partition>,
}

impl DaObserver for DaTrace {
    fn on_redistributed(&mut self, state: &DaState<'_>) {
        self.partitions.push(state.partition());
    }
}

/// Splits off the point farthest from its subset's centroid into a new singleton.
///
/// Returns the index of that point. Fails if no point is farther than 1.
pub fn da_split(state: &mut DaState<'_>) -> Result<usize> {
    let (d, point) = state.max_distance();
    if d <= 1.0 {
        return Err(ThinError::ContractViolation(format!(
            "split requested but the largest distance is {d}"
        )));
    }
    let new = state.subsets.len();
    state.relocate(point, new);
    Ok(point)
}

/// Applies strictly improving moves until none is left. Returns the number of moves.
pub fn da_redistribute(
    state: &mut DaState<'_>,
    mode: NormMode,
    observer: &mut impl DaObserver,
) -> Result<usize> {
    let mut moves = 0;
    while let Some(mv) = state.best_move(mode) {
        if mv.delta >= 0.0 || mv.delta.is_nan() {
            break;
        }
        state.apply_move(mv)?;
        moves += 1;
        observer.on_move(state, &mv);
    }
    Ok(moves)
}

pub fn da_run(ps: &PointSet, mode: NormMode) -> Result<ThinningResult> {
    da_run_with(ps, mode, &mut ())
}

/// Runs and returns the partition after each redistribution phase, starting
/// with the single-subset partition.
pub fn da_run_traced(ps: &PointSet, mode: NormMode) -> Result<(ThinningResult, Vec<Partition>)> {
    let mut trace = DaTrace::default();
    let result = da_run_with(ps, mode, &mut trace)?;
    Ok((result, trace.partitions))
}

pub fn da_run_with(
    ps: &PointSet,
    mode: NormMode,
    observer: &mut impl DaObserver,
) -> Result<ThinningResult> {
    let mut state = DaState::new(ps)?;
    observer.on_redistributed(&state);
    for _ in 0..=ps.len() {
        if state.max_distance().0 <= 1.0 {
            return Ok(state.result());
        }
        let point = da_split(&mut state)?;
        observer.on_split(&state, point);
        da_redistribute(&mut state, mode, observer)?;
        observer.on_redistributed(&state);
    }
    Err(ThinError::ContractViolation(
        "divisive loop exceeded one split per point".into(),
    ))
}
