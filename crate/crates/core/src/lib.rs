//! Thinning of point sets under a per-coordinate tolerance.
//!
//! A subset is collapsable when every member lies within weighted distance 1
//! of the subset's centroid. The strategies here replace a point set by the
//! centroids of a partition into collapsable subsets:
//!
//! * [`agglomerative`] merges the closest pair of centroids while the union stays collapsable.
//! * [`divisive`] splits off the worst point and redistributes points to reduce the central sum of squares.
//! * [`grid`] buckets points into tolerance-sized boxes; fast, but subsets may not be collapsable.
//!
//! ```
//! use thinout_core::{aa_run, PointSet, Tolerance};
//!
//! let ps = PointSet::from_rows([[0.0, 0.0], [1.0, 0.0]], Tolerance::uniform(1.0, 2).unwrap()).unwrap();
//! let result = aa_run(&ps).unwrap();
//! assert_eq!(result.representatives()[0].coords(), &[0.5, 0.0]);
//! ```

pub mod agglomerative;
pub mod bench;
pub mod divisive;
pub mod error;
pub mod fixtures;
pub mod geometry;
pub mod grid;
pub mod pipeline;

pub use agglomerative::{
    aa_merge_step, aa_run, aa_run_traced, aa_run_with, AaOptions, AaState, MatrixRefresh, MergeTest,
};
pub use divisive::{da_redistribute, da_run, da_run_traced, da_run_with, da_split, DaState};
pub use error::{Result, ThinError};
pub use geometry::{
    central_ssq, centroid, in_neighborhood, is_collapsable, ssq_about, total_ssq, weighted_norm_2,
    weighted_norm_inf, NormMode, Partition, Point, PointSet, ThinningResult, Tolerance,
};
pub use grid::{grid_cell, grid_partition, CellIndex};
pub use pipeline::{thin, Algorithm, RunConfig, RunOutput, ThinOptions};
