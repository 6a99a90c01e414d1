//! Robust isolation forest (RiForest) for unsupervised anomaly detection.
//!
//! Each tree splits on a hyperplane drawn from a candidate set made of the
//! original features plus a few soft sparse random projections. Candidates
//! whose projected histogram is nearly uniform (high normalized entropy) are
//! filtered out, the split point is chosen with the valley-emphasis
//! thresholding objective, and each split contributes a path-length increment
//! that shrinks as the split becomes more unbalanced.
//!
//! ```
//! use riforest::{build_forest, score_dataset, Dataset, RiForestParams};
//!
//! let mut rows = Vec::new();
//! for i in 0..200 {
//!     let t = i as f64 * 0.1;
//!     rows.push(vec![t.sin(), t.cos()]);
//! }
//! rows.push(vec![8.0, -8.0]);
//! let data = Dataset::from_rows(rows, None).unwrap();
//! let params = RiForestParams { num_trees: 20, master_seed: 7, ..Default::default() };
//! let forest = build_forest(&data, &params).unwrap();
//! let report = score_dataset(&data, &forest).unwrap();
//! let outlier = report.scores[200];
//! assert!(report.scores[..200].iter().all(|&s| s < outlier));
//! ```

pub mod builder;
pub mod cli;
pub mod error;
pub mod eval;
pub mod histogram;
pub mod io;
pub mod model;
pub mod projection;
pub mod scoring;
pub mod seed;

pub use builder::{build_forest, build_tree, BuildContext};
pub use error::{Error, Result};
pub use eval::{
    ablation_suite, auroc, coefficient_of_variation, improvement_rate, noise_robustness,
    repeated_benchmark, AblationReport, AblationVariant, BenchmarkResult, ImprovementMode,
    NoiseSweepResult,
};
pub use histogram::{
    blank_space_split, build_histogram, dimension_entropy, split_path_length, valley_emphasis,
    Histogram, ValleySplit,
};
pub use io::{load_csv, load_model, save_model};
pub use model::{
    standardize_apply, standardize_fit, subsample, validate_params, Dataset, ForestModel,
    RiForestParams, SplitStrategy, StandardizationStats, TreeModel, TreeNode,
};
pub use projection::{
    build_candidate_set, draw_sparsity, project, sample_projection_vector, HyperplaneKind,
    HyperplaneVector, SparsityDraw,
};
pub use scoring::{
    anomaly_score, c_factor, harmonic, score_dataset, tree_path_length, ScoreReport,
};
