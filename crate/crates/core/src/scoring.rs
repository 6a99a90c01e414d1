//! Path lengths through built trees and the normalized anomaly score.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{Dataset, ForestModel, TreeModel, TreeNode};

pub const EULER_GAMMA: f64 = 0.5772156649;

/// Harmonic number: exact for `i <= 1`, `ln i + gamma` otherwise.
pub fn harmonic(i: usize) -> f64 {
    match i {
        0 => 0.0,
        1 => 1.0,
        _ => (i as f64).ln() + EULER_GAMMA,
    }
}

/// Average unsuccessful-search path length in a binary search tree of `psi` points.
pub fn c_factor(psi: usize) -> f64 {
    match psi {
        0 | 1 => 0.0,
        2 => 1.0,
        _ => {
            let m = (psi - 1) as f64;
            2.0 * harmonic(psi - 1) - 2.0 * m / psi as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoreReport {
    pub scores: Vec<f64>,
    /// Mean path length over all trees, per row.
    pub mean_path: Vec<f64>,
}

/// Sum of the path increments from root to leaf for an already standardized row,
/// plus `c(size)` at an unresolved leaf when `leaf_adjustment` is set.
pub fn tree_path_length(row: &[f64], tree: &TreeModel, leaf_adjustment: bool) -> Result<f64> {
    if let TreeNode::Internal { split, .. } = tree.root() {
        if split.dim() != row.len() {
            return Err(Error::DimensionMismatch {
                expected: split.dim(),
                found: row.len(),
            });
        }
    }
    Ok(path_length_unchecked(row, tree, leaf_adjustment))
}

#[inline]
fn path_length_unchecked(row: &[f64], tree: &TreeModel, leaf_adjustment: bool) -> f64 {
    let mut h = 0.0;
    let mut i = 0;
    loop {
        match &tree.nodes[i] {
            TreeNode::Internal {
                split,
                split_point,
                path_increment,
                left,
                right,
            } => {
                h += path_increment;
                i = if split.dot(row) <= *split_point {
                    *left
                } else {
                    *right
                };
            }
            TreeNode::External { size } => {
                if leaf_adjustment && *size > 1 {
                    h += c_factor(*size);
                }
                return h;
            }
        }
    }
}

/// `2^(-E(h) / c(psi))`, clamped into (0, 1] to absorb rounding.
pub fn score_from_mean_path(mean_path: f64, c_psi: f64) -> f64 {
    if c_psi <= 0.0 {
        return 1.0;
    }
    (-mean_path / c_psi).exp2().clamp(f64::MIN_POSITIVE, 1.0)
}

fn mean_path_standardized(row: &[f64], forest: &ForestModel) -> f64 {
    let adjust = forest.params.leaf_adjustment;
    let total: f64 = forest
        .trees
        .iter()
        .map(|t| path_length_unchecked(row, t, adjust))
        .sum();
    total / forest.trees.len() as f64
}

/// Standardizes a raw row with the forest's statistics and scores it.
pub fn anomaly_score(row: &[f64], forest: &ForestModel) -> Result<f64> {
    let mut buf = Vec::with_capacity(row.len());
    forest.standardization.apply_row(row, &mut buf)?;
    Ok(score_from_mean_path(
        mean_path_standardized(&buf, forest),
        forest.c_psi,
    ))
}

/// Scores every row in order; rows are processed in parallel.
pub fn score_dataset(data: &Dataset, forest: &ForestModel) -> Result<ScoreReport> {
    if data.n_cols() != forest.num_features() {
        return Err(Error::DimensionMismatch {
            expected: forest.num_features(),
            found: data.n_cols(),
        });
    }
    let mean_path: Vec<f64> = (0..data.n_rows())
        .into_par_iter()
        .map_init(Vec::new, |buf, i| {
            forest
                .standardization
                .apply_row(data.row(i), buf)
                .expect("width checked above");
            mean_path_standardized(buf, forest)
        })
        .collect();
    let scores = mean_path
        .iter()
        .map(|&m| score_from_mean_path(m, forest.c_psi))
        .collect();
    Ok(ScoreReport { scores, mean_path })
}
