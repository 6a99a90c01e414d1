//! Shared data types, parameter validation, standardization and subsampling.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::projection::{HyperplaneVector, SparsityDraw};
use crate::scoring::c_factor;

/// Row-major numeric matrix with optional binary anomaly labels (1 = anomaly).
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    values: Vec<f64>,
    n_rows: usize,
    n_cols: usize,
    labels: Option<Vec<u8>>,
    column_names: Vec<String>,
}

impl Dataset {
    pub fn new(
        values: Vec<f64>,
        n_rows: usize,
        n_cols: usize,
        labels: Option<Vec<u8>>,
        column_names: Vec<String>,
    ) -> Result<Self> {
        if n_rows == 0 {
            return Err(Error::InvalidDataset("dataset has no rows".into()));
        }
        if n_cols == 0 {
            return Err(Error::InvalidDataset("dataset has no feature columns".into()));
        }
        if values.len() != n_rows * n_cols {
            return Err(Error::InvalidDataset(format!(
                "expected {} values for {n_rows}x{n_cols}, got {}",
                n_rows * n_cols,
                values.len()
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidDataset(format!(
                "non-finite value at row {}, column {}",
                pos / n_cols,
                pos % n_cols
            )));
        }
        if let Some(labels) = &labels {
            if labels.len() != n_rows {
                return Err(Error::InvalidDataset(format!(
                    "{} labels for {n_rows} rows",
                    labels.len()
                )));
            }
            if labels.iter().any(|&l| l > 1) {
                return Err(Error::InvalidDataset("labels must be 0 or 1".into()));
            }
        }
        if column_names.len() != n_cols {
            return Err(Error::InvalidDataset(format!(
                "{} column names for {n_cols} columns",
                column_names.len()
            )));
        }
        Ok(Self {
            values,
            n_rows,
            n_cols,
            labels,
            column_names,
        })
    }

    /// Builds a dataset from a list of equally long rows; columns are named `x0, x1, ...`.
    pub fn from_rows(rows: Vec<Vec<f64>>, labels: Option<Vec<u8>>) -> Result<Self> {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != n_cols) {
            return Err(Error::DimensionMismatch {
                expected: n_cols,
                found: bad.len(),
            });
        }
        let names = (0..n_cols).map(|j| format!("x{j}")).collect();
        Self::new(rows.into_iter().flatten().collect(), n_rows, n_cols, labels, names)
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n_cols..(i + 1) * self.n_cols]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.values.chunks_exact(self.n_cols)
    }

    pub fn column(&self, j: usize) -> impl Iterator<Item = f64> + '_ {
        self.rows().map(move |r| r[j])
    }

    pub fn labels(&self) -> Option<&[u8]> {
        self.labels.as_deref()
    }

    pub fn column_names(&self) -> &[String] {
        &self.column_names
    }

    /// Copies the given rows (in order) into a new unlabeled dataset.
    pub fn select_rows(&self, indices: &[usize]) -> Dataset {
        let mut values = Vec::with_capacity(indices.len() * self.n_cols);
        for &i in indices {
            values.extend_from_slice(self.row(i));
        }
        Dataset {
            values,
            n_rows: indices.len(),
            n_cols: self.n_cols,
            labels: None,
            column_names: self.column_names.clone(),
        }
    }

    /// Appends columns produced by `fill(row, extra_col)`, keeping labels.
    pub fn with_extra_columns(
        &self,
        count: usize,
        mut fill: impl FnMut(usize, usize) -> f64,
    ) -> Result<Dataset> {
        let n_cols = self.n_cols + count;
        let mut values = Vec::with_capacity(self.n_rows * n_cols);
        for (i, row) in self.rows().enumerate() {
            values.extend_from_slice(row);
            values.extend((0..count).map(|k| fill(i, k)));
        }
        let mut names = self.column_names.clone();
        names.extend((0..count).map(|k| format!("noise{k}")));
        Dataset::new(values, self.n_rows, n_cols, self.labels.clone(), names)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StandardizationStats {
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
}

impl StandardizationStats {
    pub fn dim(&self) -> usize {
        self.means.len()
    }

    /// Standardizes one row into `out`.
    pub fn apply_row(&self, row: &[f64], out: &mut Vec<f64>) -> Result<()> {
        if row.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: row.len(),
            });
        }
        out.clear();
        out.extend(
            row.iter()
                .zip(self.means.iter().zip(&self.stds))
                .map(|(&x, (&m, &s))| if s > 0.0 { (x - m) / s } else { 0.0 }),
        );
        Ok(())
    }
}

/// Per-column mean and population standard deviation.
pub fn standardize_fit(data: &Dataset) -> StandardizationStats {
    let n = data.n_rows() as f64;
    let d = data.n_cols();
    let mut means = vec![0.0; d];
    for row in data.rows() {
        for (m, &x) in means.iter_mut().zip(row) {
            *m += x;
        }
    }
    means.iter_mut().for_each(|m| *m /= n);
    let mut vars = vec![0.0; d];
    for row in data.rows() {
        for ((v, &x), &m) in vars.iter_mut().zip(row).zip(&means) {
            *v += (x - m) * (x - m);
        }
    }
    let stds = vars.into_iter().map(|v| (v / n).sqrt()).collect();
    StandardizationStats { means, stds }
}

/// `(x - mean) / std` per entry; zero-variance columns become all zeros.
pub fn standardize_apply(data: &Dataset, stats: &StandardizationStats) -> Result<Dataset> {
    if data.n_cols() != stats.dim() {
        return Err(Error::DimensionMismatch {
            expected: stats.dim(),
            found: data.n_cols(),
        });
    }
    let mut values = Vec::with_capacity(data.values.len());
    let mut buf = Vec::with_capacity(data.n_cols());
    for row in data.rows() {
        stats.apply_row(row, &mut buf)?;
        values.extend_from_slice(&buf);
    }
    Ok(Dataset {
        values,
        n_rows: data.n_rows,
        n_cols: data.n_cols,
        labels: data.labels.clone(),
        column_names: data.column_names.clone(),
    })
}

/// Row indices of a uniform sample without replacement of `min(psi, n)` rows.
pub fn subsample_indices<R: Rng + ?Sized>(n: usize, psi: usize, rng: &mut R) -> Vec<usize> {
    let k = psi.min(n);
    if k == n {
        return (0..n).collect();
    }
    rand::seq::index::sample(rng, n, k).into_vec()
}

/// Uniform subsample without replacement; labels are dropped.
pub fn subsample<R: Rng + ?Sized>(data: &Dataset, psi: usize, rng: &mut R) -> Dataset {
    data.select_rows(&subsample_indices(data.n_rows(), psi, rng))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitStrategy {
    /// Valley-emphasis threshold on the entropy histogram.
    Valley,
    /// Uniform split point over the projected range.
    Random,
    /// Midpoint of the widest gap between consecutive distinct values.
    Blank,
}

impl std::str::FromStr for SplitStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "valley" => Ok(Self::Valley),
            "random" => Ok(Self::Random),
            "blank" => Ok(Self::Blank),
            other => Err(Error::InvalidParam {
                field: "split_strategy",
                reason: format!("unknown strategy '{other}' (valley, random, blank)"),
            }),
        }
    }
}

impl std::fmt::Display for SplitStrategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Valley => "valley",
            Self::Random => "random",
            Self::Blank => "blank",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiForestParams {
    pub num_trees: usize,
    pub subsample_size: usize,
    pub num_bins: usize,
    pub entropy_threshold: f64,
    pub num_random_hyperplanes: usize,
    pub split_strategy: SplitStrategy,
    pub use_random_hyperplanes: bool,
    pub use_path_length: bool,
    /// When false every non-constant candidate is eligible (plain iForest baseline).
    pub use_entropy_gate: bool,
    /// Add `c(size)` for unresolved leaves when computing path lengths.
    pub leaf_adjustment: bool,
    pub master_seed: u64,
}

impl Default for RiForestParams {
    fn default() -> Self {
        Self {
            num_trees: 100,
            subsample_size: 256,
            num_bins: 10,
            entropy_threshold: 0.8,
            num_random_hyperplanes: 5,
            split_strategy: SplitStrategy::Valley,
            use_random_hyperplanes: true,
            use_path_length: true,
            use_entropy_gate: true,
            leaf_adjustment: true,
            master_seed: 0,
        }
    }
}

impl RiForestParams {
    /// Plain isolation forest expressed as a configuration: random split points on
    /// original features only, unit path increments and no entropy gate.
    pub fn isolation_forest_baseline(&self) -> Self {
        Self {
            split_strategy: SplitStrategy::Random,
            use_random_hyperplanes: false,
            use_path_length: false,
            use_entropy_gate: false,
            ..self.clone()
        }
    }

    /// `ceil(log2 psi)`, never below 1.
    pub fn height_limit(&self) -> usize {
        let psi = self.subsample_size.max(2);
        (usize::BITS - (psi - 1).leading_zeros()) as usize
    }
}

fn invalid(field: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParam {
        field,
        reason: reason.into(),
    }
}

/// Returns the params unchanged when every invariant holds, otherwise the first violation.
pub fn validate_params(params: RiForestParams) -> Result<RiForestParams> {
    if params.num_trees == 0 {
        return Err(invalid("num_trees", "must be positive"));
    }
    if params.subsample_size == 0 {
        return Err(invalid("subsample_size", "must be positive"));
    }
    if params.num_bins < 2 {
        return Err(invalid("num_bins", "must be at least 2"));
    }
    if params.split_strategy == SplitStrategy::Valley && params.num_bins < 3 {
        return Err(invalid(
            "num_bins",
            "valley split needs at least 3 bins for an interior threshold",
        ));
    }
    let alpha = params.entropy_threshold;
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(invalid(
            "entropy_threshold",
            format!("must lie in (0, 1], got {alpha}"),
        ));
    }
    Ok(params)
}

#[derive(Debug, Clone, PartialEq)]
pub enum TreeNode {
    Internal {
        split: HyperplaneVector,
        split_point: f64,
        /// Path-length increment in (0, 1].
        path_increment: f64,
        left: usize,
        right: usize,
    },
    External {
        size: usize,
    },
}

/// One tree, stored as a pre-order arena with the root at index 0.
#[derive(Debug, Clone, PartialEq)]
pub struct TreeModel {
    pub nodes: Vec<TreeNode>,
    pub sparsity: SparsityDraw,
    pub height_limit: usize,
}

impl TreeModel {
    pub fn root(&self) -> &TreeNode {
        &self.nodes[0]
    }

    /// Number of edges on the longest root-to-leaf path.
    pub fn depth(&self) -> usize {
        fn go(nodes: &[TreeNode], i: usize) -> usize {
            match &nodes[i] {
                TreeNode::External { .. } => 0,
                TreeNode::Internal { left, right, .. } => {
                    1 + go(nodes, *left).max(go(nodes, *right))
                }
            }
        }
        go(&self.nodes, 0)
    }

    pub fn internal_nodes(&self) -> impl Iterator<Item = &TreeNode> {
        self.nodes
            .iter()
            .filter(|n| matches!(n, TreeNode::Internal { .. }))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForestModel {
    pub trees: Vec<TreeModel>,
    pub params: RiForestParams,
    pub standardization: StandardizationStats,
    pub c_psi: f64,
}

impl ForestModel {
    pub fn num_features(&self) -> usize {
        self.standardization.dim()
    }

    /// Checks the structural invariants of a forest (used after loading).
    pub fn check(&self) -> std::result::Result<(), String> {
        let d = self.num_features();
        if self.standardization.stds.len() != d {
            return Err("standardization means and stds differ in length".into());
        }
        if self.standardization.stds.iter().any(|s| s.is_nan() || *s < 0.0) {
            return Err("negative or NaN standard deviation".into());
        }
        if self.trees.len() != self.params.num_trees {
            return Err(format!(
                "{} trees stored but num_trees = {}",
                self.trees.len(),
                self.params.num_trees
            ));
        }
        if (self.c_psi - c_factor(self.params.subsample_size)).abs() > 1e-12 {
            return Err("c_psi does not match the subsample size".into());
        }
        for (k, tree) in self.trees.iter().enumerate() {
            if tree.nodes.is_empty() {
                return Err(format!("tree {k} has no nodes"));
            }
            for (i, node) in tree.nodes.iter().enumerate() {
                if let TreeNode::Internal {
                    split,
                    split_point,
                    path_increment,
                    left,
                    right,
                } = node
                {
                    if split.dim() != d {
                        return Err(format!("tree {k} node {i}: split vector has wrong length"));
                    }
                    if !split_point.is_finite() {
                        return Err(format!("tree {k} node {i}: non-finite split point"));
                    }
                    if !(*path_increment > 0.0 && *path_increment <= 1.0) {
                        return Err(format!("tree {k} node {i}: path increment out of range"));
                    }
                    for child in [*left, *right] {
                        if child <= i || child >= tree.nodes.len() {
                            return Err(format!("tree {k} node {i}: dangling child {child}"));
                        }
                    }
                }
            }
        }
        Ok(())
    }
}
