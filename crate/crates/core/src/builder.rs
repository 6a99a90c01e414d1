//! Tree and forest construction.
//!
//! A node draws a fresh candidate set (unit vectors plus random projections
//! with the tree's sparsity), keeps the candidates whose normalized histogram
//! entropy falls below the threshold, and splits on one of them with the
//! configured strategy. When no candidate passes the gate it splits a random
//! candidate at the midpoint of its projected range with a unit increment.

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::histogram::{
    blank_space_split, build_histogram, dimension_entropy, min_max, valley_emphasis, Histogram,
};
use crate::model::{
    standardize_apply, standardize_fit, subsample_indices, validate_params, Dataset, ForestModel,
    RiForestParams, SplitStrategy, TreeModel, TreeNode,
};
use crate::projection::{
    build_candidate_set, draw_sparsity, project_rows_into, sample_projection_vector,
    HyperplaneVector, SparsityDraw,
};
use crate::scoring::c_factor;
use crate::seed::{self, StreamRng};

/// How an internal node chose its split point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplitKind {
    Valley,
    Random,
    Blank,
    /// No candidate passed the entropy gate (or valley found no threshold).
    Midpoint,
}

/// Build-time record of one internal node, collected by [`build_tree_traced`].
#[derive(Debug, Clone, PartialEq)]
pub struct NodeTrace {
    pub node: usize,
    pub depth: usize,
    pub rows: Vec<usize>,
    pub left_rows: Vec<usize>,
    pub right_rows: Vec<usize>,
    pub kind: SplitKind,
    /// Normalized entropy of the chosen projection, when the gate evaluated it.
    pub entropy: Option<f64>,
}

/// Per-tree build state: parameters, height limit, sparsity and the tree's rng stream.
pub struct BuildContext<'a> {
    pub params: &'a RiForestParams,
    pub height_limit: usize,
    pub sparsity: SparsityDraw,
    pub rng: StreamRng,
}

impl<'a> BuildContext<'a> {
    pub fn new(params: &'a RiForestParams, sparsity: SparsityDraw, rng: StreamRng) -> Self {
        Self {
            params,
            height_limit: params.height_limit(),
            sparsity,
            rng,
        }
    }
}

struct Gated {
    candidate: usize,
    histogram: Option<Histogram>,
    entropy: Option<f64>,
}

struct TreeBuilder<'a, 'c> {
    data: &'a Dataset,
    ctx: &'a mut BuildContext<'c>,
    nodes: Vec<TreeNode>,
    trace: Option<Vec<NodeTrace>>,
    scratch: Vec<f64>,
}

impl TreeBuilder<'_, '_> {
    fn grow(&mut self, rows: Vec<usize>, depth: usize) -> Result<usize> {
        let index = self.nodes.len();
        self.nodes.push(TreeNode::External { size: rows.len() });
        if depth >= self.ctx.height_limit || rows.len() <= 1 {
            return Ok(index);
        }
        let Some(split) = self.choose_split(&rows)? else {
            return Ok(index);
        };
        let (left_rows, right_rows): (Vec<usize>, Vec<usize>) = rows
            .iter()
            .partition(|&&i| split.vector.dot(self.data.row(i)) <= split.point);
        if left_rows.is_empty() || right_rows.is_empty() {
            return Ok(index);
        }
        if let Some(trace) = &mut self.trace {
            trace.push(NodeTrace {
                node: index,
                depth,
                rows: rows.clone(),
                left_rows: left_rows.clone(),
                right_rows: right_rows.clone(),
                kind: split.kind,
                entropy: split.entropy,
            });
        }
        drop(rows);
        let left = self.grow(left_rows, depth + 1)?;
        let right = self.grow(right_rows, depth + 1)?;
        self.nodes[index] = TreeNode::Internal {
            split: split.vector,
            split_point: split.point,
            path_increment: split.increment,
            left,
            right,
        };
        Ok(index)
    }

    fn choose_split(&mut self, rows: &[usize]) -> Result<Option<ChosenSplit>> {
        let params = self.ctx.params;
        let candidates = node_candidates(
            self.data.n_cols(),
            params.num_random_hyperplanes,
            &self.ctx.sparsity,
            params.use_random_hyperplanes,
            &mut self.ctx.rng,
        )?;

        let mut usable = Vec::with_capacity(candidates.len());
        let mut gated = Vec::new();
        for (c, v) in candidates.iter().enumerate() {
            project_rows_into(self.data, rows, v, &mut self.scratch);
            let (lo, hi) = min_max(&self.scratch);
            if lo == hi {
                continue;
            }
            usable.push(c);
            if params.use_entropy_gate {
                let h = build_histogram(&self.scratch, params.num_bins)?;
                let entropy = dimension_entropy(&h);
                if entropy < params.entropy_threshold {
                    gated.push(Gated {
                        candidate: c,
                        histogram: Some(h),
                        entropy: Some(entropy),
                    });
                }
            } else {
                gated.push(Gated {
                    candidate: c,
                    histogram: None,
                    entropy: None,
                });
            }
        }
        if usable.is_empty() {
            return Ok(None);
        }

        let rng = &mut self.ctx.rng;
        if gated.is_empty() {
            let c = usable[rng.random_range(0..usable.len())];
            let vector = candidates[c].clone();
            project_rows_into(self.data, rows, &vector, &mut self.scratch);
            let (lo, hi) = min_max(&self.scratch);
            return Ok(Some(ChosenSplit {
                vector,
                point: lo + (hi - lo) / 2.0,
                increment: 1.0,
                kind: SplitKind::Midpoint,
                entropy: None,
            }));
        }

        let pick = gated.swap_remove(rng.random_range(0..gated.len()));
        let vector = candidates[pick.candidate].clone();
        project_rows_into(self.data, rows, &vector, &mut self.scratch);
        let (lo, hi) = min_max(&self.scratch);
        let chosen = match params.split_strategy {
            SplitStrategy::Valley => {
                let h = match pick.histogram {
                    Some(h) => h,
                    None => build_histogram(&self.scratch, params.num_bins)?,
                };
                match valley_emphasis(&h) {
                    Ok(v) => ChosenSplit {
                        vector,
                        point: v.split_point,
                        increment: if params.use_path_length {
                            v.path_increment
                        } else {
                            1.0
                        },
                        kind: SplitKind::Valley,
                        entropy: pick.entropy,
                    },
                    Err(_) => ChosenSplit {
                        vector,
                        point: lo + (hi - lo) / 2.0,
                        increment: 1.0,
                        kind: SplitKind::Midpoint,
                        entropy: pick.entropy,
                    },
                }
            }
            SplitStrategy::Random => ChosenSplit {
                vector,
                point: rng.random_range(lo..hi),
                increment: 1.0,
                kind: SplitKind::Random,
                entropy: pick.entropy,
            },
            SplitStrategy::Blank => {
                let (point, _) = blank_space_split(&self.scratch)?;
                ChosenSplit {
                    vector,
                    point,
                    increment: 1.0,
                    kind: SplitKind::Blank,
                    entropy: pick.entropy,
                }
            }
        };
        Ok(Some(chosen))
    }
}

/// Candidate set for one node. At sparsity close to 1 with few features a random
/// vector can stay all-zero through every redraw; such a vector is left out.
fn node_candidates(
    d: usize,
    tau: usize,
    draw: &SparsityDraw,
    use_random: bool,
    rng: &mut StreamRng,
) -> Result<Vec<HyperplaneVector>> {
    let mut set = build_candidate_set(d, 0, draw, false, rng)?;
    if use_random {
        for _ in 0..tau {
            match sample_projection_vector(d, draw, rng) {
                Ok(v) => set.push(v),
                Err(Error::DegenerateSparsity { .. }) => {}
                Err(e) => return Err(e),
            }
        }
    }
    Ok(set)
}

struct ChosenSplit {
    vector: HyperplaneVector,
    point: f64,
    increment: f64,
    kind: SplitKind,
    entropy: Option<f64>,
}

fn build(
    subsample: &Dataset,
    ctx: &mut BuildContext<'_>,
    traced: bool,
) -> Result<(TreeModel, Option<Vec<NodeTrace>>)> {
    let height_limit = ctx.height_limit;
    let sparsity = ctx.sparsity;
    let mut builder = TreeBuilder {
        data: subsample,
        ctx,
        nodes: Vec::new(),
        trace: traced.then(Vec::new),
        scratch: Vec::with_capacity(subsample.n_rows()),
    };
    builder.grow((0..subsample.n_rows()).collect(), 0)?;
    let tree = TreeModel {
        nodes: builder.nodes,
        sparsity,
        height_limit,
    };
    Ok((tree, builder.trace))
}

/// Grows one tree on an (already standardized) subsample.
pub fn build_tree(subsample: &Dataset, ctx: &mut BuildContext<'_>) -> Result<TreeModel> {
    build(subsample, ctx, false).map(|(tree, _)| tree)
}

/// Like [`build_tree`], also returning a record of every internal node's rows,
/// split kind and gate entropy. Row indices refer to `subsample`.
pub fn build_tree_traced(
    subsample: &Dataset,
    ctx: &mut BuildContext<'_>,
) -> Result<(TreeModel, Vec<NodeTrace>)> {
    build(subsample, ctx, true).map(|(tree, trace)| (tree, trace.unwrap_or_default()))
}

/// Builds tree `k` of a forest from the standardized training data.
pub fn build_forest_tree(
    standardized: &Dataset,
    params: &RiForestParams,
    k: usize,
) -> Result<TreeModel> {
    let mut rng = seed::stream(params.master_seed, seed::TREE_STREAM, k as u64);
    let sparsity = draw_sparsity(&mut rng);
    let rows = subsample_indices(standardized.n_rows(), params.subsample_size, &mut rng);
    let sample = standardized.select_rows(&rows);
    let mut ctx = BuildContext::new(params, sparsity, rng);
    build_tree(&sample, &mut ctx)
}

/// Standardizes `data`, then builds `num_trees` trees in parallel. Tree `k`
/// uses its own rng stream derived from `(master_seed, k)`, so the forest is
/// identical for a given seed regardless of thread scheduling.
pub fn build_forest(data: &Dataset, params: &RiForestParams) -> Result<ForestModel> {
    let params = validate_params(params.clone())?;
    let standardization = standardize_fit(data);
    let standardized = standardize_apply(data, &standardization)?;
    let trees = (0..params.num_trees)
        .into_par_iter()
        .map(|k| build_forest_tree(&standardized, &params, k))
        .collect::<Result<Vec<_>>>()?;
    Ok(ForestModel {
        trees,
        c_psi: c_factor(params.subsample_size),
        params,
        standardization,
    })
}
