//! CSV ingestion and the versioned JSON model document.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Dataset, ForestModel, RiForestParams, StandardizationStats, TreeModel, TreeNode};
use crate::projection::{HyperplaneVector, SparsityDraw};

pub const MODEL_FORMAT_VERSION: u64 = 1;

/// Reads a headered CSV; every column except `label_column` must hold finite
/// numbers. The label column, when present, must hold 0 or 1.
pub fn load_csv(path: impl AsRef<Path>, label_column: &str) -> Result<Dataset> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_csv(&text, label_column)
}

pub fn parse_csv(text: &str, label_column: &str) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| Error::Csv(e.to_string()))?
        .clone();
    let label_idx = headers.iter().position(|h| h == label_column);
    let feature_idx: Vec<usize> = (0..headers.len()).filter(|&i| Some(i) != label_idx).collect();
    let column_names: Vec<String> = feature_idx.iter().map(|&i| headers[i].to_string()).collect();

    let mut values = Vec::new();
    let mut labels = label_idx.map(|_| Vec::new());
    let mut n_rows = 0;
    for (r, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Csv(e.to_string()))?;
        let row = r + 1;
        if record.len() != headers.len() {
            return Err(Error::Csv(format!(
                "row {row} has {} fields, header has {}",
                record.len(),
                headers.len()
            )));
        }
        for &i in &feature_idx {
            let cell = &record[i];
            match cell.parse::<f64>() {
                Ok(v) if v.is_finite() => values.push(v),
                _ => {
                    return Err(Error::ParseCell {
                        row,
                        column: headers[i].to_string(),
                        value: cell.to_string(),
                    })
                }
            }
        }
        if let (Some(li), Some(labels)) = (label_idx, labels.as_mut()) {
            let cell = &record[li];
            let label = match cell.parse::<f64>() {
                Ok(0.0) => 0,
                Ok(1.0) => 1,
                _ => {
                    return Err(Error::InvalidLabel {
                        row,
                        value: cell.to_string(),
                    })
                }
            };
            labels.push(label);
        }
        n_rows += 1;
    }
    if n_rows == 0 {
        return Err(Error::Csv("file has a header but no data rows".into()));
    }
    Dataset::new(values, n_rows, column_names.len(), labels, column_names)
}

#[derive(Debug, Serialize, Deserialize)]
struct ModelDoc {
    format_version: u64,
    params: RiForestParams,
    standardization: StandardizationStats,
    c_psi: f64,
    trees: Vec<TreeDoc>,
}

#[derive(Debug, Serialize, Deserialize)]
struct TreeDoc {
    lambda: f64,
    height_limit: usize,
    nodes: Vec<NodeDoc>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum VectorKind {
    Unit,
    Random,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "type")]
enum NodeDoc {
    #[serde(rename = "int")]
    Internal {
        kind: VectorKind,
        /// Sparse `(index, value)` pairs.
        coeffs: Vec<(usize, f64)>,
        q: f64,
        pl: f64,
        left: usize,
        right: usize,
    },
    #[serde(rename = "ext")]
    External { size: usize },
}

fn tree_to_doc(tree: &TreeModel) -> TreeDoc {
    let nodes = tree
        .nodes
        .iter()
        .map(|node| match node {
            TreeNode::Internal {
                split,
                split_point,
                path_increment,
                left,
                right,
            } => NodeDoc::Internal {
                kind: if split.is_unit_basis() {
                    VectorKind::Unit
                } else {
                    VectorKind::Random
                },
                coeffs: split
                    .coefficients()
                    .iter()
                    .enumerate()
                    .filter(|(_, &c)| c != 0.0)
                    .map(|(i, &c)| (i, c))
                    .collect(),
                q: *split_point,
                pl: *path_increment,
                left: *left,
                right: *right,
            },
            TreeNode::External { size } => NodeDoc::External { size: *size },
        })
        .collect();
    TreeDoc {
        lambda: tree.sparsity.lambda,
        height_limit: tree.height_limit,
        nodes,
    }
}

fn structure(msg: impl Into<String>) -> Error {
    Error::ModelStructure(msg.into())
}

fn doc_to_tree(doc: TreeDoc, d: usize, k: usize) -> Result<TreeModel> {
    let sparsity = SparsityDraw::from_lambda(doc.lambda)
        .map_err(|_| structure(format!("tree {k}: lambda {} out of range", doc.lambda)))?;
    let nodes = doc
        .nodes
        .into_iter()
        .enumerate()
        .map(|(i, node)| match node {
            NodeDoc::External { size } => Ok(TreeNode::External { size }),
            NodeDoc::Internal {
                kind,
                coeffs,
                q,
                pl,
                left,
                right,
            } => {
                let mut dense = vec![0.0; d];
                for (j, c) in coeffs {
                    if j >= d {
                        return Err(structure(format!(
                            "tree {k} node {i}: coefficient index {j} out of range"
                        )));
                    }
                    dense[j] = c;
                }
                let split = match kind {
                    VectorKind::Unit => {
                        let nonzero: Vec<usize> =
                            (0..d).filter(|&j| dense[j] != 0.0).collect();
                        match nonzero.as_slice() {
                            [j] if dense[*j] == 1.0 => HyperplaneVector::unit_basis(d, *j),
                            _ => {
                                return Err(structure(format!(
                                    "tree {k} node {i}: unit vector is not a basis vector"
                                )))
                            }
                        }
                    }
                    VectorKind::Random => HyperplaneVector::from_coefficients(dense)
                        .map_err(|e| structure(format!("tree {k} node {i}: {e}")))?,
                };
                Ok(TreeNode::Internal {
                    split,
                    split_point: q,
                    path_increment: pl,
                    left,
                    right,
                })
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TreeModel {
        nodes,
        sparsity,
        height_limit: doc.height_limit,
    })
}

pub fn model_to_string(forest: &ForestModel) -> String {
    let doc = ModelDoc {
        format_version: MODEL_FORMAT_VERSION,
        params: forest.params.clone(),
        standardization: forest.standardization.clone(),
        c_psi: forest.c_psi,
        trees: forest.trees.iter().map(tree_to_doc).collect(),
    };
    serde_json::to_string(&doc).expect("model document serializes")
}

pub fn model_from_str(text: &str) -> Result<ForestModel> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| structure(e.to_string()))?;
    let version = value
        .get("format_version")
        .and_then(serde_json::Value::as_u64)
        .ok_or_else(|| structure("missing format_version"))?;
    if version != MODEL_FORMAT_VERSION {
        return Err(Error::ModelVersion {
            found: version,
            expected: MODEL_FORMAT_VERSION,
        });
    }
    let doc: ModelDoc = serde_json::from_value(value).map_err(|e| structure(e.to_string()))?;
    let d = doc.standardization.means.len();
    if d == 0 {
        return Err(structure("model has zero features"));
    }
    let trees = doc
        .trees
        .into_iter()
        .enumerate()
        .map(|(k, t)| doc_to_tree(t, d, k))
        .collect::<Result<Vec<_>>>()?;
    let forest = ForestModel {
        trees,
        params: doc.params,
        standardization: doc.standardization,
        c_psi: doc.c_psi,
    };
    forest.check().map_err(Error::ModelStructure)?;
    Ok(forest)
}

pub fn save_model(forest: &ForestModel, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, model_to_string(forest)).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load_model(path: impl AsRef<Path>) -> Result<ForestModel> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    model_from_str(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builder::build_forest;
    use crate::projection::HyperplaneKind;

    #[test]
    fn csv_with_label_column() {
        let data = parse_csv("a,b,label\n1,2,0\n3.5,-4,1\n", "label").unwrap();
        assert_eq!(data.n_cols(), 2);
        assert_eq!(data.n_rows(), 2);
        assert_eq!(data.labels(), Some(&[0u8, 1][..]));
        assert_eq!(data.column_names(), &["a".to_string(), "b".to_string()]);
        assert_eq!(data.row(1), &[3.5, -4.0]);
    }

    #[test]
    fn csv_without_label_column() {
        let data = parse_csv("a,b\n1,2\n", "label").unwrap();
        assert!(data.labels().is_none());
        assert_eq!(data.n_cols(), 2);
    }

    #[test]
    fn csv_nan_cell_is_named() {
        let err = parse_csv("a,b\n1,2\n3,NaN\n", "label").unwrap_err();
        match err {
            Error::ParseCell { row, column, value } => {
                assert_eq!((row, column.as_str(), value.as_str()), (2, "b", "NaN"));
            }
            other => panic!("unexpected {other}"),
        }
        assert!(matches!(
            parse_csv("a\nfoo\n", "label"),
            Err(Error::ParseCell { .. })
        ));
    }

    #[test]
    fn csv_bad_label_and_empty_body() {
        assert!(matches!(
            parse_csv("a,label\n1,2\n", "label"),
            Err(Error::InvalidLabel { row: 1, .. })
        ));
        assert!(matches!(parse_csv("a,b\n", "label"), Err(Error::Csv(_))));
    }

    #[test]
    fn missing_file() {
        assert!(matches!(
            load_csv("/nonexistent/file.csv", "label"),
            Err(Error::Io { .. })
        ));
    }

    fn small_forest() -> ForestModel {
        let rows: Vec<Vec<f64>> = (0..120)
            .map(|i| vec![(i as f64 * 0.7).sin() * 3.0, (i as f64).sqrt(), 1.0])
            .collect();
        let data = Dataset::from_rows(rows, None).unwrap();
        let params = RiForestParams {
            num_trees: 8,
            subsample_size: 64,
            master_seed: 42,
            ..Default::default()
        };
        build_forest(&data, &params).unwrap()
    }

    #[test]
    fn model_round_trip_is_exact() {
        let forest = small_forest();
        let text = model_to_string(&forest);
        let loaded = model_from_str(&text).unwrap();
        assert_eq!(loaded, forest);
    }

    #[test]
    fn truncated_model_rejected() {
        let text = model_to_string(&small_forest());
        let cut = &text[..text.len() / 2];
        assert!(matches!(model_from_str(cut), Err(Error::ModelStructure(_))));
    }

    #[test]
    fn version_mismatch_rejected() {
        let text = model_to_string(&small_forest());
        let mut value: serde_json::Value = serde_json::from_str(&text).unwrap();
        value["format_version"] = serde_json::json!(999);
        assert!(matches!(
            model_from_str(&value.to_string()),
            Err(Error::ModelVersion { found: 999, .. })
        ));
    }

    #[test]
    fn dangling_child_and_bad_increment_rejected() {
        let text = model_to_string(&small_forest());
        let value: serde_json::Value = serde_json::from_str(&text).unwrap();
        let int_node = value["trees"][0]["nodes"]
            .as_array()
            .unwrap()
            .iter()
            .position(|n| n["type"] == "int")
            .unwrap();

        let mut dangling = value.clone();
        dangling["trees"][0]["nodes"][int_node]["left"] = serde_json::json!(100_000);
        assert!(matches!(
            model_from_str(&dangling.to_string()),
            Err(Error::ModelStructure(_))
        ));

        let mut bad_pl = value;
        bad_pl["trees"][0]["nodes"][int_node]["pl"] = serde_json::json!(1.5);
        assert!(matches!(
            model_from_str(&bad_pl.to_string()),
            Err(Error::ModelStructure(_))
        ));
    }

    #[test]
    fn unit_kind_survives_round_trip() {
        let forest = small_forest();
        let loaded = model_from_str(&model_to_string(&forest)).unwrap();
        for (a, b) in forest.trees.iter().zip(&loaded.trees) {
            for (na, nb) in a.nodes.iter().zip(&b.nodes) {
                if let (
                    TreeNode::Internal { split: sa, .. },
                    TreeNode::Internal { split: sb, .. },
                ) = (na, nb)
                {
                    assert_eq!(sa.kind(), sb.kind());
                    if let HyperplaneKind::UnitBasis(i) = sa.kind() {
                        assert_eq!(sb.coefficients()[i], 1.0);
                    }
                }
            }
        }
    }
}
