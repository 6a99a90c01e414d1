//! Python bindings for the riforest anomaly detector.
//!
//! Matrices cross the boundary as lists of rows (`list[list[float]]`); any
//! sequence of float sequences, including a 2-D NumPy array's `.tolist()`, works.

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use riforest::eval::ImprovementMode;
use riforest::{Dataset, Error, ForestModel, RiForestParams, SplitStrategy};

fn to_py_err(err: Error) -> PyErr {
    match err {
        Error::Io { .. } => PyIOError::new_err(err.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn dataset(rows: Vec<Vec<f64>>, labels: Option<Vec<u8>>) -> PyResult<Dataset> {
    Dataset::from_rows(rows, labels).map_err(to_py_err)
}

#[allow(clippy::too_many_arguments)]
fn make_params(
    num_trees: usize,
    subsample_size: usize,
    num_bins: usize,
    entropy_threshold: f64,
    num_random_hyperplanes: usize,
    split_strategy: &str,
    use_random_hyperplanes: bool,
    use_path_length: bool,
    use_entropy_gate: bool,
    leaf_adjustment: bool,
    seed: u64,
) -> PyResult<RiForestParams> {
    let params = RiForestParams {
        num_trees,
        subsample_size,
        num_bins,
        entropy_threshold,
        num_random_hyperplanes,
        split_strategy: split_strategy.parse::<SplitStrategy>().map_err(to_py_err)?,
        use_random_hyperplanes,
        use_path_length,
        use_entropy_gate,
        leaf_adjustment,
        master_seed: seed,
    };
    riforest::validate_params(params).map_err(to_py_err)
}

/// Robust isolation forest. `fit` trains on a list of rows, `score` returns
/// anomaly scores in (0, 1], higher meaning more anomalous.
#[pyclass(name = "RiForest", module = "pyriforest")]
struct PyRiForest {
    params: RiForestParams,
    model: Option<ForestModel>,
}

impl PyRiForest {
    fn fitted(&self) -> PyResult<&ForestModel> {
        self.model
            .as_ref()
            .ok_or_else(|| PyValueError::new_err("model is not fitted; call fit() first"))
    }
}

#[pymethods]
impl PyRiForest {
    #[new]
    #[pyo3(signature = (
        num_trees = 100,
        subsample_size = 256,
        num_bins = 10,
        entropy_threshold = 0.8,
        num_random_hyperplanes = 5,
        split_strategy = "valley",
        use_random_hyperplanes = true,
        use_path_length = true,
        use_entropy_gate = true,
        leaf_adjustment = true,
        seed = 0,
    ))]
    #[allow(clippy::too_many_arguments)]
    fn new(
        num_trees: usize,
        subsample_size: usize,
        num_bins: usize,
        entropy_threshold: f64,
        num_random_hyperplanes: usize,
        split_strategy: &str,
        use_random_hyperplanes: bool,
        use_path_length: bool,
        use_entropy_gate: bool,
        leaf_adjustment: bool,
        seed: u64,
    ) -> PyResult<Self> {
        Ok(Self {
            params: make_params(
                num_trees,
                subsample_size,
                num_bins,
                entropy_threshold,
                num_random_hyperplanes,
                split_strategy,
                use_random_hyperplanes,
                use_path_length,
                use_entropy_gate,
                leaf_adjustment,
                seed,
            )?,
            model: None,
        })
    }

    fn fit(&mut self, py: Python<'_>, rows: Vec<Vec<f64>>) -> PyResult<()> {
        let data = dataset(rows, None)?;
        let params = self.params.clone();
        let model = py
            .detach(move || riforest::build_forest(&data, &params))
            .map_err(to_py_err)?;
        self.model = Some(model);
        Ok(())
    }

    fn score(&self, py: Python<'_>, rows: Vec<Vec<f64>>) -> PyResult<Vec<f64>> {
        let model = self.fitted()?;
        let data = dataset(rows, None)?;
        py.detach(|| riforest::score_dataset(&data, model))
            .map(|r| r.scores)
            .map_err(to_py_err)
    }

    /// Mean path length over all trees for each row.
    fn mean_path_lengths(&self, py: Python<'_>, rows: Vec<Vec<f64>>) -> PyResult<Vec<f64>> {
        let model = self.fitted()?;
        let data = dataset(rows, None)?;
        py.detach(|| riforest::score_dataset(&data, model))
            .map(|r| r.mean_path)
            .map_err(to_py_err)
    }

    fn save(&self, path: &str) -> PyResult<()> {
        riforest::save_model(self.fitted()?, path).map_err(to_py_err)
    }

    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        let model = riforest::load_model(path).map_err(to_py_err)?;
        Ok(Self {
            params: model.params.clone(),
            model: Some(model),
        })
    }

    #[getter]
    fn is_fitted(&self) -> bool {
        self.model.is_some()
    }

    #[getter]
    fn num_trees(&self) -> usize {
        self.params.num_trees
    }

    #[getter]
    fn c_psi(&self) -> f64 {
        riforest::c_factor(self.params.subsample_size)
    }

    #[getter]
    fn seed(&self) -> u64 {
        self.params.master_seed
    }

    fn __repr__(&self) -> String {
        let p = &self.params;
        format!(
            "RiForest(num_trees={}, subsample_size={}, num_bins={}, entropy_threshold={}, \
             num_random_hyperplanes={}, split_strategy='{}', seed={}, fitted={})",
            p.num_trees,
            p.subsample_size,
            p.num_bins,
            p.entropy_threshold,
            p.num_random_hyperplanes,
            p.split_strategy,
            p.master_seed,
            self.model.is_some()
        )
    }
}

#[pyfunction]
fn auroc(scores: Vec<f64>, labels: Vec<u8>) -> PyResult<f64> {
    riforest::auroc(&scores, &labels).map_err(to_py_err)
}

/// `mode` is "ratio" (relative to the mean, in percent) or "difference".
#[pyfunction]
#[pyo3(signature = (auroc, mean_auroc, mode = "ratio"))]
fn improvement_rate(auroc: f64, mean_auroc: f64, mode: &str) -> PyResult<f64> {
    let mode = match mode {
        "ratio" => ImprovementMode::Ratio,
        "difference" => ImprovementMode::Difference,
        other => return Err(PyValueError::new_err(format!("unknown mode '{other}'"))),
    };
    riforest::improvement_rate(auroc, mean_auroc, mode).map_err(to_py_err)
}

#[pyfunction]
fn coefficient_of_variation(values: Vec<f64>) -> PyResult<f64> {
    riforest::coefficient_of_variation(&values).map_err(to_py_err)
}

#[pyfunction]
fn harmonic(i: usize) -> f64 {
    riforest::harmonic(i)
}

#[pyfunction]
fn c_factor(psi: usize) -> f64 {
    riforest::c_factor(psi)
}

#[pyfunction]
fn dimension_entropy(values: Vec<f64>, num_bins: usize) -> PyResult<f64> {
    let h = riforest::build_histogram(&values, num_bins).map_err(to_py_err)?;
    Ok(riforest::dimension_entropy(&h))
}

/// Valley-emphasis split of `values` over `num_bins` equal-width bins, as a dict
/// with `t_star`, `split_point`, `objective`, `w_left`, `w_right`, `path_increment`.
#[pyfunction]
fn valley_split<'py>(
    py: Python<'py>,
    values: Vec<f64>,
    num_bins: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let h = riforest::build_histogram(&values, num_bins).map_err(to_py_err)?;
    let v = riforest::valley_emphasis(&h).map_err(to_py_err)?;
    let d = PyDict::new(py);
    d.set_item("t_star", v.t_star)?;
    d.set_item("split_point", v.split_point)?;
    d.set_item("objective", v.objective)?;
    d.set_item("w_left", v.w_left)?;
    d.set_item("w_right", v.w_right)?;
    d.set_item("path_increment", v.path_increment)?;
    Ok(d)
}

#[pyfunction]
fn blank_space_split(values: Vec<f64>) -> PyResult<(f64, f64)> {
    riforest::blank_space_split(&values).map_err(to_py_err)
}

/// Repeated fit/score runs on labeled rows; returns per-run AUROC, mean and CV.
#[pyfunction]
#[pyo3(signature = (rows, labels, repeats = 20, forest = None))]
fn repeated_benchmark<'py>(
    py: Python<'py>,
    rows: Vec<Vec<f64>>,
    labels: Vec<u8>,
    repeats: usize,
    forest: Option<PyRef<'py, PyRiForest>>,
) -> PyResult<Bound<'py, PyDict>> {
    let data = dataset(rows, Some(labels))?;
    let params = forest.map(|f| f.params.clone()).unwrap_or_default();
    let result = py
        .detach(|| riforest::repeated_benchmark(&data, &params, repeats))
        .map_err(to_py_err)?;
    let d = PyDict::new(py);
    d.set_item("per_run_auroc", result.per_run_auroc)?;
    d.set_item("mean_auroc", result.mean_auroc)?;
    d.set_item("cv", result.cv)?;
    d.set_item("wall_time_seconds", result.wall_time_seconds)?;
    Ok(d)
}

#[pymodule]
fn pyriforest(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyRiForest>()?;
    m.add_function(wrap_pyfunction!(auroc, m)?)?;
    m.add_function(wrap_pyfunction!(improvement_rate, m)?)?;
    m.add_function(wrap_pyfunction!(coefficient_of_variation, m)?)?;
    m.add_function(wrap_pyfunction!(harmonic, m)?)?;
    m.add_function(wrap_pyfunction!(c_factor, m)?)?;
    m.add_function(wrap_pyfunction!(dimension_entropy, m)?)?;
    m.add_function(wrap_pyfunction!(valley_split, m)?)?;
    m.add_function(wrap_pyfunction!(blank_space_split, m)?)?;
    m.add_function(wrap_pyfunction!(repeated_benchmark, m)?)?;
    Ok(())
}
