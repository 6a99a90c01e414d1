//! Candidate hyperplanes: original features as unit vectors plus soft sparse
//! random projections with a per-tree sparsity.

use rand::Rng;

use crate::error::{Error, Result};
use crate::model::Dataset;

/// Redraw budget for all-zero random projection vectors.
pub const MAX_PROJECTION_ATTEMPTS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SparsityDraw {
    /// Probability that a coefficient is zero, in [0, 1).
    pub lambda: f64,
    /// `1 / (1 - lambda)`.
    pub s: f64,
}

impl SparsityDraw {
    pub fn from_lambda(lambda: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&lambda) {
            return Err(Error::InvalidParam {
                field: "lambda",
                reason: format!("sparsity must lie in [0, 1), got {lambda}"),
            });
        }
        Ok(Self {
            lambda,
            s: 1.0 / (1.0 - lambda),
        })
    }
}

/// Draws the tree's sparsity `lambda ~ U[0, 1)`.
pub fn draw_sparsity<R: Rng + ?Sized>(rng: &mut R) -> SparsityDraw {
    let lambda: f64 = rng.random();
    SparsityDraw {
        lambda,
        s: 1.0 / (1.0 - lambda),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HyperplaneKind {
    UnitBasis(usize),
    RandomProjection,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HyperplaneVector {
    coefficients: Vec<f64>,
    kind: HyperplaneKind,
}

impl HyperplaneVector {
    pub fn unit_basis(d: usize, index: usize) -> Self {
        assert!(index < d, "unit basis index {index} out of range for d = {d}");
        let mut coefficients = vec![0.0; d];
        coefficients[index] = 1.0;
        Self {
            coefficients,
            kind: HyperplaneKind::UnitBasis(index),
        }
    }

    /// Wraps explicit coefficients as a random-projection direction.
    pub fn from_coefficients(coefficients: Vec<f64>) -> Result<Self> {
        if coefficients.is_empty() {
            return Err(Error::EmptyInput);
        }
        if coefficients.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidParam {
                field: "coefficients",
                reason: "non-finite coefficient".into(),
            });
        }
        if coefficients.iter().all(|&c| c == 0.0) {
            return Err(Error::InvalidParam {
                field: "coefficients",
                reason: "all coefficients are zero".into(),
            });
        }
        Ok(Self {
            coefficients,
            kind: HyperplaneKind::RandomProjection,
        })
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn kind(&self) -> HyperplaneKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_unit_basis(&self) -> bool {
        matches!(self.kind, HyperplaneKind::UnitBasis(_))
    }

    /// Projects one row; the caller guarantees `row.len() == self.dim()`.
    #[inline]
    pub fn dot(&self, row: &[f64]) -> f64 {
        match self.kind {
            HyperplaneKind::UnitBasis(i) => row[i],
            HyperplaneKind::RandomProjection => row
                .iter()
                .zip(&self.coefficients)
                .map(|(x, c)| x * c)
                .sum(),
        }
    }
}

fn sample_coefficient<R: Rng + ?Sized>(draw: &SparsityDraw, scale: f64, rng: &mut R) -> f64 {
    let half = 0.5 / draw.s;
    let u: f64 = rng.random();
    // 1 - U[0,1) lies in (0, 1], so the nonzero branches never yield 0.
    if u < half {
        scale * (1.0 - rng.random::<f64>())
    } else if u < 2.0 * half {
        -scale * (1.0 - rng.random::<f64>())
    } else {
        0.0
    }
}

/// Soft sparse random projection vector: each coefficient is `sqrt(3s)·U(0,1)` or
/// `sqrt(3s)·U(-1,0)` with probability `1/(2s)` each and zero otherwise.
pub fn sample_projection_vector<R: Rng + ?Sized>(
    d: usize,
    draw: &SparsityDraw,
    rng: &mut R,
) -> Result<HyperplaneVector> {
    if d == 0 {
        return Err(Error::EmptyInput);
    }
    let scale = (3.0 * draw.s).sqrt();
    for _ in 0..MAX_PROJECTION_ATTEMPTS {
        let coefficients: Vec<f64> = (0..d).map(|_| sample_coefficient(draw, scale, rng)).collect();
        if coefficients.iter().any(|&c| c != 0.0) {
            return Ok(HyperplaneVector {
                coefficients,
                kind: HyperplaneKind::RandomProjection,
            });
        }
    }
    Err(Error::DegenerateSparsity {
        attempts: MAX_PROJECTION_ATTEMPTS,
    })
}

/// The `d` unit-basis vectors followed by `tau` random projections when `use_random` is set.
pub fn build_candidate_set<R: Rng + ?Sized>(
    d: usize,
    tau: usize,
    draw: &SparsityDraw,
    use_random: bool,
    rng: &mut R,
) -> Result<Vec<HyperplaneVector>> {
    let extra = if use_random { tau } else { 0 };
    let mut set = Vec::with_capacity(d + extra);
    set.extend((0..d).map(|i| HyperplaneVector::unit_basis(d, i)));
    for _ in 0..extra {
        set.push(sample_projection_vector(d, draw, rng)?);
    }
    Ok(set)
}

/// Projects every row of `data` onto `v`.
pub fn project(data: &Dataset, v: &HyperplaneVector) -> Result<Vec<f64>> {
    if data.n_cols() != v.dim() {
        return Err(Error::DimensionMismatch {
            expected: v.dim(),
            found: data.n_cols(),
        });
    }
    Ok(data.rows().map(|r| v.dot(r)).collect())
}

/// Projects the selected rows of `data` onto `v`, writing into `out`.
pub(crate) fn project_rows_into(
    data: &Dataset,
    rows: &[usize],
    v: &HyperplaneVector,
    out: &mut Vec<f64>,
) {
    out.clear();
    out.extend(rows.iter().map(|&i| v.dot(data.row(i))));
}
