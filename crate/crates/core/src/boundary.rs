//! Per-reference identity boundaries.
//!
//! Boundary `i` is the SVM separating `W \ {w_i}` by its similarity labels;
//! its unit normal points toward the codes that look like reference `i`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::rng::{derive_seed, stream};
use crate::similarity::{norm, LabelRow};
use crate::svm::{train_rows, SvmConfig, TrainingStats};

#[derive(Debug, Clone, PartialEq)]
pub struct IdentityBoundary {
    pub reference: usize,
    /// Unit normal, excluding the bias component.
    pub normal: Vec<f64>,
    /// Bias divided by the weight norm. Not used for sampling.
    pub intercept: f64,
    pub stats: Option<TrainingStats>,
}

impl IdentityBoundary {
    /// Signed distance of `x` from the hyperplane.
    pub fn signed_margin(&self, x: &[f64]) -> f64 {
        crate::similarity::dot(&self.normal, x) + self.intercept
    }
}

pub fn boundary_from_svm(reference: usize, weights: &[f64], bias: f64) -> Result<IdentityBoundary> {
    let n = norm(weights);
    if n == 0.0 || !n.is_finite() {
        return Err(Error::NoDirection);
    }
    Ok(IdentityBoundary {
        reference,
        normal: weights.iter().map(|w| w / n).collect(),
        intercept: bias / n,
        stats: None,
    })
}

/// Seed of the permutation schedule used for reference `i`.
pub fn reference_seed(master: u64, reference: usize) -> u64 {
    derive_seed(master, &[stream::SVM, reference as u64])
}

/// Outcome of training every reference; failures do not stop the others.
#[derive(Debug)]
pub struct BoundarySet {
    pub dim: usize,
    pub outcomes: Vec<Result<IdentityBoundary>>,
}

impl BoundarySet {
    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }

    pub fn trained(&self) -> impl Iterator<Item = &IdentityBoundary> {
        self.outcomes.iter().filter_map(|o| o.as_ref().ok())
    }

    pub fn failures(&self) -> impl Iterator<Item = (usize, &Error)> {
        self.outcomes
            .iter()
            .enumerate()
            .filter_map(|(i, o)| o.as_ref().err().map(|e| (i, e)))
    }

    /// `m x (d+1)` rows of `normal || intercept`; failed references are all zeros.
    pub fn to_matrix(&self) -> Matrix {
        let mut mat = Matrix::zeros(self.outcomes.len(), self.dim + 1);
        for (i, o) in self.outcomes.iter().enumerate() {
            if let Ok(b) = o {
                let row = mat.row_mut(i);
                row[..self.dim].copy_from_slice(&b.normal);
                row[self.dim] = b.intercept;
            }
        }
        mat
    }

    /// Inverse of [`BoundarySet::to_matrix`]. Training stats are not stored in
    /// the matrix; zero-normal rows come back as failures.
    pub fn from_matrix(mat: &Matrix) -> Result<Self> {
        if mat.cols() < 2 {
            return Err(Error::DimensionMismatch(format!(
                "boundary matrix needs at least 2 columns, got {}",
                mat.cols()
            )));
        }
        let dim = mat.cols() - 1;
        let outcomes = mat
            .iter_rows()
            .enumerate()
            .map(|(i, row)| {
                let normal = &row[..dim];
                if normal.iter().all(|&v| v == 0.0) {
                    return Err(Error::NoDirection);
                }
                Ok(IdentityBoundary {
                    reference: i,
                    normal: normal.to_vec(),
                    intercept: row[dim],
                    stats: None,
                })
            })
            .collect();
        Ok(BoundarySet { dim, outcomes })
    }
}

/// Per-reference training summary for the JSON sidecar.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryReport {
    pub reference: usize,
    #[serde(flatten, skip_serializing_if = "Option::is_none")]
    pub stats: Option<TrainingStats>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl BoundarySet {
    pub fn reports(&self) -> Vec<BoundaryReport> {
        self.outcomes
            .iter()
            .enumerate()
            .map(|(i, o)| match o {
                Ok(b) => BoundaryReport {
                    reference: i,
                    stats: b.stats.clone(),
                    error: None,
                },
                Err(e) => BoundaryReport {
                    reference: i,
                    stats: None,
                    error: Some(e.to_string()),
                },
            })
            .collect()
    }
}

/// Trains boundary `i` on the rows of `w` other than `i`, for every `i`.
///
/// `cfg.seed` is the master seed; reference `i` shuffles with
/// [`reference_seed`], so the result does not depend on thread count.
pub fn train_all_boundaries(
    w: &Matrix,
    labels: &[LabelRow],
    cfg: &SvmConfig,
) -> Result<BoundarySet> {
    cfg.validate()?;
    let m = w.rows();
    if labels.len() != m {
        return Err(Error::DimensionMismatch(format!(
            "{m} latent codes but {} label rows",
            labels.len()
        )));
    }
    if let Some((r, c)) = w.first_non_finite() {
        return Err(Error::NonFinite { row: r, col: c });
    }
    for (i, row) in labels.iter().enumerate() {
        if row.reference != i || row.labels.len() + 1 != m {
            return Err(Error::DimensionMismatch(format!(
                "label row {i} (reference {}, {} labels) does not align with {m} latent codes",
                row.reference,
                row.labels.len()
            )));
        }
    }

    let outcomes: Vec<Result<IdentityBoundary>> = (0..m)
        .into_par_iter()
        .map(|i| {
            let rows: Vec<&[f64]> = (0..m).filter(|&j| j != i).map(|j| w.row(j)).collect();
            let local = SvmConfig {
                seed: reference_seed(cfg.seed, i),
                ..cfg.clone()
            };
            let model = train_rows(&rows, &labels[i].labels, &local)?;
            let mut b = boundary_from_svm(i, &model.weights, model.bias)?;
            b.stats = Some(model.stats);
            Ok(b)
        })
        .collect();

    let failed = outcomes.iter().filter(|o| o.is_err()).count();
    if failed == m {
        return Err(outcomes.into_iter().find_map(|o| o.err()).unwrap());
    }
    if failed > 0 {
        log::warn!("{failed} of {m} references produced no boundary");
    }
    Ok(BoundarySet {
        dim: w.cols(),
        outcomes,
    })
}
