//! Soft-margin linear SVM trained by dual coordinate descent.
//!
//! Primal: `min_w 1/2 |w|^2 + C sum_j max(0, 1 - y_j w.x_j)`, with the bias
//! folded into `w` through a constant feature of value 1 (so the bias is
//! regularized too). Dual: `min_a 1/2 a'Qa - sum a` subject to `0 <= a_j <= C`,
//! `Q_jk = y_j y_k x_j.x_k`. Each epoch visits the coordinates in a seeded
//! random order and minimizes the dual exactly along one coordinate at a
//! time while keeping `w = sum_j a_j y_j x_j` up to date.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::rng::SeededRng;
use crate::similarity::dot;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmConfig {
    /// Soft-margin penalty.
    pub c: f64,
    /// Stop once the largest projected-gradient magnitude seen in an epoch
    /// falls below this.
    pub tolerance: f64,
    pub max_epochs: usize,
    pub include_bias: bool,
    /// Seed of the coordinate permutation schedule.
    pub seed: u64,
}

impl Default for SvmConfig {
    fn default() -> Self {
        SvmConfig {
            c: 1.0,
            tolerance: 1e-4,
            max_epochs: 1000,
            include_bias: true,
            seed: 0,
        }
    }
}

impl SvmConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "C must be positive, got {}",
                self.c
            )));
        }
        if !(self.tolerance > 0.0 && self.tolerance.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "tolerance must be positive, got {}",
                self.tolerance
            )));
        }
        if self.max_epochs == 0 {
            return Err(Error::InvalidArgument(
                "max epochs must be at least 1".into(),
            ));
        }
        Ok(())
    }

    fn bias_feature(&self) -> f64 {
        if self.include_bias {
            1.0
        } else {
            0.0
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingStats {
    pub epochs: usize,
    pub converged: bool,
    /// Largest projected-gradient magnitude in the final epoch.
    pub max_violation: f64,
    pub primal_objective: f64,
    pub dual_objective: f64,
    pub support_vectors: usize,
}

impl TrainingStats {
    pub fn duality_gap(&self) -> f64 {
        self.primal_objective - self.dual_objective
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SvmModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    /// Dual variables, one per training row, each in `[0, C]`.
    pub dual: Vec<f64>,
    pub stats: TrainingStats,
}

impl SvmModel {
    pub fn decision(&self, x: &[f64]) -> f64 {
        dot(&self.weights, x) + self.bias
    }
}

fn signed(label: bool) -> f64 {
    if label {
        1.0
    } else {
        -1.0
    }
}

/// `1/2 (|w|^2 + b^2) + C sum hinge` when the bias is included, `1/2 |w|^2 + C sum hinge` otherwise.
pub fn primal_objective(
    rows: &[&[f64]],
    labels: &[bool],
    weights: &[f64],
    bias: f64,
    c: f64,
    include_bias: bool,
) -> f64 {
    let reg = dot(weights, weights) + if include_bias { bias * bias } else { 0.0 };
    let hinge: f64 = rows
        .iter()
        .zip(labels)
        .map(|(x, &l)| (1.0 - signed(l) * (dot(weights, x) + bias)).max(0.0))
        .sum();
    0.5 * reg + c * hinge
}

pub fn train_linear_svm(x: &Matrix, labels: &[bool], cfg: &SvmConfig) -> Result<SvmModel> {
    let rows: Vec<&[f64]> = x.iter_rows().collect();
    train_rows(&rows, labels, cfg)
}

/// Same as [`train_linear_svm`] over borrowed rows.
pub fn train_rows(rows: &[&[f64]], labels: &[bool], cfg: &SvmConfig) -> Result<SvmModel> {
    cfg.validate()?;
    let n = rows.len();
    if labels.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "{n} training rows but {} labels",
            labels.len()
        )));
    }
    let positives = labels.iter().filter(|&&l| l).count();
    if positives == 0 || positives == n {
        return Err(Error::DegenerateLabels(format!(
            "{positives} of {n} labels are 1; both classes are required"
        )));
    }
    let d = rows[0].len();
    for (i, r) in rows.iter().enumerate() {
        if r.len() != d {
            return Err(Error::DimensionMismatch(format!(
                "row {i} has {} features, expected {d}",
                r.len()
            )));
        }
        if let Some(j) = r.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { row: i, col: j });
        }
    }

    let c = cfg.c;
    let bf = cfg.bias_feature();
    let diag: Vec<f64> = rows.iter().map(|x| dot(x, x) + bf * bf).collect();
    let ys: Vec<f64> = labels.iter().map(|&l| signed(l)).collect();

    let mut alpha = vec![0.0; n];
    let mut w = vec![0.0; d];
    let mut wb = 0.0;
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = SeededRng::new(cfg.seed);

    let mut epochs = 0;
    let mut converged = false;
    let mut max_violation = f64::INFINITY;
    while epochs < cfg.max_epochs {
        epochs += 1;
        rng.shuffle(&mut order);
        let mut violation: f64 = 0.0;
        for &i in &order {
            let x = rows[i];
            let y = ys[i];
            let g = y * (dot(&w, x) + wb * bf) - 1.0;
            let a = alpha[i];
            let pg = if a == 0.0 {
                g.min(0.0)
            } else if a == c {
                g.max(0.0)
            } else {
                g
            };
            violation = violation.max(pg.abs());
            if pg != 0.0 && diag[i] > 0.0 {
                let next = (a - g / diag[i]).clamp(0.0, c);
                let step = (next - a) * y;
                if step != 0.0 {
                    for (wk, xk) in w.iter_mut().zip(x.iter()) {
                        *wk += step * xk;
                    }
                    wb += step * bf;
                    alpha[i] = next;
                }
            }
        }
        max_violation = violation;
        if violation < cfg.tolerance {
            converged = true;
            break;
        }
    }

    let primal = primal_objective(rows, labels, &w, wb * bf, c, cfg.include_bias);
    let dual = alpha.iter().sum::<f64>() - 0.5 * (dot(&w, &w) + wb * wb * bf * bf);
    let stats = TrainingStats {
        epochs,
        converged,
        max_violation,
        primal_objective: primal,
        dual_objective: dual,
        support_vectors: alpha.iter().filter(|&&a| a > 0.0).count(),
    };
    if !converged {
        log::debug!(
            "svm stopped after {epochs} epochs with violation {max_violation:.3e} > {}",
            cfg.tolerance
        );
    }
    Ok(SvmModel {
        weights: w,
        bias: wb * bf,
        dual: alpha,
        stats,
    })
}
