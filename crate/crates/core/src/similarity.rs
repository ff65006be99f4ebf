//! Pairwise cosine similarity between embeddings and per-reference median
//! labeling.
//!
//! For reference `i`, every other embedding `j` gets the score
//! `cs_ij = f_i . f_j / (|f_i| |f_j|)`. The threshold `th_i` is the median of
//! those `m - 1` scores and `j` is labeled similar (`true`) iff `cs_ij > th_i`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::matrix::Matrix;

#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityRow {
    pub reference: usize,
    /// Scores against every `j != reference`, ascending `j`.
    pub scores: Vec<f64>,
    pub threshold: f64,
}

impl SimilarityRow {
    /// Index into the embedding matrix of the `k`-th score.
    pub fn other_index(&self, k: usize) -> usize {
        if k < self.reference {
            k
        } else {
            k + 1
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelRow {
    pub reference: usize,
    /// `true` = identity-similar to the reference (label 1).
    pub labels: Vec<bool>,
}

impl LabelRow {
    pub fn positives(&self) -> usize {
        self.labels.iter().filter(|&&l| l).count()
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `sq_a`, `sq_b` are squared norms; one square root keeps `cos(a, a) == 1` exact more often.
fn cosine_with_sq_norms(a: &[f64], b: &[f64], sq_a: f64, sq_b: f64) -> f64 {
    (dot(a, b) / (sq_a * sq_b).sqrt()).clamp(-1.0, 1.0)
}

pub fn cosine_similarity(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() || a.is_empty() {
        return Err(Error::DimensionMismatch(format!(
            "cosine of vectors with lengths {} and {}",
            a.len(),
            b.len()
        )));
    }
    let (sa, sb) = (dot(a, a), dot(b, b));
    if sa == 0.0 || !sa.is_finite() || sb == 0.0 || !sb.is_finite() {
        return Err(Error::DegenerateEmbedding {
            row: None,
            col: None,
        });
    }
    Ok(cosine_with_sq_norms(a, b, sa, sb))
}

/// Squared Euclidean norm of every row, failing on the first zero-norm row.
pub(crate) fn row_sq_norms(f: &Matrix) -> Result<Vec<f64>> {
    f.iter_rows()
        .enumerate()
        .map(|(i, r)| {
            let n = dot(r, r);
            if n == 0.0 || !n.is_finite() {
                Err(Error::DegenerateEmbedding {
                    row: Some(i),
                    col: None,
                })
            } else {
                Ok(n)
            }
        })
        .collect()
}

/// All `m` similarity rows, each with its median threshold.
pub fn similarity_matrix(f: &Matrix) -> Result<Vec<SimilarityRow>> {
    let m = f.rows();
    if m < 3 {
        return Err(Error::InvalidArgument(format!(
            "similarity labeling needs at least 3 embeddings, got {m}"
        )));
    }
    let sq = row_sq_norms(f)?;
    (0..m)
        .into_par_iter()
        .map(|i| {
            let fi = f.row(i);
            let scores: Vec<f64> = (0..m)
                .filter(|&j| j != i)
                .map(|j| cosine_with_sq_norms(fi, f.row(j), sq[i], sq[j]))
                .collect();
            let threshold = median_threshold(&scores)?;
            Ok(SimilarityRow {
                reference: i,
                scores,
                threshold,
            })
        })
        .collect()
}

/// Median; the mean of the two middle order statistics for even lengths.
pub fn median_threshold(scores: &[f64]) -> Result<f64> {
    let n = scores.len();
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "median threshold needs at least 2 scores, got {n}"
        )));
    }
    let mut v = scores.to_vec();
    let mid = n / 2;
    let (lower, &mut upper, _) = v.select_nth_unstable_by(mid, f64::total_cmp);
    if n % 2 == 1 {
        Ok(upper)
    } else {
        let below = lower.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Ok((below + upper) / 2.0)
    }
}

pub fn label_row(sim: &SimilarityRow) -> LabelRow {
    let labels: Vec<bool> = sim.scores.iter().map(|&s| s > sim.threshold).collect();
    if !labels.iter().any(|&l| l) {
        log::warn!(
            "reference {}: all {} scores at or below the median {}; every label is 0",
            sim.reference,
            sim.scores.len(),
            sim.threshold
        );
    }
    LabelRow {
        reference: sim.reference,
        labels,
    }
}

/// Similarity rows and labels for every reference.
pub fn label_all(f: &Matrix) -> Result<(Vec<SimilarityRow>, Vec<LabelRow>)> {
    let rows = similarity_matrix(f)?;
    let labels = rows.iter().map(label_row).collect();
    Ok((rows, labels))
}

/// Packs rows into an `m x (m-1)` matrix (scores or 0/1 labels).
pub fn scores_to_matrix(rows: &[SimilarityRow]) -> Result<Matrix> {
    Matrix::from_rows(&rows.iter().map(|r| r.scores.as_slice()).collect::<Vec<_>>())
}

pub fn labels_to_matrix(rows: &[LabelRow]) -> Result<Matrix> {
    let packed: Vec<Vec<f64>> = rows
        .iter()
        .map(|r| {
            r.labels
                .iter()
                .map(|&l| if l { 1.0 } else { 0.0 })
                .collect()
        })
        .collect();
    Matrix::from_rows(&packed)
}

/// Inverse of [`labels_to_matrix`]; row `i` is the label row of reference `i`.
pub fn labels_from_matrix(mat: &Matrix) -> Result<Vec<LabelRow>> {
    if mat.cols() + 1 != mat.rows() {
        return Err(Error::DimensionMismatch(format!(
            "label matrix must be m x (m-1), got {}x{}",
            mat.rows(),
            mat.cols()
        )));
    }
    mat.iter_rows()
        .enumerate()
        .map(|(i, r)| {
            let labels = r
                .iter()
                .enumerate()
                .map(|(j, &v)| match v {
                    1.0 => Ok(true),
                    0.0 => Ok(false),
                    v => Err(Error::InvalidArgument(format!(
                        "label ({i}, {j}) is {v}, expected 0 or 1"
                    ))),
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(LabelRow {
                reference: i,
                labels,
            })
        })
        .collect()
}

/// Debug dump with header `i,j,score,label`.
pub fn debug_csv(rows: &[SimilarityRow], labels: &[LabelRow]) -> String {
    let mut out = String::from("i,j,score,label\n");
    for (row, lab) in rows.iter().zip(labels) {
        for (k, (&s, &l)) in row.scores.iter().zip(&lab.labels).enumerate() {
            out.push_str(&format!(
                "{},{},{},{}\n",
                row.reference,
                row.other_index(k),
                s,
                u8::from(l)
            ));
        }
    }
    out
}
