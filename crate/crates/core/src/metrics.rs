//! Verification metrics over genuine and impostor comparison scores.
//!
//! Conventions: an impostor comparison is a false match at threshold `t`
//! when its score is `>= t`; a genuine comparison is a false non-match when
//! its score is `< t`. Operating points are swept over every distinct score,
//! every midpoint between consecutive distinct scores, and `+inf`.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::similarity::{cosine_similarity, dot, row_sq_norms};

#[derive(Debug, Clone, PartialEq)]
pub struct ScoreSet {
    pub genuine: Vec<f64>,
    pub impostor: Vec<f64>,
}

impl ScoreSet {
    pub fn new(genuine: Vec<f64>, impostor: Vec<f64>) -> Result<Self> {
        if genuine.is_empty() {
            return Err(Error::NoGenuinePairs);
        }
        if impostor.is_empty() {
            return Err(Error::NoImpostorPairs);
        }
        if genuine.iter().chain(&impostor).any(|s| !s.is_finite()) {
            return Err(Error::InvalidArgument("scores must be finite".into()));
        }
        Ok(ScoreSet { genuine, impostor })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Protocol {
    /// Every unordered pair of samples once.
    #[serde(rename = "all-pairs")]
    AllPairs,
    /// The first sample of each identity (in row order) against every other sample.
    #[serde(rename = "per-reference-1toN")]
    PerReference,
}

impl Protocol {
    pub fn as_str(self) -> &'static str {
        match self {
            Protocol::AllPairs => "all-pairs",
            Protocol::PerReference => "per-reference-1toN",
        }
    }
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Protocol {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [Protocol::AllPairs, Protocol::PerReference]
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown protocol {s:?}")))
    }
}

/// Unit-normalized copies of the rows.
fn normalized_rows(e: &Matrix) -> Result<Vec<Vec<f64>>> {
    let sq = row_sq_norms(e)?;
    Ok(e.iter_rows()
        .zip(sq)
        .map(|(r, s)| {
            let n = s.sqrt();
            r.iter().map(|v| v / n).collect()
        })
        .collect())
}

pub fn build_scores(e: &Matrix, identities: &[usize], protocol: Protocol) -> Result<ScoreSet> {
    let n = e.rows();
    if identities.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "{n} embeddings but {} identity labels",
            identities.len()
        )));
    }
    let mut distinct = identities.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() < 2 {
        return Err(Error::NoImpostorPairs);
    }
    let unit = normalized_rows(e)?;
    let score = |i: usize, j: usize| dot(&unit[i], &unit[j]).clamp(-1.0, 1.0);

    let (genuine, impostor) = match protocol {
        Protocol::AllPairs => {
            let per_row: Vec<(Vec<f64>, Vec<f64>)> = (0..n)
                .into_par_iter()
                .map(|i| {
                    let (mut g, mut im) = (Vec::new(), Vec::new());
                    for j in i + 1..n {
                        if identities[i] == identities[j] {
                            g.push(score(i, j));
                        } else {
                            im.push(score(i, j));
                        }
                    }
                    (g, im)
                })
                .collect();
            let (mut g, mut im) = (Vec::new(), Vec::new());
            for (a, b) in per_row {
                g.extend(a);
                im.extend(b);
            }
            (g, im)
        }
        Protocol::PerReference => {
            let mut g = Vec::new();
            let mut im = Vec::new();
            for &id in &distinct {
                let r = identities.iter().position(|&x| x == id).unwrap();
                for (j, &other) in identities.iter().enumerate() {
                    if j == r {
                        continue;
                    }
                    if other == id {
                        g.push(score(r, j));
                    } else {
                        im.push(score(r, j));
                    }
                }
            }
            (g, im)
        }
    };
    ScoreSet::new(genuine, impostor)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OperatingPoint {
    pub threshold: f64,
    pub fmr: f64,
    pub fnmr: f64,
}

/// Swept thresholds in ascending order; the last is `+inf`.
pub fn sweep_thresholds(s: &ScoreSet) -> Vec<f64> {
    let mut values: Vec<f64> = s.genuine.iter().chain(&s.impostor).copied().collect();
    values.sort_by(f64::total_cmp);
    values.dedup();
    let mut out = Vec::with_capacity(2 * values.len());
    for (k, &v) in values.iter().enumerate() {
        if k > 0 {
            out.push((values[k - 1] + v) / 2.0);
        }
        out.push(v);
    }
    out.push(f64::INFINITY);
    out
}

/// FMR and FNMR at every swept threshold.
pub fn det_curve(s: &ScoreSet) -> Vec<OperatingPoint> {
    let mut g = s.genuine.clone();
    let mut im = s.impostor.clone();
    g.sort_by(f64::total_cmp);
    im.sort_by(f64::total_cmp);
    let (ng, ni) = (g.len() as f64, im.len() as f64);
    sweep_thresholds(s)
        .into_iter()
        .map(|t| {
            let impostor_below = im.partition_point(|&x| x < t);
            let genuine_below = g.partition_point(|&x| x < t);
            OperatingPoint {
                threshold: t,
                fmr: (im.len() - impostor_below) as f64 / ni,
                fnmr: genuine_below as f64 / ng,
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EerPoint {
    pub eer: f64,
    pub threshold: f64,
    pub fmr: f64,
    pub fnmr: f64,
}

/// Mean of FMR and FNMR at the smallest threshold minimizing `|FMR - FNMR|`.
pub fn eer(s: &ScoreSet) -> EerPoint {
    eer_from_curve(&det_curve(s))
}

fn eer_from_curve(curve: &[OperatingPoint]) -> EerPoint {
    let mut best = curve[0];
    for p in &curve[1..] {
        if (p.fmr - p.fnmr).abs() < (best.fmr - best.fnmr).abs() {
            best = *p;
        }
    }
    EerPoint {
        eer: (best.fmr + best.fnmr) / 2.0,
        threshold: best.threshold,
        fmr: best.fmr,
        fnmr: best.fnmr,
    }
}

/// Lowest FNMR among swept thresholds with FMR <= 1%.
pub fn fmr100(s: &ScoreSet) -> f64 {
    fmr100_from_curve(&det_curve(s), s.impostor.len())
}

fn fmr100_from_curve(curve: &[OperatingPoint], n_impostor: usize) -> f64 {
    if n_impostor < 100 {
        log::warn!("FMR100 from only {n_impostor} impostor scores");
    }
    curve
        .iter()
        .filter(|p| p.fmr <= 0.01)
        .map(|p| p.fnmr)
        .fold(f64::INFINITY, f64::min)
}

fn mean_var(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var)
}

/// Fisher discriminant ratio with unbiased sample variances.
pub fn fdr(s: &ScoreSet) -> Result<f64> {
    if s.genuine.len() < 2 || s.impostor.len() < 2 {
        return Err(Error::InvalidArgument(
            "FDR needs at least two genuine and two impostor scores".into(),
        ));
    }
    let (mg, vg) = mean_var(&s.genuine);
    let (mi, vi) = mean_var(&s.impostor);
    if vg + vi == 0.0 {
        return Err(Error::DegenerateDistributions);
    }
    Ok((mg - mi).powi(2) / (vg + vi))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub eer: f64,
    pub fmr100: f64,
    /// `None` when both score lists have zero variance.
    pub fdr: Option<f64>,
    pub threshold: f64,
    pub n_genuine: usize,
    pub n_impostor: usize,
}

pub fn verification_report(s: &ScoreSet) -> VerificationReport {
    let curve = det_curve(s);
    let e = eer_from_curve(&curve);
    let fdr = match fdr(s) {
        Ok(v) => Some(v),
        Err(err) => {
            log::warn!("FDR undefined: {err}");
            None
        }
    };
    VerificationReport {
        eer: e.eer,
        fmr100: fmr100_from_curve(&curve, s.impostor.len()),
        fdr,
        threshold: e.threshold,
        n_genuine: s.genuine.len(),
        n_impostor: s.impostor.len(),
    }
}

/// `threshold,fmr,fnmr` lines; the `+inf` sentinel is written as `inf`.
pub fn det_csv(curve: &[OperatingPoint]) -> String {
    let mut out = String::from("threshold,fmr,fnmr\n");
    for p in curve {
        out.push_str(&format!("{},{},{}\n", p.threshold, p.fmr, p.fnmr));
    }
    out
}

/// Borda count over a `models x benchmarks` accuracy table.
///
/// Per benchmark, a model ranked `r` (0-based, descending accuracy) among
/// `k` earns `k - 1 - r` points; tied models share the mean of their points.
pub fn borda_count(table: &Matrix) -> Result<Vec<f64>> {
    if let Some((r, c)) = table.first_non_finite() {
        return Err(Error::NonFinite { row: r, col: c });
    }
    let k = table.rows();
    let mut points = vec![0.0; k];
    for b in 0..table.cols() {
        let mut order: Vec<usize> = (0..k).collect();
        order.sort_by(|&x, &y| table.get(y, b).total_cmp(&table.get(x, b)));
        let mut start = 0;
        while start < k {
            let acc = table.get(order[start], b);
            let mut end = start + 1;
            while end < k && table.get(order[end], b) == acc {
                end += 1;
            }
            // positions start..end share (k-1-start + k-1-(end-1)) / 2
            let shared = (2 * k - 1 - start - end) as f64 / 2.0;
            for &model in &order[start..end] {
                points[model] += shared;
            }
            start = end;
        }
    }
    Ok(points)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OneToN {
    pub scores: Vec<f64>,
    pub mean: f64,
}

/// Cosine of one reference embedding against each sample row, and their mean.
pub fn one_to_n_summary(reference: &[f64], samples: &Matrix) -> Result<OneToN> {
    if samples.cols() != reference.len() {
        return Err(Error::DimensionMismatch(format!(
            "reference has {} dims, samples have {}",
            reference.len(),
            samples.cols()
        )));
    }
    if samples.rows() == 0 {
        return Err(Error::EmptyMatrix);
    }
    let scores = samples
        .iter_rows()
        .enumerate()
        .map(|(i, r)| {
            cosine_similarity(reference, r).map_err(|e| match e {
                Error::DegenerateEmbedding { .. } => Error::DegenerateEmbedding {
                    row: Some(i),
                    col: None,
                },
                e => e,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mean = scores.iter().sum::<f64>() / scores.len() as f64;
    Ok(OneToN { scores, mean })
}
