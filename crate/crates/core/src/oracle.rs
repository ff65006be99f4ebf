//! Slow reference implementations used only by tests.
//!
//! Nothing here shares code with the production paths it checks: thresholds
//! are counted by linear scans, the SVM reference works on the explicit Gram
//! matrix, pair scores are recomputed from raw rows.

#![allow(clippy::needless_range_loop)]

use crate::matrix::Matrix;

/// Candidate thresholds: distinct scores, midpoints of neighbours, `+inf`.
pub fn sweep_candidates(genuine: &[f64], impostor: &[f64]) -> Vec<f64> {
    let mut distinct: Vec<f64> = Vec::new();
    let mut all: Vec<f64> = genuine.iter().chain(impostor).copied().collect();
    all.sort_by(|a, b| a.partial_cmp(b).unwrap());
    for v in all {
        if distinct.last() != Some(&v) {
            distinct.push(v);
        }
    }
    let mut out = Vec::new();
    for k in 0..distinct.len() {
        if k > 0 {
            out.push((distinct[k - 1] + distinct[k]) / 2.0);
        }
        out.push(distinct[k]);
    }
    out.push(f64::INFINITY);
    out
}

/// `(fmr, fnmr)` at `t` by direct counting.
pub fn rates_at(genuine: &[f64], impostor: &[f64], t: f64) -> (f64, f64) {
    let false_match = impostor.iter().filter(|&&s| s >= t).count();
    let false_non_match = genuine.iter().filter(|&&s| s < t).count();
    (
        false_match as f64 / impostor.len() as f64,
        false_non_match as f64 / genuine.len() as f64,
    )
}

/// `(eer, threshold)` by exhaustive sweep.
pub fn eer_sweep(genuine: &[f64], impostor: &[f64]) -> (f64, f64) {
    let mut best: Option<(f64, f64, f64)> = None;
    for t in sweep_candidates(genuine, impostor) {
        let (fmr, fnmr) = rates_at(genuine, impostor, t);
        let gap = (fmr - fnmr).abs();
        if best.is_none_or(|(g, _, _)| gap < g) {
            best = Some((gap, t, (fmr + fnmr) / 2.0));
        }
    }
    let (_, t, e) = best.unwrap();
    (e, t)
}

pub fn fmr100_sweep(genuine: &[f64], impostor: &[f64]) -> f64 {
    let mut best = f64::INFINITY;
    for t in sweep_candidates(genuine, impostor) {
        let (fmr, fnmr) = rates_at(genuine, impostor, t);
        if fmr <= 0.01 && fnmr < best {
            best = fnmr;
        }
    }
    best
}

/// FDR written out term by term with unbiased variances.
pub fn fdr_direct(genuine: &[f64], impostor: &[f64]) -> f64 {
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let var = |v: &[f64], m: f64| {
        let mut acc = 0.0;
        for x in v {
            acc += (x - m) * (x - m);
        }
        acc / (v.len() as f64 - 1.0)
    };
    let (mg, mi) = (mean(genuine), mean(impostor));
    (mg - mi) * (mg - mi) / (var(genuine, mg) + var(impostor, mi))
}

/// Brute-force all-pairs genuine and impostor cosine scores.
pub fn all_pair_scores(e: &Matrix, identities: &[usize]) -> (Vec<f64>, Vec<f64>) {
    let mut genuine = Vec::new();
    let mut impostor = Vec::new();
    for i in 0..e.rows() {
        for j in 0..e.rows() {
            if j <= i {
                continue;
            }
            let (mut ab, mut aa, mut bb) = (0.0, 0.0, 0.0);
            for c in 0..e.cols() {
                ab += e.get(i, c) * e.get(j, c);
                aa += e.get(i, c) * e.get(i, c);
                bb += e.get(j, c) * e.get(j, c);
            }
            let s = ab / (aa.sqrt() * bb.sqrt());
            if identities[i] == identities[j] {
                genuine.push(s);
            } else {
                impostor.push(s);
            }
        }
    }
    (genuine, impostor)
}

/// Borda points as "models strictly beaten plus half the ties", summed.
pub fn borda_rank_sum(table: &Matrix) -> Vec<f64> {
    let k = table.rows();
    (0..k)
        .map(|a| {
            let mut total = 0.0;
            for b in 0..table.cols() {
                for other in 0..k {
                    if other == a {
                        continue;
                    }
                    let (x, y) = (table.get(a, b), table.get(other, b));
                    if x > y {
                        total += 1.0;
                    } else if x == y {
                        total += 0.5;
                    }
                }
            }
            total
        })
        .collect()
}

pub struct ReferenceSvm {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub primal: f64,
    pub dual: f64,
    pub sweeps: usize,
}

/// Dual SVM by cyclic exact coordinate minimization on the explicit Gram
/// matrix, recomputing each gradient from scratch, until every projected
/// gradient is below `tol`.
pub fn reference_dual_svm(
    x: &Matrix,
    labels: &[bool],
    c: f64,
    include_bias: bool,
    tol: f64,
) -> ReferenceSvm {
    let n = x.rows();
    let bf = if include_bias { 1.0 } else { 0.0 };
    let y: Vec<f64> = labels.iter().map(|&l| if l { 1.0 } else { -1.0 }).collect();
    let mut q = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            let mut k = bf * bf;
            for col in 0..x.cols() {
                k += x.get(i, col) * x.get(j, col);
            }
            q[i][j] = y[i] * y[j] * k;
        }
    }
    let mut a = vec![0.0; n];
    let mut sweeps = 0;
    loop {
        sweeps += 1;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            let g: f64 = (0..n).map(|j| q[i][j] * a[j]).sum::<f64>() - 1.0;
            let pg = if a[i] <= 0.0 {
                g.min(0.0)
            } else if a[i] >= c {
                g.max(0.0)
            } else {
                g
            };
            worst = worst.max(pg.abs());
            if q[i][i] > 0.0 {
                a[i] = (a[i] - g / q[i][i]).max(0.0).min(c);
            }
        }
        if worst < tol || sweeps >= 1_000_000 {
            break;
        }
    }
    let mut w = vec![0.0; x.cols()];
    let mut b = 0.0;
    for i in 0..n {
        for col in 0..x.cols() {
            w[col] += a[i] * y[i] * x.get(i, col);
        }
        b += a[i] * y[i] * bf;
    }
    let mut reg = b * b;
    for v in &w {
        reg += v * v;
    }
    let mut hinge = 0.0;
    for i in 0..n {
        let mut f = b;
        for col in 0..x.cols() {
            f += w[col] * x.get(i, col);
        }
        hinge += (1.0 - y[i] * f).max(0.0);
    }
    let primal = 0.5 * reg + c * hinge;
    let dual = a.iter().sum::<f64>() - 0.5 * reg;
    ReferenceSvm {
        weights: w,
        bias: b,
        primal,
        dual,
        sweeps,
    }
}
