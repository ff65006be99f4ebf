//! Class-positive and class-negative latent codes around each reference.
//!
//! For reference `i` with unit normal `n` and offset `o`, the displacement is
//! the elementwise product `t = o * n`; the positive code is `w_i + t` and the
//! negative code `w_i - t`, both from the same `o`.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::boundary::IdentityBoundary;
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::rng::{derive_seed, SeededRng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SamplingMode {
    /// `o_k = |g_k|`, `g_k ~ N(0, max_off^2)`. Keeps every sample on its side.
    HalfNormal,
    /// `o_k = g_k` as drawn.
    LiteralGaussian,
    /// `o = g`, negated when `(o * n) . n < 0`.
    SignCorrected,
}

impl SamplingMode {
    pub const ALL: [SamplingMode; 3] = [
        SamplingMode::HalfNormal,
        SamplingMode::LiteralGaussian,
        SamplingMode::SignCorrected,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SamplingMode::HalfNormal => "half-normal",
            SamplingMode::LiteralGaussian => "literal-gaussian",
            SamplingMode::SignCorrected => "sign-corrected",
        }
    }

    /// Whether generated rows are guaranteed to sit on their declared side.
    pub fn side_guaranteed(self) -> bool {
        !matches!(self, SamplingMode::LiteralGaussian)
    }
}

impl fmt::Display for SamplingMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SamplingMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SamplingMode::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown sampling mode {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SamplingConfig {
    /// Standard deviation of the per-dimension Gaussian offset.
    pub max_off: f64,
    /// Samples per side per reference.
    pub appearances: usize,
    pub mode: SamplingMode,
    pub seed: u64,
}

impl SamplingConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.max_off > 0.0 && self.max_off.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "max-off must be positive, got {}",
                self.max_off
            )));
        }
        if self.appearances == 0 {
            return Err(Error::InvalidArgument(
                "appearances must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    #[serde(rename = "pos")]
    Positive,
    #[serde(rename = "neg")]
    Negative,
}

/// Provenance of one generated row, serialized as one JSONL line.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleRecord {
    #[serde(rename = "ref")]
    pub reference: usize,
    pub side: Side,
    #[serde(rename = "app")]
    pub appearance: usize,
    pub seed: u64,
}

impl SampleRecord {
    /// Synthetic identity label: positive side of reference `i` is `2i`, negative side `2i + 1`.
    pub fn identity(&self) -> usize {
        2 * self.reference
            + match self.side {
                Side::Positive => 0,
                Side::Negative => 1,
            }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedDataset {
    pub latents: Matrix,
    pub records: Vec<SampleRecord>,
}

pub fn sample_offset(d: usize, max_off: f64, mode: SamplingMode, rng: &mut SeededRng) -> Vec<f64> {
    (0..d)
        .map(|_| {
            let g = rng.normal(max_off);
            match mode {
                SamplingMode::HalfNormal => g.abs(),
                SamplingMode::LiteralGaussian | SamplingMode::SignCorrected => g,
            }
        })
        .collect()
}

/// `(w + o*n, w - o*n)`; in sign-corrected mode `o` is negated first when the
/// displacement points against `n`.
pub fn make_pair(
    w: &[f64],
    normal: &[f64],
    offset: &[f64],
    mode: SamplingMode,
) -> Result<(Vec<f64>, Vec<f64>)> {
    if w.len() != normal.len() || w.len() != offset.len() {
        return Err(Error::DimensionMismatch(format!(
            "latent {}, normal {}, offset {}",
            w.len(),
            normal.len(),
            offset.len()
        )));
    }
    let mut t: Vec<f64> = offset.iter().zip(normal).map(|(o, n)| o * n).collect();
    if mode == SamplingMode::SignCorrected {
        let along: f64 = t.iter().zip(normal).map(|(t, n)| t * n).sum();
        if along < 0.0 {
            t.iter_mut().for_each(|v| *v = -*v);
        }
    }
    let v1 = w.iter().zip(&t).map(|(w, t)| w + t).collect();
    let v2 = w.iter().zip(&t).map(|(w, t)| w - t).collect();
    Ok((v1, v2))
}

pub fn offset_seed(master: u64, reference: usize, appearance: usize) -> u64 {
    derive_seed(master, &[reference as u64, appearance as u64])
}

/// Rows are grouped by boundary, then appearance, positive before negative.
pub fn generate_dataset(
    w: &Matrix,
    boundaries: &[&IdentityBoundary],
    cfg: &SamplingConfig,
) -> Result<GeneratedDataset> {
    cfg.validate()?;
    let d = w.cols();
    for b in boundaries {
        if b.reference >= w.rows() {
            return Err(Error::DimensionMismatch(format!(
                "boundary for reference {} but only {} latent codes",
                b.reference,
                w.rows()
            )));
        }
        if b.normal.len() != d {
            return Err(Error::DimensionMismatch(format!(
                "boundary {} has dimension {}, latents have {d}",
                b.reference,
                b.normal.len()
            )));
        }
    }

    let blocks: Vec<(Vec<f64>, Vec<SampleRecord>)> = boundaries
        .par_iter()
        .map(|b| {
            let wi = w.row(b.reference);
            let mut data = Vec::with_capacity(2 * cfg.appearances * d);
            let mut records = Vec::with_capacity(2 * cfg.appearances);
            for a in 0..cfg.appearances {
                let seed = offset_seed(cfg.seed, b.reference, a);
                let mut rng = SeededRng::new(seed);
                let o = sample_offset(d, cfg.max_off, cfg.mode, &mut rng);
                let (v1, v2) = make_pair(wi, &b.normal, &o, cfg.mode).expect("dimensions checked");
                data.extend_from_slice(&v1);
                data.extend_from_slice(&v2);
                for side in [Side::Positive, Side::Negative] {
                    records.push(SampleRecord {
                        reference: b.reference,
                        side,
                        appearance: a,
                        seed,
                    });
                }
            }
            (data, records)
        })
        .collect();

    let mut data = Vec::with_capacity(boundaries.len() * 2 * cfg.appearances * d);
    let mut records = Vec::with_capacity(boundaries.len() * 2 * cfg.appearances);
    for (block, recs) in blocks {
        data.extend(block);
        records.extend(recs);
    }
    Ok(GeneratedDataset {
        latents: Matrix::new(records.len(), d, data)?,
        records,
    })
}

pub fn records_to_jsonl(records: &[SampleRecord]) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r).expect("record serializes"));
        out.push('\n');
    }
    out
}

pub fn records_from_jsonl(text: &str) -> Result<Vec<SampleRecord>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(n, l)| {
            serde_json::from_str(l)
                .map_err(|e| Error::InvalidArgument(format!("records line {}: {e}", n + 1)))
        })
        .collect()
}
