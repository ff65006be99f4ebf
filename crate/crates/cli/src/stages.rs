//! One function per subcommand. Each reads its inputs through the digest
//! check, writes its outputs, and finishes with a manifest.

use std::fmt;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};

use lif_core::boundary::BoundarySet;
use lif_core::metrics::{det_csv, det_curve};
use lif_core::sampler::{records_from_jsonl, records_to_jsonl};
use lif_core::similarity::{
    debug_csv, dot, labels_from_matrix, labels_to_matrix, norm, scores_to_matrix,
};
use lif_core::toy::{DEFAULT_ALPHA, DEFAULT_BETA};
use lif_core::{
    borda_count, build_scores, cosine_similarity, generate_dataset, label_all, one_to_n_summary,
    toy_latents, train_all_boundaries, verification_report, IdentityBoundary, Matrix, Protocol,
    RunManifest, SampleRecord, SamplingConfig, SamplingMode, Side, SvmConfig, ToyConfig, ToyWorld,
    VerificationReport,
};

use crate::error::{CliError, CliResult};
use crate::workspace::*;

fn out_dir(out: &Option<PathBuf>, ws: &Path) -> CliResult<PathBuf> {
    let dir = out.clone().unwrap_or_else(|| ws.to_path_buf());
    ensure_dir(&dir)?;
    Ok(dir)
}

#[derive(Debug, Clone, Args)]
pub struct ToyGenArgs {
    #[arg(long, default_value_t = 500)]
    pub m: usize,
    #[arg(long, default_value_t = 16)]
    pub d: usize,
    /// Gain of the identity coordinate.
    #[arg(long, default_value_t = DEFAULT_ALPHA)]
    pub alpha: f64,
    /// Gain of the residual coordinates.
    #[arg(long, default_value_t = DEFAULT_BETA)]
    pub beta: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output directory [default: the workspace]
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Writes `W.lidm`, `F.lidm` and `toy.manifest.json`; the manifest carries
/// the hidden direction in `params.direction`.
pub fn toy_gen(ws: &Path, args: &ToyGenArgs) -> CliResult<ToyWorld> {
    let dir = out_dir(&args.out, ws)?;
    let mut manifest =
        RunManifest::new("toy", args.seed).with_dims(Some(args.d), Some(args.d), Some(args.m));
    manifest.validate()?;
    let world = ToyWorld::new(ToyConfig {
        d: args.d,
        alpha: args.alpha,
        beta: args.beta,
        seed: args.seed,
    })?;
    let w = toy_latents(args.m, args.d, args.seed)?;
    let f = world.embed_matrix(&w)?;
    manifest
        .param("alpha", args.alpha)
        .param("beta", args.beta)
        .param(
            "direction",
            serde_json::to_string(world.direction()).expect("serializes"),
        );
    write_output_matrix(&mut manifest, &dir.join(LATENTS), &w)?;
    write_output_matrix(&mut manifest, &dir.join(EMBEDDINGS), &f)?;
    manifest.write(&dir)?;
    Ok(world)
}

fn manifest_param<T: std::str::FromStr>(m: &RunManifest, key: &str) -> CliResult<T> {
    m.params
        .get(key)
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| {
            CliError::validation(format!("toy manifest: missing or invalid param {key:?}"))
        })
}

/// Rebuilds the toy world recorded by [`toy_gen`].
pub fn load_toy_world(manifest_path: &Path) -> CliResult<ToyWorld> {
    let m = RunManifest::read(manifest_path)?;
    if m.stage != "toy" {
        return Err(CliError::validation(format!(
            "{} is a {:?} manifest, not a toy manifest",
            manifest_path.display(),
            m.stage
        )));
    }
    let d =
        m.d.ok_or_else(|| CliError::validation("toy manifest: missing d"))?;
    let world = ToyWorld::new(ToyConfig {
        d,
        alpha: manifest_param(&m, "alpha")?,
        beta: manifest_param(&m, "beta")?,
        seed: m.master_seed,
    })?;
    let recorded: Vec<f64> = m
        .params
        .get("direction")
        .and_then(|s| serde_json::from_str(s).ok())
        .ok_or_else(|| {
            CliError::validation("toy manifest: missing or invalid param \"direction\"")
        })?;
    let drift = recorded
        .iter()
        .zip(world.direction())
        .fold(0.0f64, |acc, (a, b)| acc.max((a - b).abs()));
    if recorded.len() != world.direction().len() || drift > 1e-12 {
        return Err(CliError::validation(
            "toy manifest: recorded direction does not match its seed",
        ));
    }
    Ok(world)
}

#[derive(Debug, Clone, Args)]
pub struct ToyEmbedArgs {
    /// Latent codes to embed [default: <workspace>/dataset.lidm]
    #[arg(long)]
    pub latents: Option<PathBuf>,
    /// [default: <workspace>/toy.manifest.json]
    #[arg(long)]
    pub toy_manifest: Option<PathBuf>,
    /// Output directory for `E.lidm` [default: the workspace]
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn toy_embed(ws: &Path, args: &ToyEmbedArgs) -> CliResult<()> {
    let dir = out_dir(&args.out, ws)?;
    let latents = resolve(&args.latents, ws, DATASET);
    let world = load_toy_world(&resolve(&args.toy_manifest, ws, TOY_MANIFEST))?;
    let w = read_input_matrix(&latents)?;
    let mut manifest = RunManifest::new("embed", world.config.seed).with_dims(
        Some(w.cols()),
        Some(world.embedding_dim()),
        None,
    );
    manifest.validate()?;
    manifest.record_input(&latents)?;
    let e = world.embed_matrix(&w)?;
    write_output_matrix(&mut manifest, &dir.join(DATASET_EMBEDDINGS), &e)?;
    manifest.write(&dir)?;
    Ok(())
}

#[derive(Debug, Clone, Args)]
pub struct LabelArgs {
    /// [default: <workspace>/W.lidm]
    #[arg(long)]
    pub latents: Option<PathBuf>,
    /// [default: <workspace>/F.lidm]
    #[arg(long)]
    pub embeddings: Option<PathBuf>,
    /// Also write `similarity.csv` with one `i,j,score,label` line per pair.
    #[arg(long)]
    pub debug_csv: bool,
    /// Output directory [default: the workspace]
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Writes `similarity.lidm` (m x (m-1)), `labels.lidm` (m x (m-1)) and
/// `thresholds.lidm` (m x 1).
pub fn label(ws: &Path, args: &LabelArgs) -> CliResult<()> {
    let dir = out_dir(&args.out, ws)?;
    let w_path = resolve(&args.latents, ws, LATENTS);
    let f_path = resolve(&args.embeddings, ws, EMBEDDINGS);
    let w = read_input_matrix(&w_path)?;
    let f = read_input_matrix(&f_path)?;
    if w.rows() != f.rows() {
        return Err(CliError::validation(format!(
            "latents have {} rows but embeddings have {}",
            w.rows(),
            f.rows()
        )));
    }
    let mut manifest =
        RunManifest::new("label", 0).with_dims(Some(w.cols()), Some(f.cols()), Some(f.rows()));
    manifest.validate()?;
    manifest.record_input(&w_path)?.record_input(&f_path)?;

    let (sims, labels) = label_all(&f)?;
    let thresholds = Matrix::new(sims.len(), 1, sims.iter().map(|s| s.threshold).collect())?;
    write_output_matrix(
        &mut manifest,
        &dir.join(SIMILARITY),
        &scores_to_matrix(&sims)?,
    )?;
    write_output_matrix(
        &mut manifest,
        &dir.join(LABELS),
        &labels_to_matrix(&labels)?,
    )?;
    write_output_matrix(&mut manifest, &dir.join(THRESHOLDS), &thresholds)?;
    if args.debug_csv {
        write_output_text(
            &mut manifest,
            &dir.join(SIMILARITY_CSV),
            &debug_csv(&sims, &labels),
        )?;
    }
    manifest.write(&dir)?;
    Ok(())
}

#[derive(Debug, Clone, Args)]
pub struct BoundariesArgs {
    /// [default: <workspace>/W.lidm]
    #[arg(long)]
    pub latents: Option<PathBuf>,
    /// [default: <workspace>/labels.lidm]
    #[arg(long)]
    pub labels: Option<PathBuf>,
    /// Soft-margin penalty.
    #[arg(long, default_value_t = 1.0)]
    pub c: f64,
    /// Projected-gradient stopping tolerance.
    #[arg(long, default_value_t = 1e-4)]
    pub tol: f64,
    #[arg(long, default_value_t = 1000)]
    pub max_epochs: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output directory [default: the workspace]
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Writes `boundaries.lidm` (m x (d+1), unit normal then intercept; failed
/// references are zero rows) and `boundaries.stats.json`.
pub fn boundaries(ws: &Path, args: &BoundariesArgs) -> CliResult<BoundarySet> {
    let dir = out_dir(&args.out, ws)?;
    let w_path = resolve(&args.latents, ws, LATENTS);
    let l_path = resolve(&args.labels, ws, LABELS);
    let w = read_input_matrix(&w_path)?;
    let labels = labels_from_matrix(&read_input_matrix(&l_path)?)?;
    if labels.len() != w.rows() {
        return Err(CliError::validation(format!(
            "{} latent codes but {} label rows",
            w.rows(),
            labels.len()
        )));
    }
    let cfg = SvmConfig {
        c: args.c,
        tolerance: args.tol,
        max_epochs: args.max_epochs,
        include_bias: true,
        seed: args.seed,
    };
    cfg.validate()?;
    let mut manifest =
        RunManifest::new("boundaries", args.seed).with_dims(Some(w.cols()), None, Some(w.rows()));
    manifest.validate()?;
    manifest.record_input(&w_path)?.record_input(&l_path)?;

    let set = train_all_boundaries(&w, &labels, &cfg)?;
    manifest
        .param("c", args.c)
        .param("tol", args.tol)
        .param("max_epochs", args.max_epochs)
        .param("include_bias", true)
        .param("trained", set.trained().count())
        .param("failed", set.failures().count());
    write_output_matrix(&mut manifest, &dir.join(BOUNDARIES), &set.to_matrix())?;
    write_output_text(
        &mut manifest,
        &dir.join(BOUNDARY_STATS),
        &to_json(&set.reports()),
    )?;
    manifest.write(&dir)?;
    Ok(set)
}

#[derive(Debug, Clone, Args)]
pub struct GenerateArgs {
    /// [default: <workspace>/W.lidm]
    #[arg(long)]
    pub latents: Option<PathBuf>,
    /// [default: <workspace>/boundaries.lidm]
    #[arg(long)]
    pub boundaries: Option<PathBuf>,
    /// Standard deviation of the per-dimension offset.
    #[arg(long, allow_negative_numbers = true)]
    pub max_off: f64,
    /// Samples per side per reference.
    #[arg(long, default_value_t = 10)]
    pub appearances: usize,
    #[arg(long, default_value_t = SamplingMode::HalfNormal)]
    pub mode: SamplingMode,
    /// Only the first K references with a trained boundary.
    #[arg(long)]
    pub max_refs: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output directory [default: the workspace]
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Writes `dataset.lidm` and `records.jsonl`, one record per row.
pub fn generate(ws: &Path, args: &GenerateArgs) -> CliResult<usize> {
    let cfg = SamplingConfig {
        max_off: args.max_off,
        appearances: args.appearances,
        mode: args.mode,
        seed: args.seed,
    };
    cfg.validate()?;
    if args.max_refs == Some(0) {
        return Err(CliError::validation("max-refs must be at least 1"));
    }
    let dir = out_dir(&args.out, ws)?;
    let w_path = resolve(&args.latents, ws, LATENTS);
    let b_path = resolve(&args.boundaries, ws, BOUNDARIES);
    let w = read_input_matrix(&w_path)?;
    let b = read_input_matrix(&b_path)?;
    if b.rows() != w.rows() || b.cols() != w.cols() + 1 {
        return Err(CliError::validation(format!(
            "boundaries are {}x{} but latents are {}x{} (expected {}x{})",
            b.rows(),
            b.cols(),
            w.rows(),
            w.cols(),
            w.rows(),
            w.cols() + 1
        )));
    }
    // m is not recorded: sampling is defined for any number of references
    let mut manifest =
        RunManifest::new("generate", args.seed).with_dims(Some(w.cols()), None, None);
    manifest.validate()?;
    manifest.record_input(&w_path)?.record_input(&b_path)?;

    let set = BoundarySet::from_matrix(&b)?;
    for (i, _) in set.failures() {
        log::warn!("reference {i} has no boundary; skipped");
    }
    let mut refs: Vec<&IdentityBoundary> = set.trained().collect();
    if let Some(k) = args.max_refs {
        refs.truncate(k);
    }
    if refs.is_empty() {
        return Err(CliError::validation("no trained boundaries to sample from"));
    }
    let data = generate_dataset(&w, &refs, &cfg)?;
    manifest
        .param("max_off", args.max_off)
        .param("appearances", args.appearances)
        .param("mode", args.mode)
        .param("references", refs.len());
    write_output_matrix(&mut manifest, &dir.join(DATASET), &data.latents)?;
    write_output_text(
        &mut manifest,
        &dir.join(RECORDS),
        &records_to_jsonl(&data.records),
    )?;
    manifest.write(&dir)?;
    Ok(data.records.len())
}

/// Which generated rows enter a verification run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Classes {
    #[value(name = "pos", alias = "positive")]
    #[serde(rename = "pos")]
    Positive,
    #[value(name = "neg", alias = "negative")]
    #[serde(rename = "neg")]
    Negative,
    Both,
}

impl Classes {
    pub fn as_str(self) -> &'static str {
        match self {
            Classes::Positive => "pos",
            Classes::Negative => "neg",
            Classes::Both => "both",
        }
    }

    fn accepts(self, side: Side) -> bool {
        matches!(
            (self, side),
            (Classes::Both, _)
                | (Classes::Positive, Side::Positive)
                | (Classes::Negative, Side::Negative)
        )
    }
}

impl fmt::Display for Classes {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Args)]
pub struct EvaluateArgs {
    /// Embeddings of the generated rows [default: <workspace>/E.lidm]
    #[arg(long)]
    pub embeddings: Option<PathBuf>,
    /// [default: <workspace>/records.jsonl]
    #[arg(long)]
    pub records: Option<PathBuf>,
    #[arg(long, default_value_t = Protocol::AllPairs)]
    pub protocol: Protocol,
    #[arg(long, value_enum, default_value_t = Classes::Both)]
    pub classes: Classes,
    /// Only rows of the K smallest reference indices.
    #[arg(long)]
    pub max_refs: Option<usize>,
    /// Reference embeddings (row i = reference i); enables `sides.json`.
    #[arg(long)]
    pub references: Option<PathBuf>,
    /// Also write `det-<classes>.csv`.
    #[arg(long)]
    pub det_csv: bool,
    /// Output directory [default: the workspace]
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Similarity of one reference's generated samples to it and to each other.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceSides {
    pub reference: usize,
    /// Mean cosine of the reference embedding to its positive samples.
    pub positive_mean: f64,
    pub negative_mean: f64,
    /// Mean cosine over pairs on the same side.
    pub within_side_mean: f64,
    /// Mean cosine over positive x negative pairs.
    pub cross_side_mean: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SideSummary {
    pub positive_mean: f64,
    pub negative_mean: f64,
    pub within_side_mean: f64,
    pub cross_side_mean: f64,
    /// References whose cross-side mean is below their within-side mean.
    pub separated: usize,
    pub references: Vec<ReferenceSides>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvaluateOutput {
    pub report: VerificationReport,
    pub sides: Option<SideSummary>,
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn pair_means(rows: &[&[f64]], pos: &[usize], neg: &[usize]) -> CliResult<(f64, f64)> {
    let mut within = Vec::new();
    for side in [pos, neg] {
        for (a, &i) in side.iter().enumerate() {
            for &j in &side[a + 1..] {
                within.push(cosine_similarity(rows[i], rows[j])?);
            }
        }
    }
    let mut cross = Vec::with_capacity(pos.len() * neg.len());
    for &i in pos {
        for &j in neg {
            cross.push(cosine_similarity(rows[i], rows[j])?);
        }
    }
    if within.is_empty() || cross.is_empty() {
        return Err(CliError::validation(
            "side analysis needs at least two samples per side and both sides per reference",
        ));
    }
    Ok((mean(&within), mean(&cross)))
}

fn side_summary(
    e: &Matrix,
    records: &[SampleRecord],
    refs: &[usize],
    references: &Matrix,
) -> CliResult<SideSummary> {
    if references.cols() != e.cols() {
        return Err(CliError::validation(format!(
            "reference embeddings have {} dims, samples have {}",
            references.cols(),
            e.cols()
        )));
    }
    let mut out = Vec::with_capacity(refs.len());
    for &r in refs {
        if r >= references.rows() {
            return Err(CliError::validation(format!(
                "records mention reference {r} but only {} reference embeddings",
                references.rows()
            )));
        }
        let idx: Vec<usize> = (0..records.len())
            .filter(|&i| records[i].reference == r)
            .collect();
        let rows: Vec<&[f64]> = idx.iter().map(|&i| e.row(i)).collect();
        let (pos, neg): (Vec<usize>, Vec<usize>) =
            (0..idx.len()).partition(|&k| records[idx[k]].side == Side::Positive);
        let side_rows =
            |s: &[usize]| Matrix::from_rows(&s.iter().map(|&k| rows[k]).collect::<Vec<_>>());
        let one_to_n = |s: &[usize]| -> CliResult<f64> {
            if s.is_empty() {
                return Err(CliError::validation(format!(
                    "reference {r} lacks samples on one side"
                )));
            }
            Ok(one_to_n_summary(references.row(r), &side_rows(s)?)?.mean)
        };
        let positive_mean = one_to_n(&pos)?;
        let negative_mean = one_to_n(&neg)?;
        let (within_side_mean, cross_side_mean) = pair_means(&rows, &pos, &neg)?;
        out.push(ReferenceSides {
            reference: r,
            positive_mean,
            negative_mean,
            within_side_mean,
            cross_side_mean,
        });
    }
    let avg = |f: fn(&ReferenceSides) -> f64| mean(&out.iter().map(f).collect::<Vec<_>>());
    Ok(SideSummary {
        positive_mean: avg(|s| s.positive_mean),
        negative_mean: avg(|s| s.negative_mean),
        within_side_mean: avg(|s| s.within_side_mean),
        cross_side_mean: avg(|s| s.cross_side_mean),
        separated: out
            .iter()
            .filter(|s| s.cross_side_mean < s.within_side_mean)
            .count(),
        references: out,
    })
}

/// Writes `report-<classes>.json` and, with `--references`, `sides.json`.
pub fn evaluate(ws: &Path, args: &EvaluateArgs) -> CliResult<EvaluateOutput> {
    if args.max_refs == Some(0) {
        return Err(CliError::validation("max-refs must be at least 1"));
    }
    let dir = out_dir(&args.out, ws)?;
    let e_path = resolve(&args.embeddings, ws, DATASET_EMBEDDINGS);
    let r_path = resolve(&args.records, ws, RECORDS);
    let e = read_input_matrix(&e_path)?;
    let records = records_from_jsonl(&read_input_text(&r_path)?)?;
    if e.rows() != records.len() {
        return Err(CliError::validation(format!(
            "{} embedding rows but {} records",
            e.rows(),
            records.len()
        )));
    }
    let mut manifest = RunManifest::new(format!("evaluate-{}", args.classes), 0).with_dims(
        None,
        Some(e.cols()),
        None,
    );
    manifest.validate()?;
    manifest.record_input(&e_path)?.record_input(&r_path)?;

    let mut refs: Vec<usize> = records.iter().map(|r| r.reference).collect();
    refs.sort_unstable();
    refs.dedup();
    if let Some(k) = args.max_refs {
        refs.truncate(k);
    }
    let keep: Vec<usize> = (0..records.len())
        .filter(|&i| {
            refs.binary_search(&records[i].reference).is_ok()
                && args.classes.accepts(records[i].side)
        })
        .collect();
    let sub = e.select_rows(&keep);
    let ids: Vec<usize> = keep.iter().map(|&i| records[i].identity()).collect();
    let scores = build_scores(&sub, &ids, args.protocol)?;
    let report = verification_report(&scores);
    manifest
        .param("protocol", args.protocol)
        .param("classes", args.classes)
        .param("references", refs.len())
        .param("rows", keep.len());
    write_output_text(
        &mut manifest,
        &dir.join(format!("report-{}.json", args.classes)),
        &to_json(&report),
    )?;
    if args.det_csv {
        let csv = det_csv(&det_curve(&scores));
        write_output_text(
            &mut manifest,
            &dir.join(format!("det-{}.csv", args.classes)),
            &csv,
        )?;
    }

    let sides = match &args.references {
        Some(path) => {
            let f = read_input_matrix(path)?;
            manifest.record_input(path)?;
            let summary = side_summary(&e, &records, &refs, &f)?;
            write_output_text(&mut manifest, &dir.join("sides.json"), &to_json(&summary))?;
            Some(summary)
        }
        None => None,
    };
    manifest.write(&dir)?;
    Ok(EvaluateOutput { report, sides })
}

#[derive(Debug, Clone, Args)]
pub struct BordaArgs {
    /// CSV with a header row; first column model names, then one accuracy column per benchmark.
    #[arg(long)]
    pub table: PathBuf,
    /// Write the JSON result here as well as to stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BordaRow {
    pub model: String,
    pub borda: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BordaResult {
    pub benchmarks: Vec<String>,
    pub models: Vec<BordaRow>,
}

pub fn parse_accuracy_table(text: &str) -> CliResult<(Vec<String>, Vec<String>, Matrix)> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header = reader
        .headers()
        .map_err(|e| CliError::validation(format!("accuracy table: {e}")))?
        .clone();
    if header.len() < 2 {
        return Err(CliError::validation(
            "accuracy table needs a model column and at least one benchmark",
        ));
    }
    let benchmarks: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
    let mut models = Vec::new();
    let mut rows = Vec::new();
    for (n, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| CliError::validation(format!("accuracy table: {e}")))?;
        models.push(rec[0].to_string());
        let row = rec
            .iter()
            .skip(1)
            .map(|v| {
                v.parse::<f64>().map_err(|_| {
                    CliError::validation(format!("accuracy table row {}: bad number {v:?}", n + 1))
                })
            })
            .collect::<CliResult<Vec<f64>>>()?;
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(CliError::validation("accuracy table has no models"));
    }
    Ok((models, benchmarks, Matrix::from_rows(&rows)?))
}

pub fn borda(args: &BordaArgs) -> CliResult<BordaResult> {
    let text = std::fs::read_to_string(&args.table)
        .map_err(|e| CliError::Io(format!("{}: {e}", args.table.display())))?;
    let (models, benchmarks, table) = parse_accuracy_table(&text)?;
    let points = borda_count(&table)?;
    let result = BordaResult {
        benchmarks,
        models: models
            .into_iter()
            .zip(points)
            .map(|(model, borda)| BordaRow { model, borda })
            .collect(),
    };
    if let Some(out) = &args.out {
        std::fs::write(out, to_json(&result))
            .map_err(|e| CliError::Io(format!("{}: {e}", out.display())))?;
    }
    Ok(result)
}

#[derive(Debug, Clone, Args)]
pub struct ToyE2eArgs {
    #[arg(long, default_value_t = 500)]
    pub m: usize,
    #[arg(long, default_value_t = 16)]
    pub d: usize,
    #[arg(long, default_value_t = DEFAULT_ALPHA)]
    pub alpha: f64,
    #[arg(long, default_value_t = DEFAULT_BETA)]
    pub beta: f64,
    #[arg(long, value_delimiter = ',', default_value = "10,20,30,40")]
    pub max_off_list: Vec<f64>,
    #[arg(long, default_value_t = 20)]
    pub appearances: usize,
    /// References sampled and evaluated at each max-off.
    #[arg(long, default_value_t = 40)]
    pub eval_refs: usize,
    #[arg(long, default_value_t = SamplingMode::HalfNormal)]
    pub mode: SamplingMode,
    #[arg(long, default_value_t = 1.0)]
    pub c: f64,
    #[arg(long, default_value_t = 1e-4)]
    pub tol: f64,
    #[arg(long, default_value_t = 1000)]
    pub max_epochs: usize,
    /// A boundary counts as recovered when |cos(normal, u)| reaches this.
    #[arg(long, default_value_t = 0.9)]
    pub recovery_threshold: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Recovery {
    pub threshold: f64,
    pub recovered: usize,
    pub failed: usize,
    pub total: usize,
    pub rate: f64,
    pub min_abs_cos: f64,
    pub mean_abs_cos: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub max_off: f64,
    pub rows: usize,
    pub positive: VerificationReport,
    pub negative: VerificationReport,
    pub both: VerificationReport,
    pub sides: SideSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct E2eConfig {
    pub m: usize,
    pub d: usize,
    pub alpha: f64,
    pub beta: f64,
    pub appearances: usize,
    pub eval_refs: usize,
    pub mode: SamplingMode,
    pub c: f64,
    pub tol: f64,
    pub max_epochs: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct E2eSummary {
    pub config: E2eConfig,
    pub recovery: Recovery,
    pub sweep: Vec<SweepPoint>,
}

pub fn direction_recovery(set: &BoundarySet, u: &[f64], threshold: f64) -> Recovery {
    let cosines: Vec<f64> = set
        .trained()
        .map(|b| (dot(&b.normal, u) / (norm(&b.normal) * norm(u))).abs())
        .collect();
    let total = set.len();
    let recovered = cosines.iter().filter(|&&c| c >= threshold).count();
    Recovery {
        threshold,
        recovered,
        failed: total - cosines.len(),
        total,
        rate: recovered as f64 / total as f64,
        min_abs_cos: cosines.iter().copied().fold(f64::INFINITY, f64::min),
        mean_abs_cos: mean(&cosines),
    }
}

/// Directory of one sweep point inside the workspace.
pub fn max_off_dir(ws: &Path, max_off: f64) -> PathBuf {
    ws.join(format!("max-off-{max_off}"))
}

/// Runs every stage on the toy world and writes `summary.json`.
pub fn toy_e2e(ws: &Path, args: &ToyE2eArgs) -> CliResult<E2eSummary> {
    if args.max_off_list.is_empty() {
        return Err(CliError::validation("max-off-list is empty"));
    }
    if args.eval_refs == 0 {
        return Err(CliError::validation("eval-refs must be at least 1"));
    }
    ensure_dir(ws)?;
    let world = toy_gen(
        ws,
        &ToyGenArgs {
            m: args.m,
            d: args.d,
            alpha: args.alpha,
            beta: args.beta,
            seed: args.seed,
            out: None,
        },
    )?;
    label(
        ws,
        &LabelArgs {
            latents: None,
            embeddings: None,
            debug_csv: false,
            out: None,
        },
    )?;
    let set = boundaries(
        ws,
        &BoundariesArgs {
            latents: None,
            labels: None,
            c: args.c,
            tol: args.tol,
            max_epochs: args.max_epochs,
            seed: args.seed,
            out: None,
        },
    )?;
    let recovery = direction_recovery(&set, world.direction(), args.recovery_threshold);
    log::info!(
        "direction recovery {}/{} (min |cos| {:.4})",
        recovery.recovered,
        recovery.total,
        recovery.min_abs_cos
    );

    let mut sweep = Vec::with_capacity(args.max_off_list.len());
    for &max_off in &args.max_off_list {
        let dir = max_off_dir(ws, max_off);
        let rows = generate(
            ws,
            &GenerateArgs {
                latents: None,
                boundaries: None,
                max_off,
                appearances: args.appearances,
                mode: args.mode,
                max_refs: Some(args.eval_refs),
                seed: args.seed,
                out: Some(dir.clone()),
            },
        )?;
        toy_embed(
            ws,
            &ToyEmbedArgs {
                latents: Some(dir.join(DATASET)),
                toy_manifest: None,
                out: Some(dir.clone()),
            },
        )?;
        let eval = |classes: Classes, references: Option<PathBuf>| {
            evaluate(
                ws,
                &EvaluateArgs {
                    embeddings: Some(dir.join(DATASET_EMBEDDINGS)),
                    records: Some(dir.join(RECORDS)),
                    protocol: Protocol::AllPairs,
                    classes,
                    max_refs: None,
                    references,
                    det_csv: false,
                    out: Some(dir.clone()),
                },
            )
        };
        let positive = eval(Classes::Positive, None)?.report;
        let negative = eval(Classes::Negative, None)?.report;
        let both = eval(Classes::Both, Some(ws.join(EMBEDDINGS)))?;
        sweep.push(SweepPoint {
            max_off,
            rows,
            positive,
            negative,
            both: both.report,
            sides: both.sides.expect("references given"),
        });
    }

    let summary = E2eSummary {
        config: E2eConfig {
            m: args.m,
            d: args.d,
            alpha: args.alpha,
            beta: args.beta,
            appearances: args.appearances,
            eval_refs: args.eval_refs,
            mode: args.mode,
            c: args.c,
            tol: args.tol,
            max_epochs: args.max_epochs,
            seed: args.seed,
        },
        recovery,
        sweep,
    };
    std::fs::write(ws.join(SUMMARY), to_json(&summary))
        .map_err(|e| CliError::Io(format!("{}: {e}", ws.join(SUMMARY).display())))?;
    Ok(summary)
}
