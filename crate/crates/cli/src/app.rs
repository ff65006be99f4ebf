//! Command tree and dispatch shared by the binary and the tests.

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::error::{CliError, CliResult};
use crate::stages::*;
use crate::workspace::to_json;

#[derive(Debug, Parser)]
#[command(
    name = "lif",
    version,
    about = "Identity-separating latent directions: label, train, sample, evaluate"
)]
pub struct Cli {
    /// Directory holding the stage files.
    #[arg(long, global = true, default_value = ".")]
    pub workspace: PathBuf,
    /// Worker threads [default: all cores]
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Analytic toy generator and embedder.
    #[command(subcommand)]
    Toy(ToyCommand),
    /// Median-threshold similarity labels for every reference.
    Label(LabelArgs),
    /// One linear SVM boundary per reference.
    Boundaries(BoundariesArgs),
    /// Positive and negative samples offset along each boundary normal.
    Generate(GenerateArgs),
    /// Verification report over generated samples.
    Evaluate(EvaluateArgs),
    /// Borda count over a model x benchmark accuracy table.
    Borda(BordaArgs),
    /// Every stage on the toy world, with a sweep over max-off.
    ToyE2e(ToyE2eArgs),
}

#[derive(Debug, Subcommand)]
pub enum ToyCommand {
    /// Write toy latents W and embeddings F.
    Gen(ToyGenArgs),
    /// Embed generated latent codes with the recorded toy world.
    Embed(ToyEmbedArgs),
}

impl Command {
    /// Replaces every `--seed` value.
    pub fn override_seed(&mut self, seed: u64) {
        match self {
            Command::Toy(ToyCommand::Gen(a)) => a.seed = seed,
            Command::Boundaries(a) => a.seed = seed,
            Command::Generate(a) => a.seed = seed,
            Command::ToyE2e(a) => a.seed = seed,
            Command::Toy(ToyCommand::Embed(_))
            | Command::Label(_)
            | Command::Evaluate(_)
            | Command::Borda(_) => {}
        }
    }
}

/// Parses the `LIF_SEED` value.
pub fn parse_seed_override(value: &str) -> CliResult<u64> {
    value.trim().parse().map_err(|_| {
        CliError::validation(format!(
            "LIF_SEED must be an unsigned integer, got {value:?}"
        ))
    })
}

/// Runs one subcommand; the returned string is printed on stdout.
pub fn run(cli: &Cli) -> CliResult<Option<String>> {
    let ws = cli.workspace.as_path();
    match &cli.command {
        Command::Toy(ToyCommand::Gen(a)) => toy_gen(ws, a).map(|_| None),
        Command::Toy(ToyCommand::Embed(a)) => toy_embed(ws, a).map(|_| None),
        Command::Label(a) => label(ws, a).map(|_| None),
        Command::Boundaries(a) => boundaries(ws, a).map(|_| None),
        Command::Generate(a) => generate(ws, a).map(|_| None),
        Command::Evaluate(a) => evaluate(ws, a).map(|o| Some(to_json(&o.report))),
        Command::Borda(a) => borda(a).map(|r| Some(to_json(&r))),
        Command::ToyE2e(a) => toy_e2e(ws, a).map(|s| Some(to_json(&s))),
    }
}
