//! Seeded inputs shared by the benchmarks.

use lif_core::{
    label_all, toy_latents, LabelRow, Matrix, ScoreSet, SeededRng, ToyConfig, ToyWorld,
};

/// Toy latents, embeddings and labels for `m` references in `d` dimensions.
pub struct Fixture {
    pub world: ToyWorld,
    pub latents: Matrix,
    pub embeddings: Matrix,
    pub labels: Vec<LabelRow>,
}

pub fn toy_fixture(m: usize, d: usize, seed: u64) -> Fixture {
    let world = ToyWorld::new(ToyConfig::new(d, seed)).expect("valid toy config");
    let latents = toy_latents(m, d, seed).expect("valid toy size");
    let embeddings = world.embed_matrix(&latents).expect("non-degenerate");
    let (_, labels) = label_all(&embeddings).expect("m >= 3");
    Fixture {
        world,
        latents,
        embeddings,
        labels,
    }
}

/// Two overlapping Gaussian score lists.
pub fn score_set(n_genuine: usize, n_impostor: usize, seed: u64) -> ScoreSet {
    let mut rng = SeededRng::new(seed);
    let genuine = (0..n_genuine)
        .map(|_| 1.5 + rng.standard_normal())
        .collect();
    let impostor = (0..n_impostor).map(|_| rng.standard_normal()).collect();
    ScoreSet::new(genuine, impostor).expect("non-empty")
}
