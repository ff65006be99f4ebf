//! Identity-separating directions in generative latent spaces.
//!
//! The pipeline, one module per stage:
//!
//! 1. [`similarity`]: cosine similarity of every embedding pair, median
//!    threshold per reference, binary similar/dissimilar labels.
//! 2. [`svm`] and [`boundary`]: one linear SVM per reference on the other
//!    latent codes; its unit normal is the identity direction.
//! 3. [`sampler`]: class-positive and class-negative codes offset along that
//!    direction.
//! 4. [`metrics`]: EER, FMR100, FDR, 1:N similarity and Borda counts.
//!
//! [`matrix`] and [`manifest`] own the interchange files, [`rng`] the seeded
//! streams, and [`toy`] an analytic generator/embedder with a known identity
//! axis for end-to-end checks.

pub mod boundary;
pub mod error;
pub mod manifest;
pub mod matrix;
pub mod metrics;
pub mod rng;
pub mod sampler;
pub mod similarity;
pub mod svm;
pub mod toy;

#[cfg(any(test, feature = "oracles"))]
pub mod oracle;

pub use boundary::{boundary_from_svm, train_all_boundaries, BoundarySet, IdentityBoundary};
pub use error::{Error, FormatError, Result};
pub use manifest::RunManifest;
pub use matrix::{read_matrix, write_matrix, Matrix};
pub use metrics::{
    borda_count, build_scores, eer, fdr, fmr100, one_to_n_summary, verification_report, Protocol,
    ScoreSet, VerificationReport,
};
pub use rng::{derive_seed, SeededRng};
pub use sampler::{
    generate_dataset, make_pair, sample_offset, GeneratedDataset, SampleRecord, SamplingConfig,
    SamplingMode, Side,
};
pub use similarity::{
    cosine_similarity, label_all, label_row, median_threshold, similarity_matrix, LabelRow,
    SimilarityRow,
};
pub use svm::{train_linear_svm, SvmConfig, SvmModel, TrainingStats};
pub use toy::{toy_latents, ToyConfig, ToyWorld};
