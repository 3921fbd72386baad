//! Sampling-based certification of `ρ1(d) <= d_out <= ρ2(d)` for the embeddings.

mod embeddings;
mod plan;
mod report;

pub use embeddings::{Embedding, GaussStackedEmbedding, IdentityLp, MazurEmbedding, TentEmbedding};
pub use plan::{pair_rng, Generator, Pair, SamplePlan};
pub use report::{
    empirical_moduli, run_distortion, small_distance_check, Bucket, DistortionReport, PairFailure, PairRecord,
    SmallDistanceCheck, Violation, BASE_TOL, SMALL_DISTANCE_LOG2,
};
