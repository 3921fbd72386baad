//! Orlicz sequence spaces `h_M`: Luxemburg norms, Matuszewska-Orlicz indices, explicit
//! coarse and uniform embeddings, and a sampling harness that checks their moduli.
//!
//! Every numeric routine is generic over [`scalar::Real`] (`f32` or `f64`); the aliases
//! below fix `f64`.

pub mod classify;
pub mod embed_gauss;
pub mod embed_tent;
pub mod error;
pub mod funcdsl;
pub mod harness;
pub mod indices;
pub mod mazur;
pub mod moduli;
pub mod scalar;
pub mod space;

pub use error::{Error, Result};

pub type Function = funcdsl::OrliczFunction<f64>;
pub type Vector = space::SparseVector<f64>;
pub type Indices = indices::IndexEstimate<f64>;
pub type Constant = indices::ConstantEstimate<f64>;
pub type BasisSeries = indices::BasisCriterionSeries<f64>;
pub type Moduli = moduli::ModulusPair<f64>;
pub type TentParams = embed_tent::TentFamilyParams<f64>;
pub type GaussParams = embed_gauss::GaussParams<f64>;
pub type GaussEmbedding = embed_gauss::GaussEmbedding<f64>;
pub type MazurParams = mazur::MazurParams<f64>;
pub type Plan = harness::SamplePlan<f64>;
pub type Report = harness::DistortionReport<f64>;
