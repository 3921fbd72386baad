//! Gaussian-kernel feature maps, composed with the Mazur map and stacked over widths.

mod feature;
mod kernel;
mod params;
mod stacked;

pub use feature::{block_distance_sq, phi, FeatureMap, MonomialTable};
pub use kernel::{gram_min_eigenvalue, negative_definite_max};
pub use params::{adaptive_degree, default_schedule, poisson_tail, Degree, GaussParams};
pub use stacked::{gauss_moduli, mazur_block, FeatureVector, GaussEmbedding, KeyedFeatures};
