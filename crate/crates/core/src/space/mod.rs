//! Finitely supported sequences and the Luxemburg norm.

mod norm;
mod vector;

pub use norm::compensated_sum;
pub use norm::{
    check_lemma_sum_vs_norm, luxemburg_norm, modular_sum, norm_tolerance, LemmaCheck, LemmaSide, NormResult,
};
pub use vector::SparseVector;
