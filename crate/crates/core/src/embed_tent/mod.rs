//! Tent-function embedding of `h_M` into `ℓ_p(ℕ × ℤ × ℤ)`.

mod embed;
mod family;
mod params;

pub use embed::{embed_vector, TentCoordinates, TentKey};
pub use family::{
    lower_witness, scalar_sandwich_sum, scalar_sandwich_sum_window, sum_rel_tol, tent_eval, tent_slope, unit_tent,
    LowerWitness, SandwichSum,
};
pub use params::{constant_a, default_tent_q, moduli, upper_scale, TentFamilyParams, DEFAULT_TAIL_EPS};
