use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::scalar::{to_f64, Real};
use crate::space::SparseVector;

fn sq_dist<T: Real>(a: &SparseVector<T>, b: &SparseVector<T>) -> f64 {
    to_f64(a.sub(b).l2_norm()).powi(2)
}

/// Smallest eigenvalue of `[e^{-t ‖x_i - x_j‖²}]`.
pub fn gram_min_eigenvalue<T: Real>(points: &[SparseVector<T>], t: T) -> f64 {
    let n = points.len();
    let t = to_f64(t);
    let g = DMatrix::from_fn(n, n, |i, j| (-t * sq_dist(&points[i], &points[j])).exp());
    SymmetricEigen::new(g).eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
}

/// Largest `c^T D c` over random unit zero-sum `c`, with `D = [‖x_i - x_j‖²]`; never
/// positive for a negative definite kernel.
pub fn negative_definite_max<T: Real, R: Rng + ?Sized>(points: &[SparseVector<T>], trials: usize, rng: &mut R) -> f64 {
    let n = points.len();
    let d = DMatrix::from_fn(n, n, |i, j| sq_dist(&points[i], &points[j]));
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..trials {
        let mut c = DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
        let mean = c.mean();
        c.add_scalar_mut(-mean);
        let norm = c.norm();
        if norm == 0.0 {
            continue;
        }
        c /= norm;
        worst = worst.max(c.dot(&(&d * &c)));
    }
    worst
}
