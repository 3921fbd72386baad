use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::family::{tent_increment, unit_height, Scaled};
use super::params::TentFamilyParams;
use crate::error::Result;
use crate::scalar::Real;
use crate::space::{compensated_sum, SparseVector};

/// Key `(i, n, k)`: coordinate, scale, translate.
pub type TentKey = (u64, i64, i64);

/// Sparse point of `ℓ_p(ℕ × ℤ × ℤ)`; only nonzero entries are stored, sorted by key.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct TentCoordinates<T> {
    pub entries: Vec<(TentKey, T)>,
    pub window: (i64, i64),
}

impl<T: Real> TentCoordinates<T> {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// `Σ |a - b|^p` over the union of keys.
    pub fn distance_pow(&self, other: &Self, p: T) -> T {
        let (a, b) = (&self.entries, &other.entries);
        let (mut i, mut j) = (0, 0);
        let mut terms = Vec::with_capacity(a.len().max(b.len()));
        while i < a.len() || j < b.len() {
            let diff = if j >= b.len() || (i < a.len() && a[i].0 < b[j].0) {
                i += 1;
                a[i - 1].1
            } else if i >= a.len() || b[j].0 < a[i].0 {
                j += 1;
                -b[j - 1].1
            } else {
                i += 1;
                j += 1;
                a[i - 1].1 - b[j - 1].1
            };
            terms.push(diff.abs().powf(p));
        }
        compensated_sum(terms.into_iter())
    }

    pub fn distance(&self, other: &Self, p: T) -> T {
        self.distance_pow(other, p).powf(p.recip())
    }
}

fn embed_coordinate<T: Real>(params: &TentFamilyParams<T>, i: u64, x: T, window: (i64, i64)) -> Result<Vec<(TentKey, T)>> {
    let mut out = Vec::new();
    for n in window.0..=window.1 {
        let (s0, sx) = (Scaled::new(T::zero(), n)?, Scaled::new(x, n)?);
        let h = unit_height(params, n)?;
        let mut ks: Vec<i128> = s0.active().chain(sx.active()).collect();
        ks.sort_unstable();
        ks.dedup();
        for c0 in ks {
            let v = h * tent_increment(&s0, &sx, c0);
            if v != T::zero() {
                out.push(((i, n, (c0 + 1) as i64), v));
            }
        }
    }
    Ok(out)
}

/// `f(x)_{i,n,k} = f_{n,k}(x_i) - f_{n,k}(0)` over the global window of `params`.
pub fn embed_vector<T: Real>(params: &TentFamilyParams<T>, x: &SparseVector<T>) -> Result<TentCoordinates<T>> {
    let window = params.window();
    let parts = x
        .entries()
        .par_iter()
        .map(|&(i, v)| embed_coordinate(params, i, v, window))
        .collect::<Result<Vec<_>>>()?;
    // coordinates are visited in increasing i and each part is sorted by (n, k)
    Ok(TentCoordinates {
        entries: parts.into_iter().flatten().collect(),
        window,
    })
}
