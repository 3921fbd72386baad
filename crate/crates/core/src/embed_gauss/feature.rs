use std::sync::Arc;

use rayon::prelude::*;

use super::params::GaussParams;
use crate::error::Result;
use crate::scalar::{lit, Real};
use crate::space::{compensated_sum, SparseVector};

/// Exponent vectors `α ∈ ℕ^dim` with `|α| <= degree`, graded then lexicographic (descending).
#[derive(Debug, Clone, PartialEq)]
pub struct MonomialTable<T> {
    pub dim: usize,
    pub degree: u32,
    exps: Vec<u16>,
    total: Vec<u32>,
    /// `-½ Σ_j ln α_j!`.
    ln_norm: Vec<T>,
}

fn compositions(m: u32, parts: usize, prefix: &mut Vec<u16>, out: &mut Vec<u16>) {
    if parts == 1 {
        out.extend_from_slice(prefix);
        out.push(m as u16);
        return;
    }
    for first in (0..=m).rev() {
        prefix.push(first as u16);
        compositions(m - first, parts - 1, prefix, out);
        prefix.pop();
    }
}

impl<T: Real> MonomialTable<T> {
    pub fn new(dim: usize, degree: u32) -> Self {
        let mut exps = Vec::new();
        let mut total = Vec::new();
        for m in 0..=degree {
            let before = exps.len();
            compositions(m, dim, &mut Vec::with_capacity(dim), &mut exps);
            total.extend(std::iter::repeat_n(m, (exps.len() - before) / dim));
        }
        let mut ln_fact = vec![0.0f64; degree as usize + 1];
        for k in 1..=degree as usize {
            ln_fact[k] = ln_fact[k - 1] + (k as f64).ln();
        }
        let ln_norm = exps
            .chunks(dim)
            .map(|a| lit::<T>(-0.5 * a.iter().map(|&e| ln_fact[e as usize]).sum::<f64>()))
            .collect();
        Self {
            dim,
            degree,
            exps,
            total,
            ln_norm,
        }
    }

    pub fn len(&self) -> usize {
        self.total.len()
    }

    pub fn is_empty(&self) -> bool {
        self.total.is_empty()
    }

    pub fn exponents(&self, idx: usize) -> &[u16] {
        &self.exps[idx * self.dim..(idx + 1) * self.dim]
    }

    /// Sorted multiset of 1-based coordinates, e.g. `α = (2, 1)` is `[1, 1, 2]`.
    pub fn multiset(&self, idx: usize) -> Vec<u32> {
        self.exponents(idx)
            .iter()
            .enumerate()
            .flat_map(|(j, &e)| std::iter::repeat_n(j as u32 + 1, e as usize))
            .collect()
    }
}

/// `x -> φ_t(x)`: `e^{-t‖x‖²} √((2t)^{|α|} / Π α_j!) x^α` for `|α| <= K`, renormalized to
/// unit `ℓ_2` norm.
#[derive(Debug, Clone)]
pub struct FeatureMap<T> {
    pub t: T,
    pub table: Arc<MonomialTable<T>>,
}

const PAR_THRESHOLD: usize = 4096;

impl<T: Real> FeatureMap<T> {
    pub fn new(t: T, table: Arc<MonomialTable<T>>) -> Self {
        Self { t, table }
    }

    /// Truncated, unnormalized block.
    pub fn raw(&self, x: &SparseVector<T>) -> Vec<T> {
        let d = self.table.dim;
        let mut ln_abs = vec![T::neg_infinity(); d];
        let mut neg = vec![false; d];
        for &(i, v) in x.entries() {
            ln_abs[i as usize - 1] = v.abs().ln();
            neg[i as usize - 1] = v < T::zero();
        }
        let r2: T = x.values().map(|v| v * v).sum();
        let half_ln_2t = (lit::<T>(2.0) * self.t).ln() / lit(2.0);
        let head = -self.t * r2;
        let coeff = |idx: usize| {
            let a = self.table.exponents(idx);
            let mut ln = head + lit::<T>(self.table.total[idx] as f64) * half_ln_2t + self.table.ln_norm[idx];
            let mut negative = false;
            for j in 0..d {
                if a[j] > 0 {
                    if ln_abs[j] == T::neg_infinity() {
                        return T::zero();
                    }
                    ln = ln + lit::<T>(a[j] as f64) * ln_abs[j];
                    negative ^= neg[j] && a[j] % 2 == 1;
                }
            }
            let v = ln.exp();
            if negative {
                -v
            } else {
                v
            }
        };
        if self.table.len() >= PAR_THRESHOLD {
            (0..self.table.len()).into_par_iter().map(coeff).collect()
        } else {
            (0..self.table.len()).map(coeff).collect()
        }
    }

    pub fn apply(&self, x: &SparseVector<T>) -> Vec<T> {
        let mut v = self.raw(x);
        let norm = compensated_sum(v.iter().map(|&c| c * c)).sqrt();
        for c in &mut v {
            *c = *c / norm;
        }
        v
    }
}

/// Single block `φ_t(x)` with the degree the params assign to width `t`.
pub fn phi<T: Real>(params: &GaussParams<T>, t: T, x: &SparseVector<T>) -> Result<Vec<T>> {
    params.check_input(x)?;
    let k = params.degree_for(0, t)?;
    let map = FeatureMap::new(t, Arc::new(MonomialTable::new(params.dim, k)));
    Ok(map.apply(x))
}

pub fn block_distance_sq<T: Real>(a: &[T], b: &[T]) -> T {
    compensated_sum(a.iter().zip(b).map(|(&u, &v)| (u - v) * (u - v)))
}
