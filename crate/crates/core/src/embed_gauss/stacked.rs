use std::collections::HashMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::feature::{FeatureMap, MonomialTable};
use super::params::GaussParams;
use crate::error::Result;
use crate::moduli::{Modulus, ModulusPair};
use crate::scalar::{lit, Real};
use crate::space::{compensated_sum, SparseVector};

/// One block per level: `M_{2,p}(φ_{t_n}(x)) - M_{2,p}(φ_{t_n}(x0))`, indexed like the level's
/// monomial table.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector<T> {
    pub blocks: Vec<Vec<T>>,
}

/// JSON form: `[[level, multiset], value]` for nonzero entries, levels counted from 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct KeyedFeatures<T> {
    pub entries: Vec<((usize, Vec<u32>), T)>,
}

impl<T: Real> FeatureVector<T> {
    pub fn len(&self) -> usize {
        self.blocks.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Per-level `‖a_n - b_n‖_p^p`.
    pub fn level_distance_pow(&self, other: &Self, p: T) -> Vec<T> {
        self.blocks
            .iter()
            .zip(&other.blocks)
            .map(|(a, b)| compensated_sum(a.iter().zip(b).map(|(&u, &v)| (u - v).abs().powf(p))))
            .collect()
    }

    pub fn distance(&self, other: &Self, p: T) -> T {
        compensated_sum(self.level_distance_pow(other, p).into_iter()).powf(p.recip())
    }
}

/// `v -> |v|^{2/p} sign(v)` on a unit `ℓ_2` block.
pub fn mazur_block<T: Real>(v: &[T], p: T) -> Vec<T> {
    let e = lit::<T>(2.0) / p;
    v.iter().map(|&c| c.abs().powf(e).copysign(c)).collect()
}

/// Stacked embedding `x -> (f_n(x) - f_n(x0))_n` with `f_n = M_{2,p} ∘ φ_{t_n}`.
#[derive(Debug, Clone)]
pub struct GaussEmbedding<T> {
    pub params: GaussParams<T>,
    maps: Vec<FeatureMap<T>>,
    base: Vec<Vec<T>>,
}

impl<T: Real> GaussEmbedding<T> {
    pub fn new(params: GaussParams<T>) -> Result<Self> {
        let mut tables: HashMap<u32, Arc<MonomialTable<T>>> = HashMap::new();
        let mut maps = Vec::with_capacity(params.levels.len());
        for (n, &t) in params.levels.iter().enumerate() {
            let k = params.degree_for(n + 1, t)?;
            let table = tables
                .entry(k)
                .or_insert_with(|| Arc::new(MonomialTable::new(params.dim, k)))
                .clone();
            maps.push(FeatureMap::new(t, table));
        }
        let base = maps.iter().map(|m| mazur_block(&m.apply(&params.x0), params.p)).collect();
        Ok(Self { params, maps, base })
    }

    pub fn degrees(&self) -> Vec<u32> {
        self.maps.iter().map(|m| m.table.degree).collect()
    }

    pub fn feature_count(&self) -> usize {
        self.maps.iter().map(|m| m.table.len()).sum()
    }

    /// `φ_{t_n}(x)` for level `n` counted from 0.
    pub fn phi_level(&self, n: usize, x: &SparseVector<T>) -> Result<Vec<T>> {
        self.params.check_input(x)?;
        Ok(self.maps[n].apply(x))
    }

    pub fn stacked_embed(&self, x: &SparseVector<T>) -> Result<FeatureVector<T>> {
        self.params.check_input(x)?;
        let blocks = self
            .maps
            .iter()
            .zip(&self.base)
            .map(|(m, b)| {
                let mut v = mazur_block(&m.apply(x), self.params.p);
                for (c, &o) in v.iter_mut().zip(b) {
                    *c = *c - o;
                }
                v
            })
            .collect();
        Ok(FeatureVector { blocks })
    }

    pub fn keyed(&self, f: &FeatureVector<T>) -> KeyedFeatures<T> {
        let mut entries = Vec::new();
        for (n, (block, map)) in f.blocks.iter().zip(&self.maps).enumerate() {
            for (idx, &v) in block.iter().enumerate() {
                if v != T::zero() {
                    entries.push(((n + 1, map.table.multiset(idx)), v));
                }
            }
        }
        KeyedFeatures { entries }
    }

    pub fn moduli(&self, c_hat: T) -> ModulusPair<T> {
        gauss_moduli(&self.params, c_hat)
    }
}

/// `ρ1(s) = 2^{1/p} c_hat (Σ_n 1 - e^{-t_n s²})^{1/p}`, `ρ2(s) = (2√2/p) (Σ_n √t_n) s`.
pub fn gauss_moduli<T: Real>(params: &GaussParams<T>, c_hat: T) -> ModulusPair<T> {
    let slope = lit::<T>(2.0) * T::SQRT_2() / params.p * params.sqrt_sum();
    ModulusPair {
        rho1: Modulus::GaussLower {
            c_hat,
            p: params.p,
            levels: params.levels.clone(),
        },
        rho2: Modulus::Linear { slope },
    }
}
