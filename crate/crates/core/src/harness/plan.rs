use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mazur::{sample_sphere, to_sphere};
use crate::scalar::{lit, pow2, Real};
use crate::space::SparseVector;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", bound = "T: Real")]
pub enum Generator<T> {
    /// `x` random sparse, `y = x + δ` with `δ` sparse; magnitudes `m 2^e`, `e` in
    /// `[min_exp, max_exp]`, `m` dyadic in `{1, 1.25, 1.5, 1.75}` except for a
    /// `perturb_fraction` share drawn uniformly from `[1, 2)`. Half of the `δ` indices
    /// reuse the support of `x`.
    DyadicSparse {
        max_support: usize,
        index_range: u64,
        min_exp: i32,
        max_exp: i32,
        perturb_fraction: f64,
    },
    /// Points on the unit sphere of `ℓ_p^d`, `d` uniform in `1..=dim`. A `near_fraction`
    /// share of the `y` are `x` moved by `2^u g` (`u` uniform in `[min_log2, 0]`) and
    /// renormalized; the rest are independent.
    Sphere { p: T, dim: usize, near_fraction: f64, min_log2: i32 },
    /// `y - x = d u` with `u` a random `ℓ_p` unit direction in `dim` coordinates and `d`
    /// cycling through `distances`; the midpoint is uniform in the `ℓ_2` ball that keeps
    /// both ends within `radius`.
    PairsAtDistance { dim: usize, p: T, distances: Vec<T>, radius: T },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct SamplePlan<T> {
    pub generator: Generator<T>,
    pub count: usize,
    pub seed: u64,
}

pub type Pair<T> = (SparseVector<T>, SparseVector<T>);

/// Generator for pair `index`: the seed picks the key, the index picks the stream, so a
/// pair does not depend on which thread draws it or in which order.
pub fn pair_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

const DYADIC_MANTISSAS: [f64; 4] = [1.0, 1.25, 1.5, 1.75];

fn magnitude<T: Real, R: Rng>(rng: &mut R, min_exp: i32, max_exp: i32, perturb: f64) -> T {
    let e = rng.gen_range(min_exp..=max_exp);
    let m = if rng.gen_bool(perturb) {
        rng.gen_range(1.0..2.0)
    } else {
        DYADIC_MANTISSAS[rng.gen_range(0..DYADIC_MANTISSAS.len())]
    };
    let s = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
    lit::<T>(s * m) * pow2(e as i64)
}

fn gaussian_direction<T: Real, R: Rng>(rng: &mut R, dim: usize) -> Vec<T> {
    (0..dim).map(|_| lit::<T>(rng.sample::<f64, _>(StandardNormal))).collect()
}

impl<T: Real> SamplePlan<T> {
    pub fn new(generator: Generator<T>, count: usize, seed: u64) -> Result<Self> {
        let plan = Self { generator, count, seed };
        plan.check()?;
        Ok(plan)
    }

    pub fn check(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(m.to_string()));
        match &self.generator {
            Generator::DyadicSparse { max_support, index_range, min_exp, max_exp, perturb_fraction } => {
                if *max_support == 0 || *index_range == 0 || (*max_support as u64) > *index_range {
                    return bad("dyadic-sparse needs 1 <= max_support <= index_range");
                }
                if min_exp > max_exp || !(0.0..=1.0).contains(perturb_fraction) {
                    return bad("dyadic-sparse needs min_exp <= max_exp and perturb_fraction in [0, 1]");
                }
            }
            Generator::Sphere { p, dim, near_fraction, min_log2 } => {
                if !(*p >= T::one()) || *dim == 0 || !(0.0..=1.0).contains(near_fraction) || *min_log2 > 0 {
                    return bad("sphere needs p >= 1, dim >= 1, near_fraction in [0, 1], min_log2 <= 0");
                }
            }
            Generator::PairsAtDistance { dim, p, distances, radius } => {
                if *dim == 0 || !(*p >= T::one()) || distances.is_empty() || !(*radius > T::zero()) {
                    return bad("pairs-at-distance needs dim >= 1, p >= 1, a nonempty distance grid, radius > 0");
                }
                if distances.iter().any(|d| !(*d > T::zero()) || !d.is_finite()) {
                    return bad("pairs-at-distance distances must be positive and finite");
                }
            }
        }
        Ok(())
    }

    /// Pair number `index`; identical for a fixed seed regardless of evaluation order.
    pub fn pair(&self, index: usize) -> Result<Pair<T>> {
        let mut rng = pair_rng(self.seed, index);
        match &self.generator {
            Generator::DyadicSparse { max_support, index_range, min_exp, max_exp, perturb_fraction } => {
                let pick = |rng: &mut ChaCha8Rng, used: &mut Vec<u64>, pool: &[u64]| loop {
                    let i = if !pool.is_empty() && rng.gen_bool(0.5) {
                        pool[rng.gen_range(0..pool.len())]
                    } else {
                        rng.gen_range(1..=*index_range)
                    };
                    if !used.contains(&i) {
                        used.push(i);
                        return i;
                    }
                };
                let mut xi = Vec::new();
                let kx = rng.gen_range(0..=*max_support);
                let x: Vec<(u64, T)> = (0..kx)
                    .map(|_| (pick(&mut rng, &mut xi, &[]), magnitude(&mut rng, *min_exp, *max_exp, *perturb_fraction)))
                    .collect();
                let mut di = Vec::new();
                let kd = rng.gen_range(1..=*max_support);
                let d: Vec<(u64, T)> = (0..kd)
                    .map(|_| (pick(&mut rng, &mut di, &xi), magnitude(&mut rng, *min_exp, *max_exp, *perturb_fraction)))
                    .collect();
                let x = SparseVector::from_entries(x)?;
                let y = x.add(&SparseVector::from_entries(d)?);
                Ok((x, y))
            }
            Generator::Sphere { p, dim, near_fraction, min_log2 } => {
                let d = rng.gen_range(1..=*dim);
                let x = sample_sphere(&mut rng, d, *p);
                if !rng.gen_bool(*near_fraction) {
                    return Ok((x, sample_sphere(&mut rng, d, *p)));
                }
                let u = rng.gen_range(*min_log2 as f64..=0.0);
                let g = SparseVector::from_dense(&gaussian_direction::<T, _>(&mut rng, d));
                let moved = x.add(&g.scale(lit::<T>(u.exp2())));
                let n = moved.lp_norm(*p);
                if !(n > T::zero()) {
                    return Ok((x.clone(), x));
                }
                let y = to_sphere(&moved.scale(n.recip()), *p)?;
                Ok((x, y))
            }
            Generator::PairsAtDistance { dim, p, distances, radius } => {
                let dist = distances[index % distances.len()];
                let u = loop {
                    let v = SparseVector::from_dense(&gaussian_direction::<T, _>(&mut rng, *dim));
                    let n = v.lp_norm(*p);
                    if n > T::zero() {
                        break v.scale(n.recip());
                    }
                };
                let half = u.scale(dist / lit(2.0));
                let room = (*radius - half.l2_norm()).max(T::zero());
                let dir = SparseVector::from_dense(&gaussian_direction::<T, _>(&mut rng, *dim));
                let n = dir.l2_norm();
                let r = room * lit::<T>(rng.gen_range(0.0f64..1.0).powf(1.0 / *dim as f64));
                let c = if n > T::zero() { dir.scale(r / n) } else { SparseVector::zero() };
                Ok((c.sub(&half), c.add(&half)))
            }
        }
    }
}
