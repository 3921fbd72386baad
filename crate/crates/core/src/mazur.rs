//! Signed-power map between unit spheres of `ℓ_p` and `ℓ_q`.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{lit, to_f64, tol, Real};
use crate::space::SparseVector;

/// Inputs this close to the unit sphere are renormalized; farther ones are refused.
pub const SPHERE_TOL: f64 = 1e-9;

/// Map from the unit sphere of `ℓ_p` to that of `ℓ_q`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct MazurParams<T> {
    pub p: T,
    pub q: T,
}

impl<T: Real> MazurParams<T> {
    pub fn new(p: T, q: T) -> Result<Self> {
        if !(p >= T::one() && q >= T::one() && p.is_finite() && q.is_finite()) {
            return Err(Error::InvalidParameter(format!("Mazur exponents need 1 <= p, q < inf, got p={p}, q={q}")));
        }
        Ok(Self { p, q })
    }

    pub fn inverse(&self) -> Self {
        Self { p: self.q, q: self.p }
    }

    pub fn exponent(&self) -> T {
        self.p / self.q
    }
}

/// Scales `x` onto the `ℓ_p` unit sphere if it already lies within [`SPHERE_TOL`].
pub fn to_sphere<T: Real>(x: &SparseVector<T>, p: T) -> Result<SparseVector<T>> {
    let n = x.lp_norm(p);
    if !((n - T::one()).abs() <= tol::<T>(SPHERE_TOL)) {
        return Err(Error::NotOnSphere { norm: to_f64(n) });
    }
    Ok(x.scale(n.recip()))
}

/// `x_i -> |x_i|^{p/q} sign(x_i)`.
pub fn mazur_map<T: Real>(params: &MazurParams<T>, x: &SparseVector<T>) -> Result<SparseVector<T>> {
    let x = to_sphere(x, params.p)?;
    let e = params.exponent();
    Ok(x.map_values(|v| v.abs().powf(e).copysign(v)))
}

/// Uniform direction in `dim` coordinates, scaled to the `ℓ_p` unit sphere.
pub fn sample_sphere<T: Real, R: Rng + ?Sized>(rng: &mut R, dim: usize, p: T) -> SparseVector<T> {
    loop {
        let g: Vec<T> = (0..dim).map(|_| lit::<T>(rng.sample::<f64, _>(StandardNormal))).collect();
        let v = SparseVector::from_dense(&g);
        let n = v.lp_norm(p);
        if n > T::zero() {
            return v.scale(n.recip());
        }
    }
}

/// Outcome of checking the upper estimate `‖M(x) - M(y)‖_q <= (p/q) ‖x - y‖_p` on sphere pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct MazurCheck<T> {
    pub upper_holds: bool,
    /// `min ‖M(x) - M(y)‖_q / ‖x - y‖_p^{p/q}` over pairs with `‖x - y‖_p^{p/q} >= 1e6 eps`.
    pub c_hat: Option<T>,
    /// Smallest `(p/q) ‖x - y‖_p - ‖M(x) - M(y)‖_q`.
    pub min_upper_slack: T,
    /// First pair breaking the upper estimate: `(index, lhs, rhs)`.
    pub witness: Option<(usize, T, T)>,
    pub pairs: usize,
}

pub fn check_mazur_bounds<T: Real>(
    params: &MazurParams<T>,
    pairs: &[(SparseVector<T>, SparseVector<T>)],
) -> Result<MazurCheck<T>> {
    if !(params.p > params.q) {
        return Err(Error::InvalidParameter(format!(
            "the two-sided estimate needs p > q, got p={}, q={}",
            params.p, params.q
        )));
    }
    let lip = params.exponent();
    let rows = pairs
        .par_iter()
        .map(|(x, y)| {
            let d_in = x.sub(y).lp_norm(params.p);
            let d_out = mazur_map(params, x)?.sub(&mazur_map(params, y)?).lp_norm(params.q);
            Ok((d_in, d_out))
        })
        .collect::<Result<Vec<(T, T)>>>()?;
    let slop = tol::<T>(1e-12);
    let mut out = MazurCheck {
        upper_holds: true,
        c_hat: None,
        min_upper_slack: T::infinity(),
        witness: None,
        pairs: pairs.len(),
    };
    for (i, &(d_in, d_out)) in rows.iter().enumerate() {
        let rhs = lip * d_in;
        let slack = rhs - d_out;
        out.min_upper_slack = out.min_upper_slack.min(slack);
        if slack < -slop * rhs.max(slop) && out.witness.is_none() {
            out.upper_holds = false;
            out.witness = Some((i, d_out, rhs));
        }
        // below this the ratio is dominated by rounding in the renormalized images
        if d_in.powf(lip) >= T::epsilon() * lit(1e6) {
            let r = d_out / d_in.powf(lip);
            out.c_hat = Some(out.c_hat.map_or(r, |c: T| c.min(r)));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn sv(v: &[f64]) -> SparseVector<f64> {
        SparseVector::from_dense(v)
    }

    fn pairs(n: usize, dim: usize, p: f64, seed: u64) -> Vec<(SparseVector<f64>, SparseVector<f64>)> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| {
                let d = rng.gen_range(1..=dim);
                (sample_sphere(&mut rng, d, p), sample_sphere(&mut rng, d, p))
            })
            .collect()
    }

    #[test]
    fn examples() {
        let id = MazurParams::new(3.0, 3.0).unwrap();
        let x = sv(&[0.6f64.powf(1.0 / 3.0), -(0.4f64.powf(1.0 / 3.0))]);
        assert_eq!(mazur_map(&id, &x).unwrap(), to_sphere(&x, 3.0).unwrap());
        let m = MazurParams::new(2.0, 1.0).unwrap();
        let h = 0.5f64.sqrt();
        let y = mazur_map(&m, &sv(&[h, h])).unwrap();
        assert!((y.get(1) - 0.5).abs() < 1e-15 && (y.get(2) - 0.5).abs() < 1e-15);
        assert_eq!(mazur_map(&m, &sv(&[1.0])).unwrap(), sv(&[1.0]));
        assert_eq!(mazur_map(&m, &sv(&[-1.0, 0.0])).unwrap(), sv(&[-1.0]));
    }

    #[test]
    fn refuses_points_off_the_sphere() {
        let m = MazurParams::new(2.0, 1.0).unwrap();
        assert!(matches!(mazur_map(&m, &sv(&[1.0, 1e-3])), Err(Error::NotOnSphere { .. })));
        assert!(mazur_map(&m, &sv(&[1.0 + 1e-10])).is_ok());
        assert!(MazurParams::new(0.5, 1.0).is_err());
    }

    #[test]
    fn identical_pair_contributes_zero() {
        let m = MazurParams::new(2.0, 1.0).unwrap();
        let x = sv(&[0.6, 0.8]);
        let c = check_mazur_bounds(&m, &[(x.clone(), x)]).unwrap();
        assert!(c.upper_holds && c.c_hat.is_none() && c.min_upper_slack == 0.0);
    }

    #[test]
    fn upper_estimate_and_constant_for_square_map() {
        let m = MazurParams::new(2.0, 1.0).unwrap();
        let c = check_mazur_bounds(&m, &pairs(10_000, 8, 2.0, 7)).unwrap();
        assert!(c.upper_holds, "{:?}", c.witness);
        // |a|a| - b|b|| >= |a - b|^2 / 2 coordinatewise, so the constant is at least 1/2
        let ch = c.c_hat.unwrap();
        assert!((0.5 - 1e-12..1.0).contains(&ch), "{ch}");
    }

    #[test]
    fn constant_against_coarse_net() {
        // exhaustive search over a net on the 2-sphere of ℓ_2 in dimension 3
        let m = MazurParams::new(2.0, 1.0).unwrap();
        let mut net = Vec::new();
        for a in 0..24 {
            for b in 0..12 {
                let (th, ph) = (a as f64 * std::f64::consts::PI / 12.0, (b as f64 + 0.5) * std::f64::consts::PI / 12.0);
                net.push(sv(&[ph.sin() * th.cos(), ph.sin() * th.sin(), ph.cos()]));
            }
        }
        let mut all = Vec::new();
        for x in &net {
            for y in &net {
                all.push((x.clone(), y.clone()));
            }
        }
        let c = check_mazur_bounds(&m, &all).unwrap();
        assert!(c.upper_holds);
        let net_c = c.c_hat.unwrap();
        let sampled = check_mazur_bounds(&m, &pairs(4000, 3, 2.0, 11)).unwrap().c_hat.unwrap();
        assert!((0.5 - 1e-12..0.55).contains(&net_c), "{net_c}");
        assert!(sampled / net_c < 2.0 && net_c / sampled < 2.0);
    }

    #[test]
    fn inverse_composition() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for &(p, q) in &[(2.0f64, 1.0f64), (3.0, 1.5), (1.2, 4.0)] {
            let m = MazurParams::new(p, q).unwrap();
            for _ in 0..500 {
                let x = sample_sphere(&mut rng, 6, p);
                let y = mazur_map(&m, &x).unwrap();
                assert!((y.lp_norm(q) - 1.0).abs() < 1e-9);
                let back = mazur_map(&m.inverse(), &y).unwrap();
                assert!(back.sub(&x).max_abs() < 1e-9);
            }
        }
    }
}
