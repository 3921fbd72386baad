use serde::Serialize;

use crate::error::{Error, Result};
use crate::funcdsl::OrliczFunction;
use crate::indices::{estimate_c, estimate_indices, DyadicGrid, IndexEstimate};
use crate::moduli::{Modulus, ModulusPair};
use crate::scalar::{lit, to_f64, Real};

pub const DEFAULT_TAIL_EPS: f64 = 1e-6;

/// Tent-family configuration. `c` is the lower-bound constant valid for every `λ > 0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound = "T: Real")]
pub struct TentFamilyParams<T> {
    pub m: OrliczFunction<T>,
    pub p: T,
    pub q: T,
    pub c: T,
    pub a: T,
    pub tail_eps: T,
    /// Coordinate differences this window is sized for; see [`TentFamilyParams::window`].
    pub d_min: T,
    pub d_max: T,
}

/// `8 4^p (1 + (1/C) / (1 - 2^{1 - p/q}))`.
pub fn constant_a<T: Real>(p: T, q: T, c: T) -> T {
    let two = lit::<T>(2.0);
    lit::<T>(8.0) * lit::<T>(4.0).powf(p) * (T::one() + c.recip() / (T::one() - two.powf(T::one() - p / q)))
}

/// `beta_high + (p - beta_high) / 4`.
pub fn default_tent_q<T: Real>(est: &IndexEstimate<T>, p: T) -> T {
    est.beta_high + (p - est.beta_high) / lit(4.0)
}

impl<T: Real> TentFamilyParams<T> {
    /// Explicit constants; `m` is normalized to `M(1) = 1`.
    pub fn new(m: &OrliczFunction<T>, p: T, q: T, c: T) -> Result<Self> {
        if !(q < p && q >= T::one() && p.is_finite()) {
            return Err(Error::InvalidParameter(format!("tent family needs 1 <= q < p < inf, got q={q}, p={p}")));
        }
        if !(c > T::zero() && c <= T::one()) {
            return Err(Error::InvalidParameter(format!("lower-bound constant must lie in (0, 1], got {c}")));
        }
        let a = constant_a(p, q, c);
        Ok(Self {
            m: m.normalized()?,
            p,
            q,
            c,
            a,
            tail_eps: lit(DEFAULT_TAIL_EPS),
            d_min: crate::scalar::pow2(-16),
            d_max: crate::scalar::pow2(8),
        })
    }

    /// Estimates the index bracket and the extended constant, with `q` defaulting to
    /// `beta_high + (p - beta_high)/4`.
    pub fn from_function(m: &OrliczFunction<T>, p: T, q: Option<T>, grid: DyadicGrid, t_max: T) -> Result<Self> {
        let m = m.normalized()?;
        let est = estimate_indices(&m, grid)?;
        if !(p > est.beta_high) {
            return Err(Error::QNotAboveBeta {
                q: to_f64(p),
                beta_high: to_f64(est.beta_high),
            });
        }
        let q = q.unwrap_or_else(|| default_tent_q(&est, p));
        let c = estimate_c(&m, q, &est, t_max)?;
        Self::new(&m, p, q, c.c_ext)
    }

    pub fn with_tail_eps(mut self, eps: T) -> Result<Self> {
        if !(eps > T::zero() && eps < T::one()) {
            return Err(Error::InvalidParameter(format!("tail_eps must lie in (0, 1), got {eps}")));
        }
        self.tail_eps = eps;
        Ok(self)
    }

    pub fn with_difference_range(mut self, d_min: T, d_max: T) -> Result<Self> {
        if !(d_min > T::zero() && d_min <= d_max && d_max.is_finite()) {
            return Err(Error::InvalidParameter(format!("bad difference range [{d_min}, {d_max}]")));
        }
        self.d_min = d_min;
        self.d_max = d_max;
        Ok(self)
    }

    fn base(&self) -> T {
        lit::<T>(8.0) * lit::<T>(4.0).powf(self.p)
    }

    fn ratio(&self) -> T {
        self.p / self.q - T::one()
    }

    /// Scales finer than `N` by more than this many contribute less than `tail_eps/2` of `M(d)`.
    pub fn fine_margin(&self) -> i64 {
        let need = self.base() / (self.tail_eps / lit(2.0));
        to_f64(need.log2()).ceil().max(1.0) as i64
    }

    /// Scales coarser than `N` by more than this many contribute less than `tail_eps/2` of `M(d)`.
    pub fn coarse_margin(&self) -> i64 {
        let r = self.ratio();
        let geo = T::one() - lit::<T>(2.0).powf(-r);
        let need = self.base() / self.c / geo / (self.tail_eps / lit(2.0));
        // (8 4^p / C) 2^{-r (B+1)} / (1 - 2^{-r}) < eps/2
        (to_f64(need.log2() / r).ceil() - 1.0).max(1.0) as i64
    }

    /// Global scale window `[N(d_max) - B, N(d_min) + B']` used by the vector embedding.
    pub fn window(&self) -> (i64, i64) {
        (
            upper_scale(self.d_max) - self.coarse_margin(),
            upper_scale(self.d_min) + self.fine_margin(),
        )
    }

    /// Factor `τ` with the excluded scales outside `[lo, hi]` contributing at most `τ M(d)`.
    pub fn tail_factor(&self, d: T, lo: i64, hi: i64) -> T {
        let n = upper_scale(d);
        let (base, r) = (self.base(), self.ratio());
        let two = lit::<T>(2.0);
        let fine = |m: i64| base * two.powi(-(m as i32)); // Σ_{n > N + m}, m >= 0
        let coarse = |m: i64| base / self.c * two.powf(-r * lit((m + 1) as f64)) / (T::one() - two.powf(-r)); // Σ_{n < N - m}
        let geo_fine = base; // Σ_{n > N} 2^{-(n-N)}
        let geo_coarse = base / self.c / (T::one() - two.powf(-r)); // Σ_{n <= N}
        let mut tau = T::zero();
        // scales above hi
        if hi >= n {
            tau = tau + fine(hi - n);
        } else {
            tau = tau + geo_fine + geo_coarse - coarse(n - hi - 1);
        }
        // scales below lo
        if lo <= n {
            tau = tau + coarse(n - lo);
        } else {
            tau = tau + geo_coarse + (geo_fine - fine(lo - n - 1));
        }
        tau
    }

    pub fn moduli(&self) -> ModulusPair<T> {
        moduli(self)
    }
}

/// `N` with `2^-(N+1) < d <= 2^-N`.
pub fn upper_scale<T: Real>(d: T) -> i64 {
    let (mant, exp, _) = d.integer_decode();
    let lead = 63 - mant.leading_zeros() as i64;
    let floor_log2 = exp as i64 + lead;
    if mant.is_power_of_two() {
        -floor_log2
    } else {
        -floor_log2 - 1
    }
}

/// Compression and expansion moduli of the vector embedding.
pub fn moduli<T: Real>(params: &TentFamilyParams<T>) -> ModulusPair<T> {
    ModulusPair {
        rho1: Modulus::TentLower {
            c: params.c,
            q: params.q,
            p: params.p,
        },
        rho2: Modulus::TentUpper {
            a: params.a,
            c: params.c,
            q: params.q,
            p: params.p,
        },
    }
}
