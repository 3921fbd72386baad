use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{lit, to_f64, Real};
use crate::space::SparseVector;

/// Truncation degree of the exponential series, fixed or chosen per level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Degree {
    Fixed(u32),
    /// Smallest degree whose Poisson tail at the configured radius is below `eps_trunc`.
    Adaptive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct GaussParams<T> {
    pub p: T,
    /// Kernel widths `t_n`, one per level.
    pub levels: Vec<T>,
    /// Inputs are supported in coordinates `1..=dim`.
    pub dim: usize,
    pub degree: Degree,
    /// Inputs satisfy `‖x‖_2 <= radius`.
    pub radius: T,
    pub x0: SparseVector<T>,
    pub eps_trunc: T,
}

/// `4^-n` for `n = 1..=count`.
pub fn default_schedule<T: Real>(count: usize) -> Vec<T> {
    (1..=count).map(|n| lit::<T>(4.0).powi(-(n as i32))).collect()
}

/// `P(Poisson(lambda) > k)`, summed in the log domain.
pub fn poisson_tail(lambda: f64, k: u32) -> f64 {
    if lambda <= 0.0 {
        return 0.0;
    }
    let ln_l = lambda.ln();
    let mut ln_fact = 0.0;
    for m in 1..=k + 1 {
        ln_fact += (m as f64).ln();
    }
    let mut m = k as f64 + 1.0;
    let mut ln_term = -lambda + m * ln_l - ln_fact;
    let mut sum = 0.0;
    loop {
        let term = ln_term.exp();
        sum += term;
        // past the mode the terms decay at least geometrically with ratio lambda/(m+1)
        if m > lambda && term <= sum * 1e-17 {
            break;
        }
        if m > lambda + 40.0 * lambda.sqrt() + 1000.0 {
            break;
        }
        m += 1.0;
        ln_term += ln_l - m.ln();
    }
    sum.min(1.0)
}

/// Smallest `k` with `poisson_tail(lambda, k) < eps`.
pub fn adaptive_degree(lambda: f64, eps: f64) -> u32 {
    let mut k = lambda.floor() as u32;
    // the tail is decreasing in k; step down first so the result is minimal
    while k > 0 && poisson_tail(lambda, k - 1) < eps {
        k -= 1;
    }
    while poisson_tail(lambda, k) >= eps {
        k += 1;
    }
    k
}

impl<T: Real> GaussParams<T> {
    /// Default schedule with `levels` levels, `dim = 6`, `K = 12`, radius 2, basepoint 0, `eps_trunc = 1e-6`.
    pub fn new(p: T, levels: usize) -> Result<Self> {
        Self {
            p,
            levels: default_schedule(levels),
            dim: 6,
            degree: Degree::Fixed(12),
            radius: lit(2.0),
            x0: SparseVector::zero(),
            eps_trunc: lit(1e-6),
        }
        .checked()
    }

    pub fn with_dim(mut self, dim: usize) -> Result<Self> {
        self.dim = dim;
        self.checked()
    }

    pub fn with_degree(mut self, degree: Degree) -> Result<Self> {
        self.degree = degree;
        self.checked()
    }

    pub fn with_radius(mut self, radius: T) -> Result<Self> {
        self.radius = radius;
        self.checked()
    }

    pub fn with_levels(mut self, levels: Vec<T>) -> Result<Self> {
        self.levels = levels;
        self.checked()
    }

    pub fn with_basepoint(mut self, x0: SparseVector<T>) -> Result<Self> {
        self.x0 = x0;
        self.checked()
    }

    pub fn with_eps(mut self, eps: T) -> Result<Self> {
        self.eps_trunc = eps;
        self.checked()
    }

    fn checked(self) -> Result<Self> {
        if !(self.p >= T::one() && self.p < lit(2.0)) {
            return Err(Error::InvalidParameter(format!("gauss embedding needs 1 <= p < 2, got {}", self.p)));
        }
        if self.dim == 0 || self.levels.is_empty() {
            return Err(Error::InvalidParameter("need at least one level and one dimension".into()));
        }
        if self.levels.iter().any(|&t| !(t > T::zero() && t.is_finite())) {
            return Err(Error::InvalidParameter("kernel widths must be positive".into()));
        }
        if !(self.radius > T::zero() && self.radius.is_finite()) || !(self.eps_trunc > T::zero()) {
            return Err(Error::InvalidParameter("radius and eps_trunc must be positive".into()));
        }
        self.check_input(&self.x0)?;
        for (n, &t) in self.levels.iter().enumerate() {
            self.degree_for(n + 1, t)?;
        }
        Ok(self)
    }

    /// `λ = 2 t R^2`: Poisson mean governing the truncation at width `t`.
    pub fn lambda(&self, t: T) -> f64 {
        2.0 * to_f64(t) * to_f64(self.radius).powi(2)
    }

    /// Degree used at width `t` (`level` only labels errors).
    pub fn degree_for(&self, level: usize, t: T) -> Result<u32> {
        let lambda = self.lambda(t);
        let eps = to_f64(self.eps_trunc);
        match self.degree {
            Degree::Fixed(k) => {
                let tail = poisson_tail(lambda, k);
                if tail >= eps {
                    return Err(Error::TruncationBudget {
                        level,
                        degree: k as usize,
                        tail,
                        budget: eps,
                    });
                }
                Ok(k)
            }
            Degree::Adaptive => Ok(adaptive_degree(lambda, eps)),
        }
    }

    pub fn check_input(&self, x: &SparseVector<T>) -> Result<()> {
        if let Some(&(i, _)) = x.entries().last() {
            if i as usize > self.dim {
                return Err(Error::InvalidVector(format!("index {i} beyond dimension {}", self.dim)));
            }
        }
        let r = x.l2_norm();
        if r > self.radius * (T::one() + crate::scalar::tol::<T>(1e-12)) {
            return Err(Error::InvalidVector(format!("‖x‖_2 = {r} exceeds radius {}", self.radius)));
        }
        Ok(())
    }

    /// `Σ √t_n`.
    pub fn sqrt_sum(&self) -> T {
        self.levels.iter().map(|t| t.sqrt()).sum()
    }
}
