use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::funcdsl::OrliczFunction;
use crate::scalar::{lit, to_f64, Real};

/// Ratio floor used for β feasibility and ceiling used for α feasibility.
pub const GRID_FLOOR: f64 = 1e-6;
pub const GRID_CEILING: f64 = 1e6;
/// Bisection on q runs over `[0, Q_MAX]`; a β bound beyond it is reported as infinite.
pub const Q_MAX: f64 = 64.0;
pub const Q_TOL: f64 = 1e-6;
/// Coarsest level that enters the refinement chain.
pub const MIN_LEVELS: u32 = 20;

/// Dyadic grid `λ, t ∈ {2^-j : 0 <= j <= levels}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DyadicGrid {
    pub levels: u32,
}

impl DyadicGrid {
    pub fn new(levels: u32) -> Result<Self> {
        if levels < MIN_LEVELS {
            return Err(Error::InvalidParameter(format!(
                "dyadic grid needs at least {MIN_LEVELS} levels, got {levels}"
            )));
        }
        Ok(Self { levels })
    }

    /// `levels, levels/2, ...` down to [`MIN_LEVELS`], finest first.
    pub fn chain(&self) -> Vec<u32> {
        let mut out = vec![self.levels];
        let mut j = self.levels / 2;
        while j >= MIN_LEVELS {
            out.push(j);
            j /= 2;
        }
        out
    }

    pub fn samples(&self) -> u64 {
        let n = self.levels as u64 + 1;
        n * n
    }
}

impl Default for DyadicGrid {
    fn default() -> Self {
        Self { levels: 4096 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Bound {
    AlphaLow,
    AlphaHigh,
    BetaLow,
    BetaHigh,
}

/// One bisection probe on the finest level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceStep {
    pub bound: Bound,
    pub q: f64,
    pub feasible: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct IndexEstimate<T> {
    pub alpha_low: T,
    pub alpha_high: T,
    pub beta_low: T,
    /// `+inf` when no q up to [`Q_MAX`] passes.
    pub beta_high: T,
    pub grid: DyadicGrid,
    /// Levels actually used; below `grid.levels` when `log M` underflows on the finer part.
    pub effective_levels: u32,
    pub samples: u64,
    pub function: String,
    pub trace: Vec<TraceStep>,
}

impl<T: Real> IndexEstimate<T> {
    pub fn beta_unbounded(&self) -> bool {
        self.beta_high.is_infinite()
    }

    pub fn beta_mid(&self) -> T {
        if self.beta_unbounded() {
            return T::infinity();
        }
        (self.beta_low + self.beta_high) / lit(2.0)
    }

    pub fn alpha_width(&self) -> T {
        self.alpha_high - self.alpha_low
    }

    pub fn beta_width(&self) -> T {
        self.beta_high - self.beta_low
    }

    pub fn alpha_contains(&self, x: T) -> bool {
        self.alpha_low <= x && x <= self.alpha_high
    }

    pub fn beta_contains(&self, x: T) -> bool {
        self.beta_low <= x && x <= self.beta_high
    }
}

/// `log2 M(2^-j)` for `0 <= j <= 2 * levels`, cut short where even the logarithm
/// underflows to `-inf`.
pub(crate) fn log2_profile<T: Real>(m: &OrliczFunction<T>, levels: u32) -> Result<Vec<T>> {
    let ln2 = T::LN_2();
    let mut prof: Vec<T> = (0..=2 * levels as i64)
        .into_par_iter()
        .map(|j| m.ln_eval(-lit::<T>(j as f64) * ln2) / ln2)
        .collect();
    if let Some(j) = prof.iter().position(|v| v.is_nan() || *v == T::infinity()) {
        return Err(Error::InvalidFunction(format!(
            "log M(2^-{j}) is not finite ({})",
            prof[j]
        )));
    }
    if let Some(j) = prof.iter().position(|v| v.is_infinite()) {
        prof.truncate(j);
    }
    Ok(prof)
}

/// Per-span extremes of the log2 decay `D(i, k) = log2 M(2^-i) - log2 M(2^-(i+k))`
/// over `0 <= i <= levels`: `(max_i, min_i)` for `k = 0..=levels`.
pub(crate) fn span_extremes<T: Real>(prof: &[T], levels: u32) -> (Vec<T>, Vec<T>) {
    let n = levels as usize;
    (0..=n)
        .into_par_iter()
        .map(|k| {
            let mut hi = T::neg_infinity();
            let mut lo = T::infinity();
            for i in 0..=n {
                let d = prof[i] - prof[i + k];
                hi = hi.max(d);
                lo = lo.min(d);
            }
            (hi, lo)
        })
        .unzip()
}

/// Threshold of a monotone predicate on `[0, Q_MAX]`; `increasing` means false below, true above.
/// Returns the `(false side, true side)` ends of the final interval, or `None` if the
/// predicate never switches.
fn bisect_q(
    bound: Bound,
    increasing: bool,
    mut pred: impl FnMut(f64) -> bool,
    trace: &mut Option<&mut Vec<TraceStep>>,
) -> Option<(f64, f64)> {
    let mut probe = |q: f64| {
        let ok = pred(q);
        if let Some(t) = trace.as_deref_mut() {
            t.push(TraceStep { bound, q, feasible: ok });
        }
        ok
    };
    let (mut lo, mut hi) = (0.0, Q_MAX);
    let (plo, phi) = (probe(lo), probe(hi));
    if increasing {
        if plo {
            return Some((lo, lo));
        }
        if !phi {
            return None;
        }
    } else {
        if !plo {
            return None;
        }
        if phi {
            return Some((hi, hi));
        }
    }
    while hi - lo > Q_TOL {
        let mid = 0.5 * (lo + hi);
        if probe(mid) == increasing {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(if increasing { (lo, hi) } else { (hi, lo) })
}

/// Bracket pair at a single level, with exact `f64` bisection on the span extremes.
#[derive(Debug, Clone, Copy)]
struct RawBrackets {
    alpha: (f64, f64),
    beta: (f64, f64),
}

fn raw_brackets<T: Real>(prof: &[T], levels: u32, mut trace: Option<&mut Vec<TraceStep>>) -> RawBrackets {
    let (g, a) = span_extremes(prof, levels);
    let g: Vec<f64> = g.into_iter().map(to_f64).collect();
    let a: Vec<f64> = a.into_iter().map(to_f64).collect();
    let floor = -GRID_FLOOR.log2();
    let ceil = GRID_CEILING.log2();
    let spans = || (1..g.len()).map(|k| (k as f64, g[k], a[k]));

    // min over the grid of M(λt) / (M(λ) t^q) >= floor
    let beta_low = bisect_q(Bound::BetaLow, true, |q| spans().all(|(k, gk, _)| k * q - gk >= -floor), &mut trace)
        .map_or(Q_MAX, |(f, _)| f);
    // some span k has the ratio >= 2 at every λ
    let beta_high = bisect_q(Bound::BetaHigh, true, |q| spans().any(|(k, gk, _)| k * q - gk >= 1.0), &mut trace)
        .map_or(f64::INFINITY, |(_, t)| t);
    // max over the grid of the ratio <= ceiling
    let alpha_high = bisect_q(Bound::AlphaHigh, false, |q| spans().all(|(k, _, ak)| k * q - ak <= ceil), &mut trace)
        .map_or(0.0, |(f, _)| f);
    // some span k has the ratio <= 1/2 at every λ
    let alpha_low = bisect_q(Bound::AlphaLow, false, |q| spans().any(|(k, _, ak)| k * q - ak <= -1.0), &mut trace)
        .map_or(0.0, |(_, t)| t);
    RawBrackets {
        alpha: (alpha_low, alpha_high),
        beta: (beta_low, beta_high),
    }
}

/// Intersects `cur` with `next`; on an empty intersection keeps the point of `cur` nearest to `next`.
fn narrow(cur: (f64, f64), next: (f64, f64)) -> (f64, f64) {
    let lo = cur.0.max(next.0);
    let hi = cur.1.min(next.1);
    if lo <= hi {
        (lo, hi)
    } else if next.1 < cur.0 {
        (cur.0, cur.0)
    } else {
        (cur.1, cur.1)
    }
}

/// Brackets for the lower and upper indices from the dyadic grid, refined over the level chain
/// so that a finer grid never widens them.
pub fn estimate_indices<T: Real>(m: &OrliczFunction<T>, grid: DyadicGrid) -> Result<IndexEstimate<T>> {
    DyadicGrid::new(grid.levels)?;
    let prof = log2_profile(m, grid.levels)?;
    let effective = DyadicGrid::new(((prof.len() - 1) / 2) as u32).map_err(|_| {
        Error::InvalidFunction(format!("log M underflows at 2^-{}; grid too coarse", prof.len()))
    })?;
    let mut trace = Vec::new();
    let chain = effective.chain();
    let mut raw: Vec<RawBrackets> = chain
        .iter()
        .map(|&j| {
            if j == effective.levels {
                raw_brackets(&prof, j, Some(&mut trace))
            } else {
                raw_brackets(&prof, j, None)
            }
        })
        .collect();
    raw.reverse();
    let mut alpha = (0.0, f64::INFINITY);
    let mut beta = (0.0, f64::INFINITY);
    for r in &raw {
        alpha = narrow(alpha, r.alpha);
        beta = narrow(beta, r.beta);
    }
    // Convexity gives 1 <= α <= β.
    let beta_low = beta.0.max(1.0);
    let beta_high = beta.1.max(beta_low);
    let alpha_high = alpha.1.min(beta_high);
    let alpha_low = alpha.0.max(1.0).min(alpha_high);
    Ok(IndexEstimate {
        alpha_low: lit(alpha_low),
        alpha_high: lit(alpha_high),
        beta_low: lit(beta_low),
        beta_high: if beta_high.is_infinite() { T::infinity() } else { lit(beta_high) },
        grid,
        effective_levels: effective.levels,
        samples: effective.samples(),
        function: m.describe(),
        trace,
    })
}

/// `max(2, β)` with β taken at the middle of its bracket; `+inf` when β is unbounded.
pub fn cotype<T: Real>(est: &IndexEstimate<T>) -> T {
    est.beta_mid().max(lit(2.0))
}
