use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::funcdsl::OrliczFunction;
use crate::scalar::{lit, tol, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Trend {
    Vanishing,
    BoundedAway,
    Inconclusive,
}

impl std::fmt::Display for Trend {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Trend::Vanishing => "vanishing",
            Trend::BoundedAway => "bounded-away",
            Trend::Inconclusive => "inconclusive",
        })
    }
}

/// Points inspected at the end of a series.
pub const TREND_WINDOW: usize = 10;
/// The last value must fall below this fraction of the first to count as vanishing.
pub const VANISH_RATIO: f64 = 0.1;
/// Relative slack for the nondecreasing test.
pub const FLAT_REL: f64 = 1e-9;

fn tail_decreasing<T: Real>(vs: &[T]) -> bool {
    vs.len() >= TREND_WINDOW && vs[vs.len() - TREND_WINDOW..].windows(2).all(|w| w[1] < w[0])
}

/// Vanishing: the last [`TREND_WINDOW`] values strictly decrease and the last is below
/// `VANISH_RATIO` times the first. Bounded away: the last values are nondecreasing up to
/// `FLAT_REL`. Anything else is inconclusive.
pub fn classify_trend<T: Real>(vs: &[T]) -> Trend {
    if vs.len() < TREND_WINDOW {
        return Trend::Inconclusive;
    }
    let tail = &vs[vs.len() - TREND_WINDOW..];
    if tail_decreasing(vs) && *tail.last().unwrap() < vs[0] * lit(VANISH_RATIO) {
        return Trend::Vanishing;
    }
    let rel = tol::<T>(FLAT_REL);
    if tail.windows(2).all(|w| w[1] >= w[0] - rel * w[0].abs()) {
        return Trend::BoundedAway;
    }
    Trend::Inconclusive
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BasisOptions {
    /// Series always covers `n = 2^0 ..= 2^base_log2_n`.
    pub base_log2_n: u32,
    /// While the tail keeps strictly decreasing without meeting the vanishing threshold, the
    /// series is extended one dyadic step at a time up to `2^max_log2_n`.
    pub max_log2_n: u32,
}

impl Default for BasisOptions {
    fn default() -> Self {
        Self {
            base_log2_n: 40,
            max_log2_n: 4096,
        }
    }
}

/// `c_n = n^{-1/2} ‖e_1 + ... + e_n‖` at dyadic `n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct BasisCriterionSeries<T> {
    /// `n = 2^log2_n`.
    pub log2_ns: Vec<u32>,
    pub cs: Vec<T>,
    pub trend: Trend,
    /// Whether points past `base_log2_n` were needed.
    pub extended: bool,
    pub function: String,
}

impl<T: Real> BasisCriterionSeries<T> {
    pub fn c_at(&self, log2_n: u32) -> Option<T> {
        self.log2_ns.iter().position(|&j| j == log2_n).map(|i| self.cs[i])
    }
}

/// `ln t` with `ln M(t) = ln_y`, by bisection on the increasing map `ln t -> ln M(t)`.
fn ln_inverse<T: Real>(m: &OrliczFunction<T>, ln_y: T) -> Result<T> {
    let two = lit::<T>(2.0);
    let (mut lo, mut hi) = (-T::one(), T::one());
    while m.ln_eval(hi) < ln_y {
        hi = hi * two;
        if !hi.is_finite() {
            return Err(Error::InverseOutOfRange(crate::scalar::to_f64(ln_y)));
        }
    }
    while !(m.ln_eval(lo) < ln_y) {
        lo = lo * two;
        if !lo.is_finite() {
            return Err(Error::InverseOutOfRange(crate::scalar::to_f64(ln_y)));
        }
    }
    for _ in 0..4096 {
        let mid = lo + (hi - lo) / two;
        if mid <= lo || mid >= hi {
            break;
        }
        if m.ln_eval(mid) < ln_y {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (elo, ehi) = ((m.ln_eval(lo) - ln_y).abs(), (m.ln_eval(hi) - ln_y).abs());
    Ok(if elo < ehi { lo } else { hi })
}

/// `c_{2^j} = 2^{-j/2} / t` with `M(t) = 2^-j`, in the log domain.
fn basis_point<T: Real>(m: &OrliczFunction<T>, j: u32) -> Result<T> {
    let ln_n = lit::<T>(j as f64) * T::LN_2();
    let ln_t = ln_inverse(m, -ln_n)?;
    Ok((-ln_n / lit(2.0) - ln_t).exp())
}

pub fn basis_criterion<T: Real>(m: &OrliczFunction<T>) -> Result<BasisCriterionSeries<T>> {
    basis_criterion_with(m, &BasisOptions::default())
}

/// Closed-form series for the normalized canonical basis of `h_M` (the function is
/// rescaled to `M(1) = 1` first).
pub fn basis_criterion_with<T: Real>(m: &OrliczFunction<T>, opts: &BasisOptions) -> Result<BasisCriterionSeries<T>> {
    let m = m.normalized()?;
    let mut log2_ns: Vec<u32> = (0..=opts.base_log2_n).collect();
    let mut cs = log2_ns.iter().map(|&j| basis_point(&m, j)).collect::<Result<Vec<T>>>()?;
    let mut trend = classify_trend(&cs);
    let mut j = opts.base_log2_n;
    while trend == Trend::Inconclusive && tail_decreasing(&cs) && j < opts.max_log2_n {
        j += 1;
        log2_ns.push(j);
        cs.push(basis_point(&m, j)?);
        trend = classify_trend(&cs);
    }
    Ok(BasisCriterionSeries {
        extended: j > opts.base_log2_n,
        log2_ns,
        cs,
        trend,
        function: m.describe(),
    })
}

/// Trend of `M(t)/t^2` on `t = 2^-j`, `j = 1..=40`.
pub fn small_scale_ratio_limit<T: Real>(m: &OrliczFunction<T>) -> Trend {
    classify_trend(&small_scale_ratios(m))
}

pub fn small_scale_ratios<T: Real>(m: &OrliczFunction<T>) -> Vec<T> {
    (1..=40)
        .map(|j| {
            let ln_t = -lit::<T>(j as f64) * T::LN_2();
            (m.ln_eval(ln_t) - lit::<T>(2.0) * ln_t).exp()
        })
        .collect()
}
