//! Validated Orlicz functions.

use std::fmt;

use serde::Serialize;

use super::ast::{parse, OrliczExpr};
use super::logval::LogNum;
use crate::error::{Error, Result};
use crate::scalar::{lit, tol, Real};

/// Geometric grid on `[t_min, t_max]` used for validation and sup estimates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridSpec<T> {
    pub t_min: T,
    pub t_max: T,
    pub points: usize,
}

impl<T: Real> Default for GridSpec<T> {
    fn default() -> Self {
        Self {
            t_min: lit(1e-8),
            t_max: lit(1e4),
            points: 512,
        }
    }
}

impl<T: Real> GridSpec<T> {
    pub fn new(t_min: T, t_max: T, points: usize) -> Result<Self> {
        if points < 64 {
            return Err(Error::InvalidParameter(format!(
                "grid needs at least 64 points, got {points}"
            )));
        }
        if !(t_min > T::zero() && t_max > t_min && t_max.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "grid range [{t_min}, {t_max}] is not a positive interval"
            )));
        }
        if t_min > lit(1e-8) || t_max < lit(1e4) {
            return Err(Error::InvalidParameter(
                "grid must span at least [1e-8, 1e4]".into(),
            ));
        }
        Ok(Self {
            t_min,
            t_max,
            points,
        })
    }

    pub fn points(&self) -> Vec<T> {
        let ratio = (self.t_max / self.t_min).ln() / lit((self.points - 1) as f64);
        (0..self.points)
            .map(|i| {
                if i + 1 == self.points {
                    self.t_max
                } else {
                    self.t_min * (ratio * lit(i as f64)).exp()
                }
            })
            .collect()
    }
}

/// How to treat expressions that only behave like an Orlicz function near 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Continuation<T> {
    /// Take the expression as given on the whole grid.
    Never,
    /// If every violation lies beyond `t = 1`, continue affinely from `t = 1`.
    Auto,
    /// Continue affinely from the given point.
    At(T),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ValidateOptions<T> {
    pub grid: GridSpec<T>,
    pub continuation: Continuation<T>,
    /// `M(t_max)` must exceed this level.
    pub growth_level: T,
}

impl<T: Real> Default for ValidateOptions<T> {
    fn default() -> Self {
        Self {
            grid: GridSpec::default(),
            continuation: Continuation::Auto,
            growth_level: lit(1e3),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Property {
    /// Evaluation produced NaN, infinity or a negative value.
    Domain,
    ZeroAtOrigin,
    Degenerate,
    Decreasing,
    Nonconvex,
    Bounded,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Violation<T> {
    pub property: Property,
    pub point: T,
    pub magnitude: T,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport<T> {
    pub grid: GridSpec<T>,
    pub violations: Vec<Violation<T>>,
    pub passed: bool,
    pub continued_at: Option<T>,
}

impl<T: Real> fmt::Display for ValidationReport<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.passed {
            return write!(f, "valid");
        }
        write!(f, "{} violation(s)", self.violations.len())?;
        for v in self.violations.iter().take(5) {
            write!(f, "; {:?} at t={:e} ({:e})", v.property, v.point, v.magnitude)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FunctionSpec<T> {
    Expr(OrliczExpr<T>),
    /// `t^p`.
    Power { p: T },
    /// `t^2 / (1 - ln t)` on `(0, 1]`, affine beyond 1.
    PowerLog,
}

/// Affine continuation `value + slope * (u - from)` for `u > from`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AffineTail<T> {
    pub from: T,
    pub value: T,
    pub slope: T,
}

/// A validated, nondegenerate Orlicz function `M(t) = raw(scale * t)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrliczFunction<T> {
    pub spec: FunctionSpec<T>,
    pub scale: T,
    pub tail: Option<AffineTail<T>>,
    pub normalized: bool,
    pub validation: ValidationReport<T>,
}

impl<T: Real> FunctionSpec<T> {
    fn raw_core(&self, u: T) -> T {
        match self {
            FunctionSpec::Expr(e) => e.ast.eval(u),
            FunctionSpec::Power { p } => {
                if *p == T::one() {
                    u
                } else {
                    u.powf(*p)
                }
            }
            FunctionSpec::PowerLog => {
                if u == T::zero() {
                    T::zero()
                } else {
                    u * u / (T::one() - u.ln())
                }
            }
        }
    }

    fn raw(&self, tail: Option<&AffineTail<T>>, u: T) -> T {
        match tail {
            Some(a) if u > a.from => a.value + a.slope * (u - a.from),
            _ => self.raw_core(u),
        }
    }

    fn ln_raw(&self, tail: Option<&AffineTail<T>>, ln_u: T) -> T {
        if let Some(a) = tail {
            if ln_u > a.from.ln() {
                return self.raw(tail, ln_u.exp()).ln();
            }
        }
        match self {
            FunctionSpec::Power { p } => *p * ln_u,
            FunctionSpec::PowerLog => {
                if ln_u == T::neg_infinity() {
                    T::neg_infinity()
                } else {
                    lit::<T>(2.0) * ln_u - (T::one() - ln_u).ln()
                }
            }
            FunctionSpec::Expr(e) => e.ast.eval_log(LogNum::from_ln(ln_u)).ln_value(),
        }
    }

    fn describe(&self) -> String {
        match self {
            FunctionSpec::Expr(e) => e.source.clone(),
            FunctionSpec::Power { p } => format!("power({p})"),
            FunctionSpec::PowerLog => "power_log".to_string(),
        }
    }
}

fn check<T: Real>(
    spec: &FunctionSpec<T>,
    tail: Option<&AffineTail<T>>,
    opts: &ValidateOptions<T>,
) -> Vec<Violation<T>> {
    let mut out = Vec::new();
    let mut push = |property, point, magnitude| {
        out.push(Violation {
            property,
            point,
            magnitude,
        })
    };
    let zero = spec.raw(tail, T::zero());
    if zero.is_nan() || zero.is_infinite() {
        push(Property::Domain, T::zero(), zero);
    } else if zero != T::zero() {
        push(Property::ZeroAtOrigin, T::zero(), zero.abs());
    }
    let ts = opts.grid.points();
    let vs: Vec<T> = ts.iter().map(|&t| spec.raw(tail, t)).collect();
    let ok = |v: T| v.is_finite() && v >= T::zero();
    for (&t, &v) in ts.iter().zip(&vs) {
        if !ok(v) {
            push(Property::Domain, t, v);
        } else if v == T::zero() && !spec.ln_raw(tail, t.ln()).is_finite() {
            // an underflowed value with a finite logarithm is still positive
            push(Property::Degenerate, t, T::zero());
        }
    }
    let rel = tol::<T>(1e-12);
    for i in 0..ts.len() - 1 {
        let (t1, t2, v1, v2) = (ts[i], ts[i + 1], vs[i], vs[i + 1]);
        if !ok(v1) || !ok(v2) {
            continue;
        }
        if v2 < v1 - rel * v1 {
            push(Property::Decreasing, t2, v1 - v2);
        }
        let mid = spec.raw(tail, (t1 + t2) / lit(2.0));
        let chord = (v1 + v2) / lit(2.0);
        if !ok(mid) {
            push(Property::Domain, (t1 + t2) / lit(2.0), mid);
        } else if mid > chord + rel * v2 {
            push(Property::Nonconvex, (t1 + t2) / lit(2.0), mid - chord);
        }
    }
    let top = *vs.last().unwrap();
    if ok(top) && top <= opts.growth_level {
        push(Property::Bounded, opts.grid.t_max, top);
    }
    out
}

/// Affine continuation from `from` with matched value; the slope is a forward
/// secant for expressions (an upper estimate of the derivative for convex
/// functions, so the kink stays convex) and exact for the catalog.
fn make_tail<T: Real>(spec: &FunctionSpec<T>, from: T) -> Option<AffineTail<T>> {
    let value = spec.raw_core(from);
    let slope = match spec {
        FunctionSpec::PowerLog if from == T::one() => lit(3.0),
        _ => {
            let h = from * lit(1e-7);
            let fwd = spec.raw_core(from + h);
            if fwd.is_finite() && fwd >= value {
                (fwd - value) / h
            } else {
                let back = spec.raw_core(from - h);
                (value - back) / h
            }
        }
    };
    (value.is_finite() && slope.is_finite() && slope >= T::zero()).then_some(AffineTail {
        from,
        value,
        slope,
    })
}

impl<T: Real> OrliczFunction<T> {
    /// `t^p`, `p >= 1`.
    pub fn power(p: T) -> Result<Self> {
        if !(p >= T::one()) || !p.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "power exponent must be >= 1, got {p}"
            )));
        }
        Self::validate_spec(
            FunctionSpec::Power { p },
            &ValidateOptions {
                continuation: Continuation::Never,
                ..Default::default()
            },
        )
    }

    /// `t^2 / (1 - ln t)` near 0, continued affinely beyond `t = 1`.
    pub fn power_log() -> Self {
        let opts = ValidateOptions {
            continuation: Continuation::At(T::one()),
            ..Default::default()
        };
        Self::validate_spec(FunctionSpec::PowerLog, &opts).expect("catalog entry is valid")
    }

    pub fn validate(expr: OrliczExpr<T>, opts: &ValidateOptions<T>) -> Result<Self> {
        Self::validate_spec(FunctionSpec::Expr(expr), opts)
    }

    /// Like [`Self::validate`] but hands back the failing report instead of an error.
    pub fn validate_report(
        spec: FunctionSpec<T>,
        opts: &ValidateOptions<T>,
    ) -> std::result::Result<Self, ValidationReport<T>> {
        let report = |violations: Vec<Violation<T>>, continued_at| ValidationReport {
            grid: opts.grid,
            passed: violations.is_empty(),
            violations,
            continued_at,
        };
        let forced = match opts.continuation {
            Continuation::At(c) => Some(c),
            _ => None,
        };
        let tail = forced.and_then(|c| make_tail(&spec, c));
        if let (Some(point), None) = (forced, &tail) {
            return Err(report(
                vec![Violation {
                    property: Property::Domain,
                    point,
                    magnitude: T::nan(),
                }],
                forced,
            ));
        }
        let violations = check(&spec, tail.as_ref(), opts);
        let (violations, tail) = if violations.is_empty()
            || opts.continuation != Continuation::Auto
            || violations.iter().any(|v| v.point <= T::one())
        {
            (violations, tail)
        } else {
            match make_tail(&spec, T::one()) {
                Some(a) => {
                    let retry = check(&spec, Some(&a), opts);
                    if retry.is_empty() {
                        (retry, Some(a))
                    } else {
                        (violations, None)
                    }
                }
                None => (violations, None),
            }
        };
        let rep = report(violations, tail.map(|a| a.from));
        if !rep.passed {
            return Err(rep);
        }
        let mut m = Self {
            spec,
            scale: T::one(),
            tail,
            normalized: false,
            validation: rep,
        };
        m.normalized = (m.eval(T::one()) - T::one()).abs() <= tol(1e-12);
        Ok(m)
    }

    fn validate_spec(spec: FunctionSpec<T>, opts: &ValidateOptions<T>) -> Result<Self> {
        Self::validate_report(spec, opts).map_err(|r| Error::InvalidFunction(r.to_string()))
    }

    /// Parses a catalog tag (`power(p)`, `power:p`, `power_log`) or an expression.
    pub fn from_spec_str(text: &str, opts: &ValidateOptions<T>) -> Result<Self> {
        let s = text.trim();
        if s == "power_log" {
            return Ok(Self::power_log());
        }
        let arg = s
            .strip_prefix("power(")
            .and_then(|r| r.strip_suffix(')'))
            .or_else(|| s.strip_prefix("power:"));
        if let Some(a) = arg {
            let p: f64 = a
                .trim()
                .parse()
                .map_err(|_| Error::InvalidParameter(format!("bad power exponent `{a}`")))?;
            return Self::power(lit(p));
        }
        Self::validate(parse(s)?, opts)
    }

    pub fn describe(&self) -> String {
        let base = self.spec.describe();
        if self.scale == T::one() {
            base
        } else {
            format!("{base} [argument scaled by {}]", self.scale)
        }
    }

    /// `M(t)`; exact 0 at 0, `+inf` on overflow.
    pub fn eval(&self, t: T) -> T {
        if t == T::zero() {
            return T::zero();
        }
        self.spec.raw(self.tail.as_ref(), self.scale * t)
    }

    pub fn eval_checked(&self, t: T) -> Result<T> {
        if t < T::zero() || t.is_nan() {
            return Err(Error::InvalidParameter(format!("M is defined on t >= 0, got {t}")));
        }
        let v = self.eval(t);
        if v.is_infinite() && t.is_finite() {
            Err(Error::Overflow(format!("M({t})")))
        } else {
            Ok(v)
        }
    }

    /// `ln M(e^{ln_t})`, usable far below the underflow threshold.
    pub fn ln_eval(&self, ln_t: T) -> T {
        self.spec
            .ln_raw(self.tail.as_ref(), self.scale.ln() + ln_t)
    }

    /// Generalized inverse by bisection on the monotone branch.
    pub fn inverse(&self, y: T) -> Result<T> {
        if y.is_nan() || y < T::zero() {
            return Err(Error::InvalidParameter(format!("inverse needs y >= 0, got {y}")));
        }
        if y == T::zero() {
            return Ok(T::zero());
        }
        if y.is_infinite() {
            return Err(Error::InverseOutOfRange(crate::scalar::to_f64(y)));
        }
        let two = lit::<T>(2.0);
        let mut hi = T::one();
        while self.eval(hi) < y {
            hi = hi * two;
            if !hi.is_finite() || hi > T::max_value() / lit(4.0) {
                return Err(Error::InverseOutOfRange(crate::scalar::to_f64(y)));
            }
        }
        let mut lo = hi;
        while self.eval(lo) >= y {
            lo = lo / two;
            if lo == T::zero() {
                return Ok(T::zero());
            }
        }
        for _ in 0..400 {
            let mid = lo + (hi - lo) / two;
            if mid <= lo || mid >= hi {
                break;
            }
            if self.eval(mid) < y {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let (elo, ehi) = ((self.eval(lo) - y).abs(), (self.eval(hi) - y).abs());
        Ok(if elo < ehi { lo } else { hi })
    }

    /// Rescales the argument so that `M(1) = 1`.
    pub fn normalized(&self) -> Result<Self> {
        if self.normalized {
            return Ok(self.clone());
        }
        let c = self.inverse(T::one())?;
        let mut m = self.clone();
        m.scale = self.scale * c;
        m.normalized = true;
        Ok(m)
    }
}
