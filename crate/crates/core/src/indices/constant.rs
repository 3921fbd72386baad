use serde::{Deserialize, Serialize};

use super::estimate::{log2_profile, span_extremes, IndexEstimate};
use crate::error::{Error, Result};
use crate::funcdsl::OrliczFunction;
use crate::scalar::{lit, to_f64, Real};

/// Smallest accepted lower-bound constant.
pub const C_MIN: f64 = 1e-12;

/// Constants of the power lower bound `M(λt) >= C M(λ) t^q` on `(0, 1]^2` and its
/// extension to every `λ > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct ConstantEstimate<T> {
    pub q: T,
    pub c: T,
    /// `max(1, sup M(t)/t^q)` over `(1, t_max]`.
    pub d: T,
    pub c_ext: T,
    /// Dyadic exponents `(i, k)` of the grid point attaining `c`.
    pub argmin: (u32, u32),
    pub t_max: T,
}

/// `beta_high + 0.25`.
pub fn default_q<T: Real>(est: &IndexEstimate<T>) -> T {
    est.beta_high + lit(0.25)
}

const D_POINTS: usize = 512;

pub fn estimate_c<T: Real>(m: &OrliczFunction<T>, q: T, est: &IndexEstimate<T>, t_max: T) -> Result<ConstantEstimate<T>> {
    if !(q > est.beta_high) {
        return Err(Error::QNotAboveBeta {
            q: to_f64(q),
            beta_high: to_f64(est.beta_high),
        });
    }
    if !(t_max > T::one()) || !t_max.is_finite() {
        return Err(Error::InvalidParameter(format!("t_max must exceed 1, got {t_max}")));
    }
    let levels = est.effective_levels;
    let prof = log2_profile(m, levels)?;
    let (g, _) = span_extremes(&prof, levels);
    // log2 of the grid ratio is k q - D(i, k); its minimum over i is k q - g(k).
    let (mut best, mut best_k) = (T::zero(), 0usize);
    for (k, &gk) in g.iter().enumerate() {
        let v = lit::<T>(k as f64) * q - gk;
        if v < best {
            best = v;
            best_k = k;
        }
    }
    let best_i = (0..=levels as usize)
        .min_by(|&a, &b| {
            let da = prof[a] - prof[a + best_k];
            let db = prof[b] - prof[b + best_k];
            db.partial_cmp(&da).unwrap()
        })
        .unwrap_or(0);
    let c = lit::<T>(2.0).powf(best);
    if !(to_f64(c) >= C_MIN) {
        return Err(Error::DegenerateConstant { c: to_f64(c) });
    }
    let ln_top = t_max.ln();
    let mut d = T::one();
    for s in 1..=D_POINTS {
        let ln_t = ln_top * lit(s as f64 / D_POINTS as f64);
        d = d.max((m.ln_eval(ln_t) - q * ln_t).exp());
    }
    Ok(ConstantEstimate {
        q,
        c,
        d,
        c_ext: c / d,
        argmin: (best_i as u32, best_k as u32),
        t_max,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::indices::{estimate_indices, DyadicGrid};

    #[test]
    fn power_two_cubic_exponent() {
        let m = OrliczFunction::<f64>::power(2.0).unwrap();
        let est = estimate_indices(&m, DyadicGrid::new(64).unwrap()).unwrap();
        let c = estimate_c(&m, 3.0, &est, 1e4).unwrap();
        // direct grid evaluation of M(λt) / (M(λ) t^3) = 1/t
        let mut oracle = f64::INFINITY;
        for i in 0..=64 {
            for k in 0..=64 {
                let (l, t) = (0.5f64.powi(i), 0.5f64.powi(k));
                oracle = oracle.min(m.eval(l * t) / (m.eval(l) * t.powi(3)));
            }
        }
        assert_eq!(oracle, 1.0);
        assert_eq!(c.c, 1.0);
        assert_eq!(c.argmin.1, 0);
        // t^2 / t^3 <= 1 on (1, t_max]
        assert_eq!(c.d, 1.0);
        assert_eq!(c.c_ext, 1.0);
    }

    #[test]
    fn boundary_exponent_is_refused() {
        let m = OrliczFunction::<f64>::power(2.0).unwrap();
        let est = estimate_indices(&m, DyadicGrid::new(64).unwrap()).unwrap();
        assert!(matches!(estimate_c(&m, 2.0, &est, 1e4), Err(Error::QNotAboveBeta { .. })));
    }

    #[test]
    fn power_log_has_positive_constant() {
        let m = OrliczFunction::<f64>::power_log();
        let est = estimate_indices(&m, DyadicGrid::default()).unwrap();
        let c = estimate_c(&m, 3.0, &est, 1e4).unwrap();
        assert!(c.c > 0.1 && c.c <= 1.0, "{c:?}");
        assert!(c.c_ext <= c.c);
        // oracle: M(λt)/(M(λ)t^3) = t^-1 (1 - ln λ)/(1 - ln λ - ln t) >= 1/(t (1 - ln t)) >= ... min over dyadic t at λ = 1
        let g = (0..=4096).map(|k| { let t = 0.5f64.powi(k); 1.0 / (t * (1.0 - t.ln())) }).fold(f64::INFINITY, f64::min);
        assert!((c.c - g).abs() < 1e-9 * g, "{} {}", c.c, g);
        let dq = default_q(&est);
        assert!((dq - est.beta_high - 0.25).abs() < 1e-15);
        assert!(estimate_c(&m, dq, &est, 1e4).unwrap().c > 0.0);
    }

    #[test]
    fn extension_constant() {
        // t^2 + t^4 against q = 3: near zero β = 2, above 1 the ratio 1/t + t peaks at t_max
        let opts = crate::funcdsl::ValidateOptions::<f64>::default();
        let m = OrliczFunction::validate(crate::funcdsl::parse("t^2 + t^4").unwrap(), &opts).unwrap();
        let est = estimate_indices(&m, DyadicGrid::new(64).unwrap()).unwrap();
        let c = estimate_c(&m, 3.0, &est, 100.0).unwrap();
        assert!((c.d - 100.01).abs() < 1e-9, "{c:?}");
        assert!((c.c_ext - c.c / 100.01).abs() < 1e-12);
    }
}
