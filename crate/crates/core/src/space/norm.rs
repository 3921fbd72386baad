use serde::{Deserialize, Serialize};

use super::SparseVector;
use crate::error::{Error, Result};
use crate::funcdsl::OrliczFunction;
use crate::scalar::{lit, tol, to_f64, Real};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct NormResult<T> {
    pub value: T,
    /// `Σ M(|x_i| / value) - 1`.
    pub residual: T,
    pub iterations: usize,
}

/// Neumaier-compensated sum.
pub fn compensated_sum<T: Real>(terms: impl Iterator<Item = T>) -> T {
    let (mut s, mut c) = (T::zero(), T::zero());
    for x in terms {
        let t = s + x;
        if s.abs() >= x.abs() {
            c = c + ((s - t) + x);
        } else {
            c = c + ((x - t) + s);
        }
        s = t;
    }
    s + c
}

/// `Σ M(|x_i| / rho)`.
pub fn modular_sum<T: Real>(m: &OrliczFunction<T>, x: &SparseVector<T>, rho: T) -> T {
    compensated_sum(x.values().map(|v| m.eval(v.abs() / rho)))
}

/// Residual tolerance for a vector with `count` nonzero entries.
pub fn norm_tolerance<T: Real>(count: usize) -> T {
    tol::<T>(1e-10).max(T::epsilon() * lit(4.0 * count as f64))
}

/// Luxemburg norm by bisection on the decreasing map `rho -> Σ M(|x_i|/rho)`.
pub fn luxemburg_norm<T: Real>(m: &OrliczFunction<T>, x: &SparseVector<T>) -> Result<NormResult<T>> {
    if x.is_zero() {
        return Ok(NormResult {
            value: T::zero(),
            residual: T::zero(),
            iterations: 0,
        });
    }
    let n = x.support_len();
    let big = x.max_abs();
    let two = lit::<T>(2.0);
    let f = |rho: T| modular_sum(m, x, rho) - T::one();

    // The largest entry alone reaches 1 at `lo`; every entry is below 1/n at `hi`.
    let mut lo = big / m.inverse(T::one())?;
    let mut hi = big / m.inverse(T::one() / lit(n as f64))?;
    let mut iterations = 0usize;
    while f(lo) < T::zero() {
        lo = lo / two;
        iterations += 1;
        if lo == T::zero() || iterations > 2000 {
            return Err(Error::Overflow(format!("norm bracket collapsed below {}", to_f64(big))));
        }
    }
    while f(hi) > T::zero() {
        hi = hi * two;
        iterations += 1;
        if !hi.is_finite() || iterations > 2000 {
            return Err(Error::Overflow("norm bracket expanded past the float range".into()));
        }
    }
    if !f(lo).is_finite() {
        // M overflowed at the lower end; only the sign matters for bisection.
        let (flo, fhi) = (f(lo), f(hi));
        if flo.is_nan() || fhi.is_nan() {
            return Err(Error::Overflow(format!("M overflow while bracketing ({})", to_f64(big))));
        }
    }
    while iterations < 4000 {
        let mid = lo + (hi - lo) / two;
        if mid <= lo || mid >= hi {
            break;
        }
        iterations += 1;
        let v = f(mid);
        if v.is_nan() {
            return Err(Error::Overflow(format!("M undefined near rho = {}", to_f64(mid))));
        }
        if v > T::zero() {
            lo = mid;
        } else if v < T::zero() {
            hi = mid;
        } else {
            lo = mid;
            hi = mid;
            break;
        }
    }
    let (rlo, rhi) = (f(lo), f(hi));
    let (value, residual) = if rlo.abs() <= rhi.abs() { (lo, rlo) } else { (hi, rhi) };
    if residual.abs() > norm_tolerance(n) {
        return Err(Error::NormNotConverged {
            residual: to_f64(residual),
        });
    }
    Ok(NormResult {
        value,
        residual,
        iterations,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LemmaSide {
    /// `‖x‖ < 1`: expects `Σ M(|x_i|) <= ‖x‖`.
    Below,
    /// `‖x‖ > 1`: expects `Σ M(|x_i|) >= ‖x‖`.
    Above,
    /// `‖x‖ = 1` within the norm tolerance: both sides equal 1.
    Unit,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct LemmaCheck<T> {
    pub side: LemmaSide,
    pub holds: bool,
    /// Slack of the applicable inequality; negative when it fails.
    pub margin: T,
    pub norm: T,
    pub modular: T,
}

/// Compares the unit-scale modular sum with the norm on the applicable side of the unit sphere.
pub fn check_lemma_sum_vs_norm<T: Real>(m: &OrliczFunction<T>, x: &SparseVector<T>) -> Result<LemmaCheck<T>> {
    let norm = luxemburg_norm(m, x)?.value;
    let modular = modular_sum(m, x, T::one());
    let slop = lit::<T>(1e-9).max(T::epsilon() * lit(64.0)) * norm.max(modular).max(T::one());
    let eps = norm_tolerance::<T>(x.support_len()) * lit(8.0);
    let (side, margin) = if (norm - T::one()).abs() <= eps {
        (LemmaSide::Unit, -(modular - T::one()).abs())
    } else if norm < T::one() {
        (LemmaSide::Below, norm - modular)
    } else {
        (LemmaSide::Above, modular - norm)
    };
    let holds = match side {
        LemmaSide::Unit => margin >= -(slop + eps * lit(64.0)),
        _ => margin >= -slop,
    };
    Ok(LemmaCheck {
        side,
        holds,
        margin,
        norm,
        modular,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcdsl::ValidateOptions;
    use proptest::prelude::*;

    fn pw(p: f64) -> OrliczFunction<f64> {
        OrliczFunction::power(p).unwrap()
    }

    #[test]
    fn euclidean_and_ones() {
        let x = SparseVector::from_dense(&[3.0, 4.0]);
        let r = luxemburg_norm(&pw(2.0), &x).unwrap();
        assert!((r.value - 5.0).abs() < 1e-12, "{r:?}");
        assert!(r.residual.abs() <= 1e-10);
        for &p in &[1.0, 1.5, 3.0, 7.0] {
            for n in [1usize, 2, 10, 1000] {
                let ones = SparseVector::from_dense(&vec![1.0; n]);
                let v = luxemburg_norm(&pw(p), &ones).unwrap().value;
                let want = (n as f64).powf(1.0 / p);
                assert!((v - want).abs() <= 1e-10 * want, "p={p} n={n} {v} {want}");
            }
        }
    }

    #[test]
    fn power_log_unit_vector() {
        let m = OrliczFunction::<f64>::power_log();
        // M(1) = 1 / (1 - ln 1) = 1
        assert_eq!(m.eval(1.0), 1.0);
        let r = luxemburg_norm(&m, &SparseVector::from_dense(&[1.0])).unwrap();
        assert!((r.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_vector() {
        let r = luxemburg_norm(&pw(2.0), &SparseVector::zero()).unwrap();
        assert_eq!((r.value, r.residual, r.iterations), (0.0, 0.0, 0));
    }

    #[test]
    fn modular_sum_examples() {
        let x = SparseVector::from_dense(&[3.0, 4.0]);
        assert_eq!(modular_sum(&pw(2.0), &x, 5.0), 1.0);
        assert_eq!(modular_sum(&pw(2.0), &SparseVector::zero(), 1.0), 0.0);
        assert_eq!(modular_sum(&pw(1.0), &SparseVector::from_dense(&[1.0, 1.0, 1.0]), 1.0), 3.0);
    }

    #[test]
    fn lemma_examples() {
        let c = check_lemma_sum_vs_norm(&pw(2.0), &SparseVector::from_dense(&[0.5, 0.0])).unwrap();
        assert_eq!(c.side, LemmaSide::Below);
        assert!(c.holds);
        assert!((c.modular - 0.25).abs() < 1e-15 && (c.norm - 0.5).abs() < 1e-12);
        let c = check_lemma_sum_vs_norm(&pw(2.0), &SparseVector::from_dense(&[3.0, 4.0])).unwrap();
        assert_eq!(c.side, LemmaSide::Above);
        assert!(c.holds && (c.modular - 25.0).abs() < 1e-12);
    }

    #[test]
    fn single_precision_norm() {
        let m = OrliczFunction::<f32>::power(2.0).unwrap();
        let v = luxemburg_norm(&m, &SparseVector::from_dense(&[3.0f32, 4.0])).unwrap().value;
        assert!((v - 5.0).abs() < 1e-5);
    }

    fn sparse(max_len: usize) -> impl Strategy<Value = SparseVector<f64>> {
        proptest::collection::btree_map(1u64..10_000, -1e3f64..1e3, 1..max_len)
            .prop_map(|m| SparseVector::from_entries(m).unwrap())
            .prop_filter("nonzero", |v| !v.is_zero())
    }

    fn family() -> impl Strategy<Value = OrliczFunction<f64>> {
        prop_oneof![
            (1.0f64..8.0).prop_map(|p| OrliczFunction::power(p).unwrap()),
            Just(OrliczFunction::power_log()),
            Just(OrliczFunction::validate(crate::funcdsl::parse("t^3 + t^1.5").unwrap(), &ValidateOptions::default()).unwrap()),
            Just(OrliczFunction::validate(crate::funcdsl::parse("t^2 * (1 + ln(1 + t))").unwrap(), &ValidateOptions::default()).unwrap()),
        ]
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(2000))]

        #[test]
        fn lp_oracle(p in 1.0f64..12.0, x in sparse(20)) {
            let v = luxemburg_norm(&pw(p), &x).unwrap().value;
            let want = x.lp_norm(p);
            prop_assert!((v - want).abs() <= 1e-10 * want, "{} vs {}", v, want);
        }

        #[test]
        fn normalization_homogeneity_triangle(m in family(), x in sparse(12), y in sparse(12), c in -50.0f64..50.0) {
            let nx = luxemburg_norm(&m, &x).unwrap();
            let s = modular_sum(&m, &x, nx.value);
            prop_assert!((s - 1.0).abs() <= 1e-9, "modular {}", s);
            if c != 0.0 {
                let ncx = luxemburg_norm(&m, &x.scale(c)).unwrap().value;
                prop_assert!((ncx - c.abs() * nx.value).abs() <= 1e-9 * ncx);
            }
            let ny = luxemburg_norm(&m, &y).unwrap().value;
            let nxy = luxemburg_norm(&m, &x.add(&y)).unwrap().value;
            prop_assert!(nxy <= (nx.value + ny) * (1.0 + 1e-9));
        }

        #[test]
        fn lemma_both_sides(m in family(), x in sparse(12), log_scale in -6.0f64..6.0) {
            let n = luxemburg_norm(&m, &x).unwrap().value;
            let y = x.scale(2f64.powf(log_scale) / n);
            let c = check_lemma_sum_vs_norm(&m, &y).unwrap();
            prop_assert!(c.holds, "{:?}", c);
        }
    }
}
