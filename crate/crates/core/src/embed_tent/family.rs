use serde::{Deserialize, Serialize};

use super::params::{upper_scale, TentFamilyParams};
use crate::error::{Error, Result};
use crate::scalar::{lit, Real};

/// `a_n = 2^{n+2} M(2^-(n+1))^{1/p}`, through `ln M`.
pub fn tent_slope<T: Real>(params: &TentFamilyParams<T>, n: i64) -> Result<T> {
    let ln2 = T::LN_2();
    let ln_a = lit::<T>((n + 2) as f64) * ln2 + params.m.ln_eval(-lit::<T>((n + 1) as f64) * ln2) / params.p;
    let a = ln_a.exp();
    if !a.is_finite() || a == T::zero() {
        return Err(Error::Overflow(format!("tent slope a_{n} = exp({})", ln_a)));
    }
    Ok(a)
}

/// `a_n / 2^{n+1}`: the tent value per unit of local coordinate (peak is twice this).
pub(crate) fn unit_height<T: Real>(params: &TentFamilyParams<T>, n: i64) -> Result<T> {
    let ln2 = T::LN_2();
    let ln_h = ln2 + params.m.ln_eval(-lit::<T>((n + 1) as f64) * ln2) / params.p;
    let h = ln_h.exp();
    if !h.is_finite() {
        return Err(Error::Overflow(format!("tent height at scale {n}")));
    }
    Ok(h)
}

/// `x 2^{n+1}` split as `int + frac`, `0 <= frac < 1`, both parts exact.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Scaled<T> {
    pub int: i128,
    pub frac: T,
}

impl<T: Real> Scaled<T> {
    pub fn new(x: T, n: i64) -> Result<Self> {
        let a = x * lit::<T>(2.0).powi((n + 1) as i32);
        let f = a.floor();
        let int = f
            .to_i128()
            .ok_or_else(|| Error::Overflow(format!("{x} at scale {n} leaves the integer range")))?;
        Ok(Self { int, frac: a - f })
    }

    /// Local coordinate in the tent whose support starts at offset `c0 = k - 1`.
    fn local(&self, c0: i128) -> T {
        let shift = self.int - c0;
        // far points only matter through clamping, so saturate instead of overflowing
        let shift = shift.clamp(-(1 << 60), 1 << 60);
        lit::<T>(shift as f64) + self.frac
    }

    /// Offsets `k - 1` of the tents whose open support contains the point.
    pub fn active(&self) -> impl Iterator<Item = i128> {
        (self.int - 3)..=self.int
    }
}

/// Unit tent: `u` on `[0, 2]`, `4 - u` on `[2, 4]`, zero elsewhere.
pub fn unit_tent<T: Real>(u: T) -> T {
    let four = lit::<T>(4.0);
    if u <= T::zero() || u >= four {
        T::zero()
    } else {
        u.min(four - u)
    }
}

fn overlap<T: Real>(lo: T, hi: T, a: T, b: T) -> T {
    (hi.min(b) - lo.max(a)).max(T::zero())
}

/// `tent(u_t) - tent(u_s)` as a signed integral of the slope, without cancellation.
pub(crate) fn tent_increment<T: Real>(s: &Scaled<T>, t: &Scaled<T>, c0: i128) -> T {
    let (us, ut) = (s.local(c0), t.local(c0));
    let (lo, hi, sign) = if us <= ut { (us, ut, T::one()) } else { (ut, us, -T::one()) };
    let two = lit::<T>(2.0);
    sign * (overlap(lo, hi, T::zero(), two) - overlap(lo, hi, two, lit(4.0)))
}

/// `f_{n,k}(t)`: the tent of slope `a_n` on `[(k-1)/2^{n+1}, (k-1)/2^{n+1} + 4/2^{n+1}]`.
pub fn tent_eval<T: Real>(params: &TentFamilyParams<T>, n: i64, k: i64, t: T) -> Result<T> {
    let st = Scaled::new(t, n)?;
    Ok(unit_height(params, n)? * unit_tent(st.local(k as i128 - 1)))
}

/// `Σ |f_{n,k}(s) - f_{n,k}(t)|^p` over a scale window, with a certified bound on the rest.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct SandwichSum<T> {
    pub sum: T,
    /// Upper bound on the omitted scales.
    pub tail_bound: T,
    /// `N` with `2^-(N+1) < |s - t| <= 2^-N`.
    pub scale: i64,
    pub window: (i64, i64),
    pub terms: usize,
}

/// Window `[N - B, N + B']` around the scale of `|s - t|`.
pub fn scalar_sandwich_sum<T: Real>(params: &TentFamilyParams<T>, s: T, t: T) -> Result<SandwichSum<T>> {
    if s == t {
        return Ok(SandwichSum {
            sum: T::zero(),
            tail_bound: T::zero(),
            scale: 0,
            window: (0, -1),
            terms: 0,
        });
    }
    let n = upper_scale((s - t).abs());
    scalar_sandwich_sum_window(params, s, t, n - params.coarse_margin(), n + params.fine_margin())
}

/// Same sum over an explicit window `[lo, hi]`.
pub fn scalar_sandwich_sum_window<T: Real>(
    params: &TentFamilyParams<T>,
    s: T,
    t: T,
    lo: i64,
    hi: i64,
) -> Result<SandwichSum<T>> {
    let d = (s - t).abs();
    let mut sum = T::zero();
    let mut terms = 0;
    for n in lo..=hi {
        let (ss, st) = (Scaled::new(s, n)?, Scaled::new(t, n)?);
        let h = unit_height(params, n)?;
        let mut ks: Vec<i128> = ss.active().chain(st.active()).collect();
        ks.sort_unstable();
        ks.dedup();
        for c0 in ks {
            let v = (h * tent_increment(&ss, &st, c0)).abs();
            if v > T::zero() {
                sum = sum + v.powf(params.p);
                terms += 1;
            }
        }
    }
    let tail_bound = if d == T::zero() { T::zero() } else { params.tail_factor(d, lo, hi) * params.m.eval(d) };
    Ok(SandwichSum {
        sum,
        tail_bound,
        scale: if d == T::zero() { 0 } else { upper_scale(d) },
        window: (lo, hi),
        terms,
    })
}

/// Single term at the scale `2^-(N+2) < |s - t| <= 2^-(N+1)` and the last translate whose
/// support holds `min(s, t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct LowerWitness<T> {
    pub n: i64,
    pub k: i64,
    pub term: T,
    pub target: T,
}

impl<T: Real> LowerWitness<T> {
    pub fn holds(&self, rel: T) -> bool {
        self.term >= self.target * (T::one() - rel)
    }
}

pub fn lower_witness<T: Real>(params: &TentFamilyParams<T>, s: T, t: T) -> Result<LowerWitness<T>> {
    let (s, t) = if s <= t { (s, t) } else { (t, s) };
    let d = t - s;
    if d == T::zero() {
        return Err(Error::InvalidParameter("witness needs s != t".into()));
    }
    let n = upper_scale(d) - 1;
    let ss = Scaled::new(s, n)?;
    let st = Scaled::new(t, n)?;
    let c0 = ss.int;
    let term = (unit_height(params, n)? * tent_increment(&ss, &st, c0)).abs().powf(params.p);
    let k = i64::try_from(c0 + 1).map_err(|_| Error::Overflow(format!("translate index {}", c0 + 1)))?;
    Ok(LowerWitness {
        n,
        k,
        term,
        target: params.m.eval(d),
    })
}

/// Relative float noise allowed when comparing a computed sum with `M(d)`.
pub fn sum_rel_tol<T: Real>() -> T {
    crate::scalar::tol::<T>(1e-9)
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcdsl::OrliczFunction;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn params(r: f64, p: f64, q: f64, c: f64) -> TentFamilyParams<f64> {
        TentFamilyParams::new(&OrliczFunction::power(r).unwrap(), p, q, c).unwrap()
    }

    #[test]
    fn slope_examples() {
        let s2 = 2f64.sqrt();
        assert!((tent_slope(&params(1.0, 2.0, 1.5, 1.0), 0).unwrap() - 2.0 * s2).abs() < 1e-14);
        assert!((tent_slope(&params(2.0, 2.0, 1.5, 1.0), 0).unwrap() - 2.0).abs() < 1e-14);
        assert!((tent_slope(&params(1.0, 1.5, 1.2, 1.0), -1).unwrap() - 2.0).abs() < 1e-14);
        let pp = TentFamilyParams::<f64>::new(&OrliczFunction::power(1.0).unwrap(), 1.0 + 1e-9, 1.0, 1.0).unwrap();
        assert!((tent_slope(&pp, -1).unwrap() - 2.0).abs() < 1e-8);
    }

    #[test]
    fn tent_shape() {
        let pr = params(1.0, 2.0, 1.5, 1.0);
        let p1 = TentFamilyParams { p: 1.0, ..pr.clone() };
        // n = 0, k = 1: support [0, 2], apex at 1 with value a_0 = 4 M(1/2) = 2
        assert!((tent_eval(&p1, 0, 1, 1.0).unwrap() - 2.0).abs() < 1e-14);
        assert_eq!(tent_eval(&p1, 0, 1, 2.5).unwrap(), 0.0);
        assert_eq!(tent_eval(&p1, 0, 1, -0.1).unwrap(), 0.0);
        assert!((tent_eval(&p1, 0, 1, 0.5).unwrap() - 1.0).abs() < 1e-14);
        for n in -5..8 {
            for k in -3..5 {
                let start = (k - 1) as f64 / 2f64.powi(n as i32 + 1);
                let apex = start + 2.0 / 2f64.powi(n as i32 + 1);
                let peak = tent_slope(&pr, n).unwrap() / 2f64.powi(n as i32);
                assert!((tent_eval(&pr, n, k, apex).unwrap() - peak).abs() <= 1e-12 * peak);
                assert_eq!(tent_eval(&pr, n, k, start).unwrap(), 0.0);
                assert_eq!(tent_eval(&pr, n, k, start + 4.0 / 2f64.powi(n as i32 + 1)).unwrap(), 0.0);
            }
        }
    }

    #[test]
    fn increments_match_direct_differences_at_moderate_scales() {
        let pr = params(1.0, 2.0, 1.5, 1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..2000 {
            let (s, t) = (rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
            let n = rng.gen_range(-2..6);
            let (ss, st) = (Scaled::new(s, n).unwrap(), Scaled::new(t, n).unwrap());
            for c0 in ss.active().chain(st.active()) {
                let k = (c0 + 1) as i64;
                let direct = tent_eval(&pr, n, k, t).unwrap() - tent_eval(&pr, n, k, s).unwrap();
                let inc = unit_height(&pr, n).unwrap() * tent_increment(&ss, &st, c0);
                assert!((direct - inc).abs() < 1e-12, "{direct} {inc}");
            }
        }
    }

    #[test]
    fn equal_points_give_zero() {
        let s = scalar_sandwich_sum(&params(1.0, 2.0, 1.5, 1.0), 0.3, 0.3).unwrap();
        assert_eq!((s.sum, s.tail_bound, s.terms), (0.0, 0.0, 0));
    }

    #[test]
    fn sandwich_on_random_pairs() {
        let pr = params(1.0, 2.0, 1.5, 1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..2000 {
            let s: f64 = rng.gen_range(-300.0..300.0);
            let d = 2f64.powf(rng.gen_range(-16.0..8.0)) * if rng.gen() { 1.0 } else { -1.0 };
            let t = s + d;
            let r = scalar_sandwich_sum(&pr, s, t).unwrap();
            let m = pr.m.eval((s - t).abs());
            assert!(r.sum >= m * (1.0 - 1e-9) - r.tail_bound, "{s} {t} {r:?}");
            assert!(r.sum <= pr.a * m * (1.0 + pr.tail_eps), "{s} {t} {r:?}");
            let w = lower_witness(&pr, s, t).unwrap();
            assert!(w.holds(1e-9), "{w:?}");
            // at most 8 translates per scale
            assert!(r.terms <= 8 * (r.window.1 - r.window.0 + 1) as usize);
        }
    }

    #[test]
    fn widened_window_oracle() {
        let pr = params(1.0, 2.0, 1.5, 1.0);
        for &(s, t) in &[(0.0, 0.25), (0.5, 0.375), (-3.0, 5.0), (1.0 / 1024.0, 3.0 / 1024.0), (7.5, 7.5 + 2f64.powi(-16))] {
            let def = scalar_sandwich_sum(&pr, s, t).unwrap();
            let n = def.scale;
            let wide = scalar_sandwich_sum_window(&pr, s, t, n - 60, n + 60).unwrap();
            assert!(wide.sum >= def.sum - 1e-12 * def.sum);
            assert!(wide.sum - def.sum <= def.tail_bound + 1e-12 * def.sum, "{wide:?} {def:?}");
        }
    }

    #[test]
    fn single_precision_sum() {
        let m = OrliczFunction::<f32>::power(1.0).unwrap();
        let pr = TentFamilyParams::new(&m, 2.0f32, 1.5, 1.0).unwrap();
        let r = scalar_sandwich_sum(&pr, 0.1f32, 0.6).unwrap();
        assert!(r.sum >= 0.5 * (1.0 - 1e-4) && r.sum <= pr.a * 0.5);
    }
}
