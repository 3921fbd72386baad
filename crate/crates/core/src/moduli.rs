//! Compression and expansion moduli `ρ1 <= d_out <= ρ2`.

use serde::{Deserialize, Serialize};

use crate::scalar::{lit, Real};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", bound = "T: Real")]
pub enum Modulus<T> {
    /// `slope * s`.
    Linear { slope: T },
    /// `coef * s^exponent`.
    Power { coef: T, exponent: T },
    /// `C^{1/p} s^{q/p}` below 1, `s^{1/p}` from 1 on.
    TentLower { c: T, q: T, p: T },
    /// `(A s)^{1/p}` up to 1, `(A/C)^{1/p} s^{q/p}` above.
    TentUpper { a: T, c: T, q: T, p: T },
    /// `2^{1/p} c_hat (Σ_n (1 - e^{-t_n s^2}))^{1/p}`.
    GaussLower { c_hat: T, p: T, levels: Vec<T> },
    /// `factor * inner(s)`.
    Scaled { factor: T, inner: Box<Modulus<T>> },
}

impl<T: Real> Modulus<T> {
    pub fn eval(&self, s: T) -> T {
        match self {
            Modulus::Linear { slope } => *slope * s,
            Modulus::Power { coef, exponent } => *coef * s.powf(*exponent),
            Modulus::TentLower { c, q, p } => {
                if s < T::one() {
                    c.powf(p.recip()) * s.powf(*q / *p)
                } else {
                    s.powf(p.recip())
                }
            }
            Modulus::TentUpper { a, c, q, p } => {
                if s <= T::one() {
                    (*a * s).powf(p.recip())
                } else {
                    (*a / *c).powf(p.recip()) * s.powf(*q / *p)
                }
            }
            Modulus::GaussLower { c_hat, p, levels } => {
                let s2 = s * s;
                // 1 - e^{-x} via exp_m1 keeps small distances accurate
                let sum: T = levels.iter().map(|&t| -(-t * s2).exp_m1()).sum();
                lit::<T>(2.0).powf(p.recip()) * *c_hat * sum.powf(p.recip())
            }
            Modulus::Scaled { factor, inner } => *factor * inner.eval(s),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            Modulus::Linear { slope } => format!("{slope} s"),
            Modulus::Power { coef, exponent } => format!("{coef} s^{exponent}"),
            Modulus::TentLower { c, q, p } => format!("C^(1/p) s^(q/p) for s < 1, s^(1/p) for s >= 1 (C={c}, q={q}, p={p})"),
            Modulus::TentUpper { a, c, q, p } => {
                format!("(A s)^(1/p) for s <= 1, (A/C)^(1/p) s^(q/p) for s > 1 (A={a}, C={c}, q={q}, p={p})")
            }
            Modulus::GaussLower { c_hat, p, levels } => {
                format!("2^(1/p) c_hat (sum 1 - exp(-t_n s^2))^(1/p) (c_hat={c_hat}, p={p}, {} levels)", levels.len())
            }
            Modulus::Scaled { factor, inner } => format!("{factor} * [{}]", inner.describe()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct ModulusPair<T> {
    pub rho1: Modulus<T>,
    pub rho2: Modulus<T>,
}

impl<T: Real> ModulusPair<T> {
    pub fn bounds(&self, s: T) -> (T, T) {
        (self.rho1.eval(s), self.rho2.eval(s))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tent_moduli_branches() {
        let lo = Modulus::TentLower { c: 0.25, q: 1.5, p: 2.0 };
        let hi = Modulus::TentUpper { a: 300.0, c: 0.25, q: 1.5, p: 2.0 };
        assert_eq!(lo.eval(1.0), 1.0);
        assert_eq!(hi.eval(0.0), 0.0);
        assert!((lo.eval(0.25) - 0.5 * 0.25f64.powf(0.75)).abs() < 1e-15);
        assert!((hi.eval(4.0) - (1200.0f64).sqrt() * 4f64.powf(0.75)).abs() < 1e-9);
        let mut prev = (0.0, 0.0);
        for j in -20..=20 {
            let s = 2f64.powi(j);
            let (a, b) = (lo.eval(s), hi.eval(s));
            assert!(a <= b && a >= prev.0 && b >= prev.1);
            prev = (a, b);
        }
        // unbounded lower modulus: ρ1(2^j) = 2^{j/p}
        assert_eq!(lo.eval(2f64.powi(40)), 2f64.powi(20));
    }

    #[test]
    fn gauss_and_scaled() {
        let g = Modulus::GaussLower { c_hat: 0.5, p: 1.0, levels: vec![1.0, 0.25] };
        let want = 2.0 * 0.5 * ((1.0 - (-4.0f64).exp()) + (1.0 - (-1.0f64).exp()));
        assert!((g.eval(2.0) - want).abs() < 1e-15);
        let s = Modulus::Scaled { factor: 3.0, inner: Box::new(Modulus::Linear { slope: 2.0 }) };
        assert_eq!(s.eval(1.5), 9.0);
        let js = serde_json::to_string(&s).unwrap();
        assert!(js.contains("\"kind\":\"scaled\""));
    }
}
