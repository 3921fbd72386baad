//! Sign/log-magnitude numbers used to evaluate Orlicz functions far below the
//! underflow threshold of the scalar type (e.g. `M(2^-8000)`).

use crate::scalar::Real;

#[derive(Debug, Clone, Copy)]
pub(crate) struct LogNum<T> {
    /// -1, 0 or 1. Zero carries `ln_abs = -inf`.
    sign: i8,
    ln_abs: T,
}

impl<T: Real> LogNum<T> {
    pub(crate) fn zero() -> Self {
        Self {
            sign: 0,
            ln_abs: T::neg_infinity(),
        }
    }

    pub(crate) fn nan() -> Self {
        Self {
            sign: 1,
            ln_abs: T::nan(),
        }
    }

    pub(crate) fn from_ln(ln_abs: T) -> Self {
        if ln_abs == T::neg_infinity() {
            Self::zero()
        } else {
            Self { sign: 1, ln_abs }
        }
    }

    pub(crate) fn from_value(v: T) -> Self {
        if v.is_nan() {
            Self::nan()
        } else if v == T::zero() {
            Self::zero()
        } else {
            Self {
                sign: if v > T::zero() { 1 } else { -1 },
                ln_abs: v.abs().ln(),
            }
        }
    }

    pub(crate) fn is_nan(&self) -> bool {
        self.ln_abs.is_nan()
    }

    /// Natural log of the value, `-inf` for zero and NaN for negatives.
    pub(crate) fn ln_value(&self) -> T {
        match self.sign {
            1 => self.ln_abs,
            0 => T::neg_infinity(),
            _ => T::nan(),
        }
    }

    pub(crate) fn value(&self) -> T {
        match self.sign {
            0 => T::zero(),
            s => T::from_i8(s).unwrap() * self.ln_abs.exp(),
        }
    }

    fn neg(self) -> Self {
        Self {
            sign: -self.sign,
            ln_abs: self.ln_abs,
        }
    }

    pub(crate) fn add(self, other: Self) -> Self {
        if self.is_nan() || other.is_nan() {
            return Self::nan();
        }
        if self.sign == 0 {
            return other;
        }
        if other.sign == 0 {
            return self;
        }
        let (big, small) = if self.ln_abs >= other.ln_abs {
            (self, other)
        } else {
            (other, self)
        };
        if big.ln_abs.is_infinite() {
            if small.ln_abs.is_infinite() && big.sign != small.sign {
                return Self::nan();
            }
            return big;
        }
        let ratio = (small.ln_abs - big.ln_abs).exp();
        if big.sign == small.sign {
            Self {
                sign: big.sign,
                ln_abs: big.ln_abs + ratio.ln_1p(),
            }
        } else if ratio == T::one() {
            Self::zero()
        } else {
            Self {
                sign: big.sign,
                ln_abs: big.ln_abs + (-ratio).ln_1p(),
            }
        }
    }

    pub(crate) fn sub(self, other: Self) -> Self {
        self.add(other.neg())
    }

    pub(crate) fn mul(self, other: Self) -> Self {
        if self.is_nan() || other.is_nan() {
            return Self::nan();
        }
        if self.sign == 0 || other.sign == 0 {
            if self.ln_abs == T::infinity() || other.ln_abs == T::infinity() {
                return Self::nan();
            }
            return Self::zero();
        }
        Self {
            sign: self.sign * other.sign,
            ln_abs: self.ln_abs + other.ln_abs,
        }
    }

    pub(crate) fn div(self, other: Self) -> Self {
        if self.is_nan() || other.is_nan() {
            return Self::nan();
        }
        if other.sign == 0 {
            return if self.sign == 0 {
                Self::nan()
            } else {
                Self {
                    sign: self.sign,
                    ln_abs: T::infinity(),
                }
            };
        }
        if self.sign == 0 {
            return Self::zero();
        }
        Self {
            sign: self.sign * other.sign,
            ln_abs: self.ln_abs - other.ln_abs,
        }
    }

    pub(crate) fn powf(self, c: T) -> Self {
        if self.is_nan() {
            return self;
        }
        match self.sign {
            0 => {
                if c > T::zero() {
                    Self::zero()
                } else if c == T::zero() {
                    Self::from_ln(T::zero())
                } else {
                    Self {
                        sign: 1,
                        ln_abs: T::infinity(),
                    }
                }
            }
            1 => Self::from_ln(self.ln_abs * c),
            _ => {
                if c.fract() != T::zero() {
                    return Self::nan();
                }
                let odd = (c / (T::one() + T::one())).fract() != T::zero();
                Self {
                    sign: if odd { -1 } else { 1 },
                    ln_abs: self.ln_abs * c,
                }
            }
        }
    }

    pub(crate) fn ln(self) -> Self {
        match self.sign {
            1 => Self::from_value(self.ln_abs),
            0 => Self {
                sign: -1,
                ln_abs: T::infinity(),
            },
            _ => Self::nan(),
        }
    }

    pub(crate) fn exp(self) -> Self {
        if self.is_nan() {
            return self;
        }
        Self::from_ln(self.value())
    }
}
