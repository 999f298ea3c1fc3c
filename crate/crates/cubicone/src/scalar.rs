//! Dual scalar tower: exact rationals for sign and inertia decisions, doubles
//! for curve tracing and root refinement.
//!
//! Arithmetic between two exact scalars stays exact; as soon as a float is
//! involved the result is a float. Sign queries on the float side refuse to
//! decide inside the configured epsilon band instead of silently rounding.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num::{bigint::Sign as BigSign, BigInt, BigRational, FromPrimitive, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::Error;

/// Default epsilon for float sign decisions. Overridable per call site and via
/// the CLI (`CCL_EPS`).
pub const DEFAULT_EPS: f64 = 1e-9;

/// A number that is either an exact arbitrary-precision rational or an `f64`.
#[derive(Clone, Serialize, Deserialize)]
pub enum Scalar {
    Exact(BigRational),
    Float(f64),
}

/// Outcome of a sign query.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SignClass {
    Negative,
    Zero,
    Positive,
}

impl SignClass {
    pub fn is_positive(self) -> bool {
        self == SignClass::Positive
    }
    pub fn is_negative(self) -> bool {
        self == SignClass::Negative
    }
    pub fn is_zero(self) -> bool {
        self == SignClass::Zero
    }
    /// Flip positive and negative, keep zero.
    pub fn flipped(self) -> SignClass {
        match self {
            SignClass::Negative => SignClass::Positive,
            SignClass::Zero => SignClass::Zero,
            SignClass::Positive => SignClass::Negative,
        }
    }
}

pub(crate) fn rat_i64(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

pub(crate) fn ratio_i64(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

impl Scalar {
    pub fn int(n: i64) -> Self {
        Scalar::Exact(rat_i64(n))
    }

    pub fn ratio(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        Scalar::Exact(ratio_i64(num, den))
    }

    pub fn zero() -> Self {
        Scalar::Exact(BigRational::zero())
    }

    pub fn one() -> Self {
        Scalar::int(1)
    }

    /// Exact dyadic rational equal to the given finite float.
    pub fn exact_from_f64(v: f64) -> Option<Self> {
        BigRational::from_f64(v).map(Scalar::Exact)
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Scalar::Exact(_))
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Scalar::Exact(r) => r.to_f64().unwrap_or_else(|| {
                // Falls back to a sign-preserving infinity for out-of-range values.
                match r.numer().sign() {
                    BigSign::Minus => f64::NEG_INFINITY,
                    BigSign::NoSign => 0.0,
                    BigSign::Plus => f64::INFINITY,
                }
            }),
            Scalar::Float(v) => *v,
        }
    }

    pub fn as_exact(&self) -> Option<&BigRational> {
        match self {
            Scalar::Exact(r) => Some(r),
            Scalar::Float(_) => None,
        }
    }

    /// True when the value is exactly representable as an integer.
    pub fn is_integer(&self) -> bool {
        match self {
            Scalar::Exact(r) => r.is_integer(),
            Scalar::Float(v) => v.fract() == 0.0,
        }
    }

    pub fn is_zero_value(&self) -> bool {
        match self {
            Scalar::Exact(r) => r.is_zero(),
            Scalar::Float(v) => *v == 0.0,
        }
    }

    pub fn abs(&self) -> Scalar {
        match self {
            Scalar::Exact(r) => Scalar::Exact(r.abs()),
            Scalar::Float(v) => Scalar::Float(v.abs()),
        }
    }

    pub fn recip(&self) -> Scalar {
        match self {
            Scalar::Exact(r) => {
                assert!(!r.is_zero(), "reciprocal of exact zero");
                Scalar::Exact(r.recip())
            }
            Scalar::Float(v) => Scalar::Float(1.0 / v),
        }
    }

    /// Sign of the value. Exact scalars always decide; floats inside the
    /// epsilon band return [`Error::Indeterminate`].
    pub fn sign_with(&self, eps: f64) -> Result<SignClass, Error> {
        match self {
            Scalar::Exact(r) => Ok(match r.numer().sign() {
                BigSign::Minus => SignClass::Negative,
                BigSign::NoSign => SignClass::Zero,
                BigSign::Plus => SignClass::Positive,
            }),
            Scalar::Float(v) => {
                if v.is_nan() {
                    Err(Error::Indeterminate {
                        context: "sign of NaN".into(),
                    })
                } else if v.abs() <= eps {
                    Err(Error::Indeterminate {
                        context: format!("|{v}| <= eps {eps}"),
                    })
                } else if *v > 0.0 {
                    Ok(SignClass::Positive)
                } else {
                    Ok(SignClass::Negative)
                }
            }
        }
    }

    /// Sign with floats inside the epsilon band mapped to `Zero`.
    pub fn sign_thresholded(&self, eps: f64) -> SignClass {
        match self.sign_with(eps) {
            Ok(s) => s,
            Err(_) => SignClass::Zero,
        }
    }

    /// Exact sign, available only on the exact path.
    pub fn sign_exact(&self) -> Option<SignClass> {
        match self {
            Scalar::Exact(_) => Some(self.sign_thresholded(0.0)),
            Scalar::Float(_) => None,
        }
    }
}

impl fmt::Debug for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Exact(r) => write!(f, "{r}"),
            Scalar::Float(v) => write!(f, "{v:?}f"),
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Exact(r) => {
                if r.is_integer() {
                    write!(f, "{}", r.numer())
                } else {
                    write!(f, "{}/{}", r.numer(), r.denom())
                }
            }
            Scalar::Float(v) => write!(f, "{v}"),
        }
    }
}

impl From<i64> for Scalar {
    fn from(n: i64) -> Self {
        Scalar::int(n)
    }
}

impl From<f64> for Scalar {
    fn from(v: f64) -> Self {
        Scalar::Float(v)
    }
}

impl From<BigRational> for Scalar {
    fn from(r: BigRational) -> Self {
        Scalar::Exact(r)
    }
}

fn binop(
    a: &Scalar,
    b: &Scalar,
    exact: fn(&BigRational, &BigRational) -> BigRational,
    float: fn(f64, f64) -> f64,
) -> Scalar {
    match (a, b) {
        (Scalar::Exact(x), Scalar::Exact(y)) => Scalar::Exact(exact(x, y)),
        _ => Scalar::Float(float(a.to_f64(), b.to_f64())),
    }
}

macro_rules! impl_binop {
    ($trait:ident, $method:ident, $exact:expr, $float:expr) => {
        impl $trait<&Scalar> for &Scalar {
            type Output = Scalar;
            fn $method(self, rhs: &Scalar) -> Scalar {
                binop(self, rhs, $exact, $float)
            }
        }
        impl $trait<Scalar> for Scalar {
            type Output = Scalar;
            fn $method(self, rhs: Scalar) -> Scalar {
                binop(&self, &rhs, $exact, $float)
            }
        }
        impl $trait<&Scalar> for Scalar {
            type Output = Scalar;
            fn $method(self, rhs: &Scalar) -> Scalar {
                binop(&self, rhs, $exact, $float)
            }
        }
        impl $trait<Scalar> for &Scalar {
            type Output = Scalar;
            fn $method(self, rhs: Scalar) -> Scalar {
                binop(self, &rhs, $exact, $float)
            }
        }
    };
}

impl_binop!(Add, add, |x, y| x + y, |x, y| x + y);
impl_binop!(Sub, sub, |x, y| x - y, |x, y| x - y);
impl_binop!(Mul, mul, |x, y| x * y, |x, y| x * y);
impl_binop!(Div, div, |x, y| x / y, |x, y| x / y);

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        match self {
            Scalar::Exact(r) => Scalar::Exact(-r),
            Scalar::Float(v) => Scalar::Float(-v),
        }
    }
}

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        -&self
    }
}

impl PartialEq for Scalar {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Scalar::Exact(a), Scalar::Exact(b)) => a == b,
            _ => self.to_f64() == other.to_f64(),
        }
    }
}

impl PartialOrd for Scalar {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match (self, other) {
            (Scalar::Exact(a), Scalar::Exact(b)) => a.partial_cmp(b),
            _ => self.to_f64().partial_cmp(&other.to_f64()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_arithmetic_stays_exact() {
        let a = Scalar::ratio(1, 3);
        let b = Scalar::ratio(1, 6);
        let s = &a + &b;
        assert!(s.is_exact());
        assert_eq!(s, Scalar::ratio(1, 2));
    }

    #[test]
    fn mixing_with_float_demotes() {
        let a = Scalar::ratio(1, 3);
        let b = Scalar::Float(0.5);
        assert!(!(&a * &b).is_exact());
    }

    #[test]
    fn exact_sign_ignores_eps() {
        let tiny = Scalar::Exact(ratio_i64(1, 1_000_000_000_000));
        assert_eq!(tiny.sign_with(1e-3).unwrap(), SignClass::Positive);
    }

    #[test]
    fn float_sign_refuses_inside_band() {
        let v = Scalar::Float(1e-12);
        assert!(v.sign_with(1e-9).is_err());
        assert_eq!(v.sign_thresholded(1e-9), SignClass::Zero);
        assert_eq!(
            Scalar::Float(-0.5).sign_with(1e-9).unwrap(),
            SignClass::Negative
        );
    }

    #[test]
    fn display_uses_p_over_q() {
        assert_eq!(Scalar::ratio(-121, 75).to_string(), "-121/75");
        assert_eq!(Scalar::int(4).to_string(), "4");
    }
}
