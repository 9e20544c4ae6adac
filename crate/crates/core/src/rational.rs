//! Exact 64-bit rationals with overflow detection.
//!
//! Every constant coefficient of an [`Expr`](crate::Expr) lives here. The
//! checked operations return [`RationalError::Overflow`]; the operator impls
//! panic on overflow instead of wrapping.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RationalError {
    #[error("rational overflow in {0}")]
    Overflow(&'static str),
    #[error("zero denominator")]
    ZeroDenominator,
}

/// Reduced fraction `num/den` with `den > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Rational {
    num: i64,
    den: i64,
}

fn gcd(mut a: i128, mut b: i128) -> i128 {
    a = a.abs();
    b = b.abs();
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

impl Rational {
    pub const ZERO: Rational = Rational { num: 0, den: 1 };
    pub const ONE: Rational = Rational { num: 1, den: 1 };
    pub const MINUS_ONE: Rational = Rational { num: -1, den: 1 };

    pub fn new(num: i64, den: i64) -> Result<Self, RationalError> {
        if den == 0 {
            return Err(RationalError::ZeroDenominator);
        }
        Self::from_i128(num as i128, den as i128, "new")
    }

    pub const fn integer(n: i64) -> Self {
        Rational { num: n, den: 1 }
    }

    fn from_i128(num: i128, den: i128, op: &'static str) -> Result<Self, RationalError> {
        if den == 0 {
            return Err(RationalError::ZeroDenominator);
        }
        let g = gcd(num, den).max(1);
        let (mut n, mut d) = (num / g, den / g);
        if d < 0 {
            n = -n;
            d = -d;
        }
        match (i64::try_from(n), i64::try_from(d)) {
            (Ok(num), Ok(den)) => Ok(Rational { num, den }),
            _ => Err(RationalError::Overflow(op)),
        }
    }

    pub fn numer(&self) -> i64 {
        self.num
    }

    pub fn denom(&self) -> i64 {
        self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num == 0
    }

    pub fn is_one(&self) -> bool {
        self.num == 1 && self.den == 1
    }

    pub fn is_integer(&self) -> bool {
        self.den == 1
    }

    pub fn is_negative(&self) -> bool {
        self.num < 0
    }

    pub fn to_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    pub fn checked_add(self, rhs: Self) -> Result<Self, RationalError> {
        let n = self.num as i128 * rhs.den as i128 + rhs.num as i128 * self.den as i128;
        let d = self.den as i128 * rhs.den as i128;
        Self::from_i128(n, d, "addition")
    }

    pub fn checked_sub(self, rhs: Self) -> Result<Self, RationalError> {
        self.checked_add(rhs.checked_neg()?)
    }

    pub fn checked_mul(self, rhs: Self) -> Result<Self, RationalError> {
        let n = self.num as i128 * rhs.num as i128;
        let d = self.den as i128 * rhs.den as i128;
        Self::from_i128(n, d, "multiplication")
    }

    pub fn checked_div(self, rhs: Self) -> Result<Self, RationalError> {
        if rhs.num == 0 {
            return Err(RationalError::ZeroDenominator);
        }
        let n = self.num as i128 * rhs.den as i128;
        let d = self.den as i128 * rhs.num as i128;
        Self::from_i128(n, d, "division")
    }

    pub fn checked_neg(self) -> Result<Self, RationalError> {
        match self.num.checked_neg() {
            Some(num) => Ok(Rational { num, den: self.den }),
            None => Err(RationalError::Overflow("negation")),
        }
    }

    pub fn recip(self) -> Result<Self, RationalError> {
        Rational::ONE.checked_div(self)
    }

    /// Integer power; negative exponents invert.
    pub fn checked_pow(self, exp: i64) -> Result<Self, RationalError> {
        if exp < 0 {
            return self
                .recip()?
                .checked_pow(exp.checked_neg().ok_or(RationalError::Overflow("power"))?);
        }
        let e = u32::try_from(exp).map_err(|_| RationalError::Overflow("power"))?;
        let n = self
            .num
            .checked_pow(e)
            .ok_or(RationalError::Overflow("power"))?;
        let d = self
            .den
            .checked_pow(e)
            .ok_or(RationalError::Overflow("power"))?;
        Ok(Rational { num: n, den: d })
    }

    /// Exact `q`-th root when one exists among rationals.
    pub fn exact_root(self, q: i64) -> Option<Self> {
        if q <= 0 {
            return None;
        }
        if self.num < 0 && q % 2 == 0 {
            return None;
        }
        let rn = int_root(self.num.unsigned_abs(), q as u32)?;
        let rd = int_root(self.den as u64, q as u32)?;
        let sign = if self.num < 0 { -1 } else { 1 };
        Some(Rational {
            num: sign * rn as i64,
            den: rd as i64,
        })
    }

    /// Best rational approximation with denominator at most `max_den`,
    /// accepted only if it matches `x` to within `tol`.
    pub fn approximate(x: f64, max_den: i64, tol: f64) -> Option<Self> {
        if !x.is_finite() || x.abs() > 1e12 {
            return None;
        }
        let (mut h0, mut h1) = (0i64, 1i64);
        let (mut k0, mut k1) = (1i64, 0i64);
        let mut v = x;
        for _ in 0..64 {
            let a = v.floor();
            let ai = a as i64;
            let h2 = ai.checked_mul(h1)?.checked_add(h0)?;
            let k2 = ai.checked_mul(k1)?.checked_add(k0)?;
            if k2 > max_den {
                break;
            }
            h0 = h1;
            h1 = h2;
            k0 = k1;
            k1 = k2;
            if ((h1 as f64 / k1 as f64) - x).abs() <= tol {
                return Rational::new(h1, k1).ok();
            }
            let frac = v - a;
            if frac.abs() < 1e-15 {
                break;
            }
            v = 1.0 / frac;
        }
        if k1 != 0 && ((h1 as f64 / k1 as f64) - x).abs() <= tol {
            Rational::new(h1, k1).ok()
        } else {
            None
        }
    }
}

fn int_root(x: u64, q: u32) -> Option<u64> {
    if x == 0 || x == 1 || q == 1 {
        return Some(x);
    }
    let guess = (x as f64).powf(1.0 / q as f64).round() as u64;
    for r in guess.saturating_sub(1)..=guess + 1 {
        if r.checked_pow(q) == Some(x) {
            return Some(r);
        }
    }
    None
}

impl Default for Rational {
    fn default() -> Self {
        Rational::ZERO
    }
}

impl From<i64> for Rational {
    fn from(n: i64) -> Self {
        Rational::integer(n)
    }
}

impl PartialOrd for Rational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Rational {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.num as i128 * other.den as i128).cmp(&(other.num as i128 * self.den as i128))
    }
}

macro_rules! panicking_op {
    ($trait:ident, $method:ident, $checked:ident) => {
        impl $trait for Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                match self.$checked(rhs) {
                    Ok(r) => r,
                    Err(e) => panic!("{e}: {self} {} {rhs}", stringify!($method)),
                }
            }
        }
    };
}

panicking_op!(Add, add, checked_add);
panicking_op!(Sub, sub, checked_sub);
panicking_op!(Mul, mul, checked_mul);
panicking_op!(Div, div, checked_div);

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        self.checked_neg().expect("rational overflow in negation")
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reduces_and_normalizes_sign() {
        let r = Rational::new(6, -4).unwrap();
        assert_eq!((r.numer(), r.denom()), (-3, 2));
        assert_eq!(Rational::new(0, -7).unwrap(), Rational::ZERO);
    }

    #[test]
    fn dimension_coefficients() {
        // (2-n)/2 at n = 5
        let n = Rational::integer(5);
        let c = (Rational::integer(2) - n) / Rational::integer(2);
        assert_eq!(c.to_string(), "-3/2");
        // 2p(2p+1) at m = 5 with 2p = (1-m)/2
        let two_p = (Rational::ONE - n) / Rational::integer(2);
        assert_eq!(two_p * (two_p + Rational::ONE), Rational::integer(2));
    }

    #[test]
    fn overflow_is_detected() {
        let big = Rational::integer(i64::MAX);
        assert_eq!(
            big.checked_add(Rational::ONE),
            Err(RationalError::Overflow("addition"))
        );
        assert!(big.checked_mul(Rational::integer(2)).is_err());
        assert!(Rational::integer(i64::MIN).checked_neg().is_err());
        assert!(Rational::integer(10).checked_pow(40).is_err());
    }

    #[test]
    #[should_panic(expected = "overflow")]
    fn operators_fail_loudly() {
        let _ = Rational::integer(i64::MAX) + Rational::ONE;
    }

    #[test]
    fn roots_and_approximation() {
        assert_eq!(
            Rational::new(9, 4).unwrap().exact_root(2),
            Some(Rational::new(3, 2).unwrap())
        );
        assert_eq!(Rational::integer(2).exact_root(2), None);
        assert_eq!(
            Rational::integer(-8).exact_root(3),
            Some(Rational::integer(-2))
        );
        assert_eq!(
            Rational::approximate(-0.5, 100, 1e-9),
            Some(Rational::new(-1, 2).unwrap())
        );
        assert_eq!(
            Rational::approximate(0.75, 100, 1e-9),
            Some(Rational::new(3, 4).unwrap())
        );
        assert_eq!(Rational::approximate(std::f64::consts::PI, 100, 1e-9), None);
    }
}
