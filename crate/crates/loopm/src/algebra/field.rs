//! Field abstraction shared by the polynomial and linear-algebra code.
//!
//! The coefficient tower is: `BigRational` (exact rationals) → `Coeff`
//! (rational functions in symbolic parameters) → `Surd<Coeff>` (optional
//! quadratic-surd adjunction used when fitting closed forms).

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::fmt;

/// Exact field operations. `inv` panics on zero; callers check `is_zero`
/// before dividing.
pub trait Field: Clone + PartialEq + fmt::Debug + fmt::Display {
    fn zero() -> Self;
    fn one() -> Self;
    fn from_rat(r: &BigRational) -> Self;
    fn is_zero(&self) -> bool;
    fn is_one(&self) -> bool;
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn neg(&self) -> Self;
    fn inv(&self) -> Self;

    fn div(&self, other: &Self) -> Self {
        self.mul(&other.inv())
    }

    fn from_int(n: i64) -> Self {
        Self::from_rat(&BigRational::from_integer(BigInt::from(n)))
    }

    fn pow(&self, mut e: u32) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        acc
    }

    /// If the value prints more naturally as `- x`, return `x`.
    /// Used only by the pretty-printers.
    fn neg_for_display(&self) -> Option<Self> {
        None
    }
}

impl Field for BigRational {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn from_rat(r: &BigRational) -> Self {
        r.clone()
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn is_one(&self) -> bool {
        One::is_one(self)
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn neg(&self) -> Self {
        -self
    }
    fn inv(&self) -> Self {
        assert!(!Zero::is_zero(self), "division by zero");
        self.recip()
    }
    fn neg_for_display(&self) -> Option<Self> {
        if self.is_negative() {
            Some(-self)
        } else {
            None
        }
    }
}

/// Render a rational as `a` or `a/b`.
pub fn rat_str(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Parse a numeric literal (integer or decimal) into an exact rational.
pub fn rat_from_literal(s: &str) -> Option<BigRational> {
    if let Some(dot) = s.find('.') {
        let (int_part, frac_part) = (&s[..dot], &s[dot + 1..]);
        if !frac_part.chars().all(|c| c.is_ascii_digit()) {
            return None;
        }
        let int_part: BigInt = if int_part.is_empty() {
            BigInt::from(0)
        } else {
            int_part.parse().ok()?
        };
        let frac: BigInt = if frac_part.is_empty() {
            BigInt::from(0)
        } else {
            frac_part.parse().ok()?
        };
        let scale = BigInt::from(10u32).pow(frac_part.len() as u32);
        Some(BigRational::new(int_part * &scale + frac, scale))
    } else {
        let n: BigInt = s.parse().ok()?;
        Some(BigRational::from_integer(n))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimal_literals_are_exact() {
        let r = rat_from_literal("0.7").unwrap();
        assert_eq!(r, BigRational::new(BigInt::from(7), BigInt::from(10)));
        assert_eq!(rat_from_literal("2").unwrap(), BigRational::from_integer(BigInt::from(2)));
        assert_eq!(
            rat_from_literal("1.25").unwrap(),
            BigRational::new(BigInt::from(5), BigInt::from(4))
        );
    }

    #[test]
    fn pow_by_squaring() {
        let r = BigRational::from_integer(BigInt::from(3));
        assert_eq!(Field::pow(&r, 5), BigRational::from_integer(BigInt::from(243)));
        assert_eq!(Field::pow(&r, 0), <BigRational as Field>::one());
    }
}
