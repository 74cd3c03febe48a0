//! Quadratic surd adjunction `a + b*sqrt(d)` over an arbitrary base field.
//!
//! A single squarefree `d` per value; mixing distinct radicands is a usage
//! error and panics (the solver checks for it up front).

use super::field::Field;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::fmt;

#[derive(Clone, Debug, PartialEq)]
pub struct Surd<K> {
    pub a: K,
    pub b: K,
    /// Radicand; 0 when the value is purely in the base field.
    pub d: BigInt,
}

/// `a + b*sqrt(d)` with rational `a`, `b`: the surd eigenvalues of the solver.
pub type QuadraticSurd = Surd<BigRational>;

/// Strip square factors: 12 -> (2, 3) meaning sqrt(12) = 2*sqrt(3).
pub fn squarefree_part(d: &BigInt) -> (BigInt, BigInt) {
    assert!(d.is_positive(), "radicand must be positive");
    let mut outer = BigInt::one();
    let mut rest = d.clone();
    let mut f = BigInt::from(2);
    while &f * &f <= rest {
        let sq = &f * &f;
        while (&rest % &sq).is_zero() {
            rest /= &sq;
            outer *= &f;
        }
        f += 1;
    }
    (outer, rest)
}

impl<K: Field> Surd<K> {
    pub fn pure(a: K) -> Self {
        Surd {
            a,
            b: K::zero(),
            d: BigInt::zero(),
        }
    }

    pub fn new(a: K, b: K, d: BigInt) -> Self {
        if b.is_zero() {
            return Self::pure(a);
        }
        let (outer, rest) = squarefree_part(&d);
        if rest.is_one() {
            // perfect-square radicand collapses into the base field
            return Self::pure(a.add(&b.mul(&K::from_rat(&BigRational::from_integer(outer)))));
        }
        Surd {
            a,
            b: b.mul(&K::from_rat(&BigRational::from_integer(outer))),
            d: rest,
        }
    }

    pub fn is_pure(&self) -> bool {
        self.b.is_zero()
    }

    pub fn conjugate(&self) -> Self {
        Surd {
            a: self.a.clone(),
            b: self.b.neg(),
            d: self.d.clone(),
        }
    }

    fn common_d(&self, other: &Self) -> BigInt {
        if self.b.is_zero() {
            other.d.clone()
        } else if other.b.is_zero() {
            self.d.clone()
        } else {
            assert_eq!(self.d, other.d, "mixed quadratic surds ({} vs {})", self.d, other.d);
            self.d.clone()
        }
    }
}

impl<K: Field> Field for Surd<K> {
    fn zero() -> Self {
        Self::pure(K::zero())
    }
    fn one() -> Self {
        Self::pure(K::one())
    }
    fn from_rat(r: &BigRational) -> Self {
        Self::pure(K::from_rat(r))
    }
    fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }
    fn is_one(&self) -> bool {
        self.a.is_one() && self.b.is_zero()
    }
    fn add(&self, other: &Self) -> Self {
        let d = self.common_d(other);
        Surd {
            a: self.a.add(&other.a),
            b: self.b.add(&other.b),
            d: if self.b.add(&other.b).is_zero() {
                BigInt::zero()
            } else {
                d
            },
        }
    }
    fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }
    fn mul(&self, other: &Self) -> Self {
        let d = self.common_d(other);
        let dk = K::from_rat(&BigRational::from_integer(d.clone()));
        // (a1 + b1 s)(a2 + b2 s) = a1a2 + d b1b2 + (a1b2 + a2b1) s
        let a = self.a.mul(&other.a).add(&dk.mul(&self.b).mul(&other.b));
        let b = self.a.mul(&other.b).add(&other.a.mul(&self.b));
        if b.is_zero() {
            Self::pure(a)
        } else {
            Surd { a, b, d }
        }
    }
    fn neg(&self) -> Self {
        Surd {
            a: self.a.neg(),
            b: self.b.neg(),
            d: self.d.clone(),
        }
    }
    fn inv(&self) -> Self {
        assert!(!self.is_zero(), "division by zero surd");
        if self.b.is_zero() {
            return Self::pure(self.a.inv());
        }
        let dk = K::from_rat(&BigRational::from_integer(self.d.clone()));
        // norm = a^2 - d b^2, nonzero since d is not a square
        let norm = self.a.mul(&self.a).sub(&dk.mul(&self.b).mul(&self.b));
        let ninv = norm.inv();
        Surd {
            a: self.a.mul(&ninv),
            b: self.b.neg().mul(&ninv),
            d: self.d.clone(),
        }
    }
    fn neg_for_display(&self) -> Option<Self> {
        if self.b.is_zero() {
            self.a.neg_for_display().map(Self::pure)
        } else {
            None
        }
    }
}

impl<K: Field> fmt::Display for Surd<K> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.b.is_zero() {
            return write!(f, "{}", self.a);
        }
        let sqrt = format!("sqrt({})", self.d);
        let bpart = if self.b.is_one() {
            sqrt
        } else if let Some(nb) = self.b.neg_for_display() {
            if nb.is_one() {
                format!("-{}", sqrt)
            } else {
                format!("-{}*{}", nb, sqrt)
            }
        } else {
            format!("{}*{}", self.b, sqrt)
        };
        if self.a.is_zero() {
            write!(f, "{}", bpart)
        } else if bpart.starts_with('-') {
            write!(f, "{} - {}", self.a, &bpart[1..])
        } else {
            write!(f, "{} + {}", self.a, bpart)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    fn phi() -> QuadraticSurd {
        Surd::new(q(1, 2), q(1, 2), BigInt::from(5))
    }
    fn psi() -> QuadraticSurd {
        Surd::new(q(1, 2), q(-1, 2), BigInt::from(5))
    }

    #[test]
    fn golden_ratio_identities() {
        // phi * psi = -1, phi + psi = 1, phi^2 = phi + 1
        assert_eq!(phi().mul(&psi()), Surd::pure(q(-1, 1)));
        assert_eq!(phi().add(&psi()), Surd::pure(q(1, 1)));
        assert_eq!(Field::pow(&phi(), 2), phi().add(&Surd::one()));
    }

    #[test]
    fn inverse_via_conjugate() {
        let x = phi();
        assert!(x.mul(&x.inv()).is_one());
        // 1/phi = phi - 1
        assert_eq!(x.inv(), x.sub(&Surd::one()));
    }

    #[test]
    fn radicand_normalization() {
        // sqrt(12) = 2 sqrt(3)
        let s = Surd::new(q(0, 1), q(1, 1), BigInt::from(12));
        assert_eq!(s.d, BigInt::from(3));
        assert_eq!(s.b, q(2, 1));
        // sqrt(9) = 3 collapses
        let t: QuadraticSurd = Surd::new(q(1, 1), q(1, 1), BigInt::from(9));
        assert!(t.is_pure());
        assert_eq!(t.a, q(4, 1));
    }
}
