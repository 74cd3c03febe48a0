//! Rational functions in symbolic parameters: the coefficient field used
//! throughout the pipeline (`const` expressions of the input language).

use super::field::{rat_str, Field};
use super::mpoly::{MonomialOrder, QPoly};
use num_rational::BigRational;
use std::collections::BTreeMap;
use std::fmt;

/// `num / den` with `den` monic w.r.t. lex order and common factors removed.
#[derive(Clone, Debug, PartialEq)]
pub struct Coeff {
    num: QPoly,
    den: QPoly,
}

impl Coeff {
    pub fn new(num: QPoly, den: QPoly) -> Self {
        assert!(!den.is_zero(), "zero denominator");
        Coeff { num, den }.reduced()
    }

    pub fn from_poly(p: QPoly) -> Self {
        Coeff {
            num: p,
            den: QPoly::one(),
        }
    }

    pub fn param(name: &str) -> Self {
        Self::from_poly(QPoly::var(name))
    }

    pub fn numer(&self) -> &QPoly {
        &self.num
    }

    pub fn denom(&self) -> &QPoly {
        &self.den
    }

    fn reduced(self) -> Self {
        if self.num.is_zero() {
            return Coeff {
                num: QPoly::zero(),
                den: QPoly::one(),
            };
        }
        let mut num = self.num;
        let mut den = self.den;
        if !den.is_constant() {
            let g = QPoly::gcd(&num, &den);
            if !g.is_constant() || !g.as_constant().map(|c| c.is_one()).unwrap_or(false) {
                num = num.div_exact(&g);
                den = den.div_exact(&g);
            }
        }
        // make den monic w.r.t. lex
        let order = MonomialOrder::lex(&[]);
        if let Some((_, lc)) = den.leading(&order) {
            if !lc.is_one() {
                let inv = Field::inv(&lc);
                num = num.scale(&inv);
                den = den.scale(&inv);
            }
        }
        Coeff { num, den }
    }

    pub fn as_rational(&self) -> Option<BigRational> {
        let n = self.num.as_constant()?;
        let d = self.den.as_constant()?;
        Some(n / d)
    }

    pub fn is_param_free(&self) -> bool {
        self.num.is_constant() && self.den.is_constant()
    }

    pub fn contains_param(&self, p: &str) -> bool {
        self.num.contains_var(p) || self.den.contains_var(p)
    }

    pub fn params(&self) -> Vec<String> {
        let mut vs: Vec<String> = self.num.vars().to_vec();
        for v in self.den.vars() {
            if !vs.contains(v) {
                vs.push(v.clone());
            }
        }
        vs.sort();
        vs
    }

    /// Partial derivative with respect to a parameter.
    pub fn derivative(&self, p: &str) -> Self {
        let dn = self.num.derivative(p);
        let dd = self.den.derivative(p);
        // (n/d)' = (n'd - nd') / d^2
        Coeff::new(
            dn.mul(&self.den).sub(&self.num.mul(&dd)),
            self.den.mul(&self.den),
        )
    }

    /// Substitute parameter values; all occurring parameters must be bound.
    pub fn eval(&self, bindings: &BTreeMap<String, BigRational>) -> Option<BigRational> {
        let n = self.num.eval(bindings)?;
        let d = self.den.eval(bindings)?;
        if num_traits::Zero::is_zero(&d) {
            return None;
        }
        Some(n / d)
    }

    /// Substitute polynomials for parameters (used by location-shift rewriting).
    pub fn substitute_params(&self, map: &BTreeMap<String, QPoly>) -> Self {
        Coeff::new(self.num.substitute(map), self.den.substitute(map))
    }
}

impl Field for Coeff {
    fn zero() -> Self {
        Self::from_poly(QPoly::zero())
    }
    fn one() -> Self {
        Self::from_poly(QPoly::one())
    }
    fn from_rat(r: &BigRational) -> Self {
        Self::from_poly(QPoly::constant(r.clone()))
    }
    fn is_zero(&self) -> bool {
        self.num.is_zero()
    }
    fn is_one(&self) -> bool {
        self.num == self.den
    }
    fn add(&self, other: &Self) -> Self {
        Coeff::new(
            self.num
                .mul(&other.den)
                .add(&other.num.mul(&self.den)),
            self.den.mul(&other.den),
        )
    }
    fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }
    fn mul(&self, other: &Self) -> Self {
        Coeff::new(self.num.mul(&other.num), self.den.mul(&other.den))
    }
    fn neg(&self) -> Self {
        Coeff {
            num: self.num.neg(),
            den: self.den.clone(),
        }
    }
    fn inv(&self) -> Self {
        assert!(!self.num.is_zero(), "division by zero coefficient");
        Coeff::new(self.den.clone(), self.num.clone())
    }
    fn neg_for_display(&self) -> Option<Self> {
        if let Some(r) = self.as_rational() {
            if num_traits::Signed::is_negative(&r) {
                return Some(self.neg());
            }
        }
        None
    }
}

impl fmt::Display for Coeff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(r) = self.as_rational() {
            return write!(f, "{}", rat_str(&r));
        }
        if self.den.is_constant() {
            write!(f, "{}", self.num)
        } else {
            let num = if self.num.num_terms() > 1 {
                format!("({})", self.num)
            } else {
                self.num.to_string()
            };
            write!(f, "{}/({})", num, self.den)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn reduction_cancels_common_factors() {
        // (p^2 - 1)/(p - 1) = p + 1
        let p = QPoly::var("p");
        let a = Coeff::new(p.pow(2).sub(&QPoly::one()), p.sub(&QPoly::one()));
        let expect = Coeff::from_poly(p.add(&QPoly::one()));
        assert_eq!(a, expect);
    }

    #[test]
    fn field_axioms_spot_check() {
        let p = Coeff::param("p");
        let one = Coeff::one();
        let x = p.sub(&one); // p - 1
        let y = p.add(&one); // p + 1
        assert_eq!(x.mul(&y), p.mul(&p).sub(&one));
        assert!(x.mul(&x.inv()).is_one());
        assert!(x.sub(&x).is_zero());
    }

    #[test]
    fn derivative_quotient_rule() {
        // d/dp (1/p) = -1/p^2
        let inv_p = Coeff::param("p").inv();
        let d = inv_p.derivative("p");
        let expect = Coeff::new(QPoly::constant(q(-1, 1)), QPoly::var("p").pow(2));
        assert_eq!(d, expect);
    }

    #[test]
    fn eval_with_bindings() {
        let p = Coeff::param("p");
        let e = p.mul(&p).add(&Coeff::one()); // p^2 + 1
        let mut b = BTreeMap::new();
        b.insert("p".to_string(), q(1, 2));
        assert_eq!(e.eval(&b).unwrap(), q(5, 4));
    }
}
