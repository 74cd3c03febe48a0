//! Exponential polynomials: finite sums of `p(n) * lambda^n` where the
//! coefficients of `p` live in the quadratic-surd extension of the
//! rational-function field and each base `lambda` is a rational, a real
//! quadratic surd, or a rational function of the parameters.
//!
//! The base 0 encodes a one-step transient: `c * 0^n` is `c` at `n = 0` and
//! vanishes afterwards (the `0^0 = 1` convention).

use crate::algebra::field::rat_str;
use crate::algebra::{Coeff, Field, MPoly, QuadraticSurd, Surd, SurdCoeff};
use crate::error::{Error, Result};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

#[derive(Clone, Debug, PartialEq)]
pub enum BaseValue {
    Rat(BigRational),
    /// Irrational: `b != 0`, `d > 0` squarefree.
    Surd(QuadraticSurd),
    /// Depends on symbolic parameters.
    Param(Coeff),
}

impl BaseValue {
    pub fn one() -> Self {
        BaseValue::Rat(num_traits::One::one())
    }

    pub fn zero() -> Self {
        BaseValue::Rat(Zero::zero())
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, BaseValue::Rat(r) if Zero::is_zero(r))
    }

    pub fn is_one(&self) -> bool {
        matches!(self, BaseValue::Rat(r) if num_traits::One::is_one(r))
    }

    pub fn from_coeff(c: &Coeff) -> Self {
        match c.as_rational() {
            Some(r) => BaseValue::Rat(r),
            None => BaseValue::Param(c.clone()),
        }
    }

    pub fn from_surd(s: QuadraticSurd) -> Self {
        if s.is_pure() {
            BaseValue::Rat(s.a)
        } else {
            BaseValue::Surd(s)
        }
    }

    /// `lambda^n` in the coefficient field (base 0 gives `[n = 0]`).
    pub fn pow_n(&self, n: u64) -> SurdCoeff {
        match self {
            BaseValue::Rat(r) => {
                if Zero::is_zero(r) {
                    if n == 0 {
                        Field::one()
                    } else {
                        Field::zero()
                    }
                } else {
                    Surd::pure(Field::from_rat(&num_traits::pow::pow(
                        r.clone(),
                        n as usize,
                    )))
                }
            }
            BaseValue::Surd(s) => {
                let p: QuadraticSurd = Field::pow(s, n as u32);
                Surd {
                    a: Field::from_rat(&p.a),
                    b: Field::from_rat(&p.b),
                    d: p.d,
                }
            }
            BaseValue::Param(c) => Surd::pure(Field::pow(c, n as u32)),
        }
    }

    /// Product of bases; `None` when the product leaves the supported base
    /// kinds (a parameter times a surd).
    pub fn mul(&self, other: &BaseValue) -> Option<BaseValue> {
        Some(match (self, other) {
            (BaseValue::Rat(a), BaseValue::Rat(b)) => BaseValue::Rat(a * b),
            (BaseValue::Rat(a), BaseValue::Surd(s)) | (BaseValue::Surd(s), BaseValue::Rat(a)) => {
                if Zero::is_zero(a) {
                    BaseValue::zero()
                } else {
                    BaseValue::Surd(Surd {
                        a: &s.a * a,
                        b: &s.b * a,
                        d: s.d.clone(),
                    })
                }
            }
            (BaseValue::Surd(x), BaseValue::Surd(y)) => BaseValue::from_surd(x.mul(y)),
            (BaseValue::Rat(a), BaseValue::Param(c)) | (BaseValue::Param(c), BaseValue::Rat(a)) => {
                BaseValue::from_coeff(&c.mul(&Field::from_rat(a)))
            }
            (BaseValue::Param(a), BaseValue::Param(b)) => BaseValue::from_coeff(&a.mul(b)),
            _ => return None,
        })
    }

    /// Compare `|lambda|` with 1, when decidable.
    pub fn modulus_cmp_one(&self) -> Option<Ordering> {
        match self {
            BaseValue::Rat(r) => Some(r.abs().cmp(&num_traits::One::one())),
            BaseValue::Surd(s) => {
                let one = BigRational::from_integer(1.into());
                let above_minus_one = surd_sign(&(&s.a + &one), &s.b, &s.d);
                let below_one = surd_sign(&(&s.a - &one), &s.b, &s.d);
                match (above_minus_one, below_one) {
                    (Ordering::Greater, Ordering::Less) => Some(Ordering::Less),
                    (Ordering::Equal, _) | (_, Ordering::Equal) => Some(Ordering::Equal),
                    _ => Some(Ordering::Greater),
                }
            }
            BaseValue::Param(_) => None,
        }
    }

    pub fn radicand(&self) -> Option<&BigInt> {
        match self {
            BaseValue::Surd(s) => Some(&s.d),
            _ => None,
        }
    }
}

/// Sign of `x + y*sqrt(d)` for squarefree `d > 0`.
fn surd_sign(x: &BigRational, y: &BigRational, d: &BigInt) -> Ordering {
    let zero = BigRational::from_integer(0.into());
    if Zero::is_zero(y) {
        return x.cmp(&zero);
    }
    if Zero::is_zero(x) {
        return y.cmp(&zero);
    }
    let dr = BigRational::from_integer(d.clone());
    match (x > &zero, y > &zero) {
        (true, true) => Ordering::Greater,
        (false, false) => Ordering::Less,
        (true, false) => {
            // positive iff x^2 > y^2 d
            (x * x).cmp(&(y * y * dr))
        }
        (false, true) => (y * y * dr).cmp(&(x * x)),
    }
}

impl Eq for BaseValue {}

impl Ord for BaseValue {
    fn cmp(&self, other: &Self) -> Ordering {
        use BaseValue::*;
        match (self, other) {
            (Rat(a), Rat(b)) => a.cmp(b),
            (Rat(_), _) => Ordering::Less,
            (_, Rat(_)) => Ordering::Greater,
            (Surd(x), Surd(y)) => (&x.d, &x.a, &x.b).cmp(&(&y.d, &y.a, &y.b)),
            (Surd(_), Param(_)) => Ordering::Less,
            (Param(_), Surd(_)) => Ordering::Greater,
            (Param(a), Param(b)) => a.to_string().cmp(&b.to_string()),
        }
    }
}

impl PartialOrd for BaseValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for BaseValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BaseValue::Rat(r) => {
                let s = rat_str(r);
                if s.contains('/') || s.starts_with('-') {
                    write!(f, "({})", s)
                } else {
                    write!(f, "{}", s)
                }
            }
            BaseValue::Surd(s) => write!(f, "({})", s),
            BaseValue::Param(c) => write!(f, "({})", c),
        }
    }
}

/// Sum of `p_lambda(n) * lambda^n`; per base, coefficients of `p` are stored
/// by ascending power of `n`, with no trailing zeros.
#[derive(Clone, Debug, PartialEq)]
pub struct ExpPoly {
    pub terms: BTreeMap<BaseValue, Vec<SurdCoeff>>,
}

impl ExpPoly {
    pub fn zero() -> Self {
        ExpPoly {
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(c: SurdCoeff) -> Self {
        Self::term(BaseValue::one(), vec![c])
    }

    pub fn from_coeff(c: &Coeff) -> Self {
        Self::constant(Surd::pure(c.clone()))
    }

    /// `n^j * lambda^n` combination from a coefficient vector.
    pub fn term(base: BaseValue, coeffs: Vec<SurdCoeff>) -> Self {
        let mut e = ExpPoly::zero();
        e.add_term(base, coeffs);
        e
    }

    fn add_term(&mut self, base: BaseValue, mut coeffs: Vec<SurdCoeff>) {
        if base.is_zero() {
            // n^j 0^n vanishes for j >= 1
            coeffs.truncate(1);
        }
        let entry = self.terms.entry(base).or_default();
        if entry.len() < coeffs.len() {
            entry.resize(coeffs.len(), Field::zero());
        }
        for (i, c) in coeffs.into_iter().enumerate() {
            entry[i] = entry[i].add(&c);
        }
        self.trim();
    }

    fn trim(&mut self) {
        let keys: Vec<BaseValue> = self.terms.keys().cloned().collect();
        for k in keys {
            let v = self.terms.get_mut(&k).unwrap();
            while v.last().map(|c| Field::is_zero(c)).unwrap_or(false) {
                v.pop();
            }
            if v.is_empty() {
                self.terms.remove(&k);
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (b, cs) in &other.terms {
            out.add_term(b.clone(), cs.clone());
        }
        out
    }

    pub fn neg(&self) -> Self {
        ExpPoly {
            terms: self
                .terms
                .iter()
                .map(|(b, cs)| (b.clone(), cs.iter().map(|c| c.neg()).collect()))
                .collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn scale(&self, k: &SurdCoeff) -> Self {
        if Field::is_zero(k) {
            return Self::zero();
        }
        let mut out = Self::zero();
        for (b, cs) in &self.terms {
            out.add_term(b.clone(), cs.iter().map(|c| c.mul(k)).collect());
        }
        out
    }

    /// Product; panics only on a parameter-base times surd-base product,
    /// which the solver rules out up front.
    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for (b1, cs1) in &self.terms {
            for (b2, cs2) in &other.terms {
                let base = b1
                    .mul(b2)
                    .expect("unsupported base product (parameter times surd)");
                if b1.is_zero() || b2.is_zero() {
                    // delta times p(n) lambda^n contributes p(0) at n = 0
                    let v1 = cs1.first().cloned().unwrap_or_else(Field::zero);
                    let v2 = cs2.first().cloned().unwrap_or_else(Field::zero);
                    out.add_term(BaseValue::zero(), vec![v1.mul(&v2)]);
                    continue;
                }
                // polynomial product in n
                let mut prod = vec![<SurdCoeff as Field>::zero(); cs1.len() + cs2.len() - 1];
                for (i, c1) in cs1.iter().enumerate() {
                    for (j, c2) in cs2.iter().enumerate() {
                        prod[i + j] = prod[i + j].add(&c1.mul(c2));
                    }
                }
                out.add_term(base, prod);
            }
        }
        out
    }

    pub fn evaluate_at(&self, n: u64) -> SurdCoeff {
        let mut acc: SurdCoeff = Field::zero();
        for (b, cs) in &self.terms {
            if b.is_zero() {
                if n == 0 {
                    acc = acc.add(&cs[0]);
                }
                continue;
            }
            let pw = b.pow_n(n);
            let nn: SurdCoeff = Surd::pure(Field::from_int(n as i64));
            let mut poly: SurdCoeff = Field::zero();
            for c in cs.iter().rev() {
                poly = poly.mul(&nn).add(c);
            }
            acc = acc.add(&poly.mul(&pw));
        }
        acc
    }

    /// Partial derivative with respect to a parameter. Differentiates both
    /// the coefficients and parameter-dependent bases:
    /// `d/dp (lambda(p)^n) = n * (lambda'/lambda) * lambda^n`.
    pub fn derivative(&self, param: &str) -> Result<Self> {
        let mut out = Self::zero();
        for (b, cs) in &self.terms {
            let dcs: Vec<SurdCoeff> = cs
                .iter()
                .map(|c| Surd {
                    a: c.a.derivative(param),
                    b: c.b.derivative(param),
                    d: c.d.clone(),
                })
                .collect();
            out.add_term(b.clone(), dcs);
            if let BaseValue::Param(l) = b {
                if l.contains_param(param) {
                    if Field::is_zero(l) {
                        continue;
                    }
                    let factor: SurdCoeff = Surd::pure(l.derivative(param).div(l));
                    // shift the polynomial by one power of n
                    let mut shifted = vec![<SurdCoeff as Field>::zero()];
                    shifted.extend(cs.iter().map(|c| c.mul(&factor)));
                    out.add_term(b.clone(), shifted);
                }
            }
        }
        Ok(out)
    }

    /// Limit for `n -> infinity`.
    pub fn limit_at_infinity(&self) -> Result<Coeff> {
        let mut acc: Coeff = Field::zero();
        for (b, cs) in &self.terms {
            if b.is_zero() {
                continue; // transient
            }
            match b.modulus_cmp_one() {
                Some(Ordering::Less) => {}
                Some(Ordering::Equal) => {
                    if !b.is_one() {
                        return Err(Error::Diverges(format!(
                            "oscillating term with base {}",
                            b
                        )));
                    }
                    if cs.len() > 1 {
                        return Err(Error::Diverges(
                            "polynomially growing term with base 1".into(),
                        ));
                    }
                    let c = &cs[0];
                    if !Field::is_zero(&c.b) {
                        return Err(Error::Invalid(
                            "irrational constant term in a limit".into(),
                        ));
                    }
                    acc = acc.add(&c.a);
                }
                Some(Ordering::Greater) => {
                    return Err(Error::Diverges(format!(
                        "exponentially growing term with base {}",
                        b
                    )));
                }
                None => {
                    return Err(Error::ParamCondition(format!(
                        "base {} may lie on either side of 1",
                        b
                    )));
                }
            }
        }
        Ok(acc)
    }

    /// The value as a `Coeff` when the whole expression is a constant.
    pub fn as_coeff(&self) -> Option<Coeff> {
        if self.is_zero() {
            return Some(Field::zero());
        }
        if self.terms.len() != 1 {
            return None;
        }
        let (b, cs) = self.terms.iter().next().unwrap();
        if b.is_one() && cs.len() == 1 && Field::is_zero(&cs[0].b) {
            Some(cs[0].a.clone())
        } else {
            None
        }
    }
}

impl crate::moments::Ring for ExpPoly {
    fn zero() -> Self {
        ExpPoly::zero()
    }
    fn one() -> Self {
        ExpPoly::constant(Field::one())
    }
    fn add(&self, other: &Self) -> Self {
        ExpPoly::add(self, other)
    }
    fn sub(&self, other: &Self) -> Self {
        ExpPoly::sub(self, other)
    }
    fn mul(&self, other: &Self) -> Self {
        ExpPoly::mul(self, other)
    }
    fn from_rat(r: &BigRational) -> Self {
        ExpPoly::constant(Field::from_rat(r))
    }
}

impl fmt::Display for ExpPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        // polynomial in n per base, via the shared polynomial printer
        let order = crate::algebra::MonomialOrder::lex(&["n"]);
        let mut parts: Vec<String> = Vec::new();
        // dominant base first, the constant part last, the transient at the end
        let rank = |b: &BaseValue| -> f64 {
            if b.is_one() {
                return -1.0;
            }
            if b.is_zero() {
                return -2.0;
            }
            match b {
                BaseValue::Rat(r) => num_traits::ToPrimitive::to_f64(&r.abs()).unwrap_or(0.0),
                BaseValue::Surd(s) => {
                    let a = num_traits::ToPrimitive::to_f64(&s.a).unwrap_or(0.0);
                    let bb = num_traits::ToPrimitive::to_f64(&s.b).unwrap_or(0.0);
                    let d = num_traits::ToPrimitive::to_f64(&s.d).unwrap_or(0.0);
                    (a + bb * d.sqrt()).abs()
                }
                BaseValue::Param(_) => f64::INFINITY,
            }
        };
        let mut ordered: Vec<(&BaseValue, &Vec<SurdCoeff>)> = self.terms.iter().collect();
        ordered.sort_by(|(x, _), (y, _)| {
            rank(y)
                .partial_cmp(&rank(x))
                .unwrap_or(std::cmp::Ordering::Equal)
                .then_with(|| y.cmp(x))
        });
        for (b, cs) in ordered {
            let mut poly: MPoly<SurdCoeff> = MPoly::zero();
            for (j, c) in cs.iter().enumerate() {
                poly = poly.add(&MPoly::var_pow("n", j as u32).scale(c));
            }
            let ps = poly.to_string_ordered(&order);
            if b.is_one() {
                parts.push(ps);
            } else {
                let needs_parens = ps.contains(" + ") || ps.contains(" - ") || ps.starts_with('-');
                if ps == "1" {
                    parts.push(format!("{}**n", b));
                } else if needs_parens {
                    parts.push(format!("{}**n*({})", b, ps));
                } else {
                    parts.push(format!("{}**n*{}", b, ps));
                }
            }
        }
        let mut out = parts[0].clone();
        for p in &parts[1..] {
            if let Some(rest) = p.strip_prefix('-') {
                out.push_str(" - ");
                out.push_str(rest.trim_start());
            } else {
                out.push_str(" + ");
                out.push_str(p);
            }
        }
        write!(f, "{}", out)
    }
}
