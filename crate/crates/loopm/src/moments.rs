//! Raw moments of the supported distributions, and conversions between raw
//! moments, central moments, and cumulants.
//!
//! Distribution arguments are constants (possibly symbolic parameters), so
//! raw moments land in the rational-function coefficient field. The
//! raw-to-central and raw-to-cumulant conversions also apply to moments *as
//! functions of the loop counter*, so they are written against a minimal
//! ring abstraction instead of a concrete type.

use crate::algebra::{Coeff, Field};
use crate::error::{Error, Result};
use crate::frontend::DistKind;
use crate::recurrences::Monom;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};

/// A requested quantity: a raw moment of a monomial, or a central moment or
/// cumulant of a single expression, derived from raw moments of its powers.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum MomentGoal {
    Raw(Monom),
    Central(u32, Monom),
    Cumulant(u32, Monom),
}

impl MomentGoal {
    /// The monomial whose raw moments the goal is built from.
    pub fn base(&self) -> &Monom {
        match self {
            MomentGoal::Raw(m) | MomentGoal::Central(_, m) | MomentGoal::Cumulant(_, m) => m,
        }
    }

    /// Highest power of the base monomial needed.
    pub fn order(&self) -> u32 {
        match self {
            MomentGoal::Raw(_) => 1,
            MomentGoal::Central(d, _) | MomentGoal::Cumulant(d, _) => *d,
        }
    }

    /// Parse `E(M)`, `c<d>(M)`, or `k<d>(M)` where `M` is a monomial like
    /// `x**2*y` (or `1`).
    pub fn parse(s: &str) -> Result<MomentGoal> {
        let s = s.trim();
        let bad = || Error::Invalid(format!("cannot parse goal `{}`", s));
        let open = s.find('(').ok_or_else(bad)?;
        if !s.ends_with(')') {
            return Err(bad());
        }
        let head = &s[..open];
        let inner = &s[open + 1..s.len() - 1];
        let monom = parse_monom(inner).ok_or_else(bad)?;
        match head {
            "E" => Ok(MomentGoal::Raw(monom)),
            _ if head.starts_with('c') || head.starts_with('k') => {
                let d: u32 = head[1..].parse().map_err(|_| bad())?;
                if d == 0 {
                    return Err(bad());
                }
                if head.starts_with('c') {
                    Ok(MomentGoal::Central(d, monom))
                } else {
                    Ok(MomentGoal::Cumulant(d, monom))
                }
            }
            _ => Err(bad()),
        }
    }
}

fn parse_monom(s: &str) -> Option<Monom> {
    let s = s.trim();
    if s == "1" {
        return Some(Monom::one());
    }
    let mut out = Monom::one();
    // "x**2*y" -> factors "x**2" and "y"
    for factor in s.replace("**", "^").split('*') {
        let factor = factor.trim();
        let (name, exp) = match factor.split_once('^') {
            Some((n, e)) => (n.trim(), e.trim().parse::<u32>().ok()?),
            None => (factor, 1),
        };
        if name.is_empty()
            || !name
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || c == '_')
            || name.chars().next().map(|c| c.is_ascii_digit()).unwrap_or(true)
        {
            return None;
        }
        out = out.mul(&Monom::var_pow(name, exp));
    }
    Some(out)
}

impl std::fmt::Display for MomentGoal {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            MomentGoal::Raw(m) => write!(f, "E({})", m),
            MomentGoal::Central(d, m) => write!(f, "c{}({})", d, m),
            MomentGoal::Cumulant(d, m) => write!(f, "k{}({})", d, m),
        }
    }
}

/// Commutative ring with rational scalars; enough for moment conversions.
pub trait Ring: Clone {
    fn zero() -> Self;
    fn one() -> Self;
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn from_rat(r: &BigRational) -> Self;

    fn pow(&self, mut e: u32) -> Self {
        let mut acc = Self::one();
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        acc
    }
}

impl<K: Field> Ring for K {
    fn zero() -> Self {
        Field::zero()
    }
    fn one() -> Self {
        Field::one()
    }
    fn add(&self, other: &Self) -> Self {
        Field::add(self, other)
    }
    fn sub(&self, other: &Self) -> Self {
        Field::sub(self, other)
    }
    fn mul(&self, other: &Self) -> Self {
        Field::mul(self, other)
    }
    fn from_rat(r: &BigRational) -> Self {
        Field::from_rat(r)
    }
}

pub fn binomial(n: u32, k: u32) -> BigRational {
    if k > n {
        return BigRational::from_integer(0.into());
    }
    let mut num = BigInt::one();
    let mut den = BigInt::one();
    for i in 0..k {
        num *= BigInt::from(n - i);
        den *= BigInt::from(i + 1);
    }
    BigRational::new(num, den)
}

fn factorial(k: u32) -> BigRational {
    let mut f = BigInt::one();
    for i in 2..=k {
        f *= BigInt::from(i);
    }
    BigRational::from_integer(f)
}

/// (k-1)!! for even k: number of pairings of k elements.
fn odd_double_factorial(k: u32) -> BigRational {
    debug_assert!(k % 2 == 0);
    let mut f = BigInt::one();
    let mut i = 1u32;
    while i < k {
        f *= BigInt::from(i);
        i += 2;
    }
    BigRational::from_integer(f)
}

/// E((loc + Z)^k) where `central` gives the central moments of Z.
fn location_scale_moment(loc: &Coeff, central: impl Fn(u32) -> Coeff, k: u32) -> Coeff {
    if Field::is_zero(loc) {
        return central(k);
    }
    let mut sum: Coeff = Field::zero();
    for j in 0..=k {
        let cj = central(j);
        if Field::is_zero(&cj) {
            continue;
        }
        let term = Field::mul(
            &Field::mul(&Field::from_rat(&binomial(k, j)), &Field::pow(loc, k - j)),
            &cj,
        );
        sum = Field::add(&sum, &term);
    }
    sum
}

/// k-th raw moment E(X^k) of a draw with constant arguments. State-dependent
/// locations were split off by normalization, but a constant symbolic
/// location may still sit in the arguments.
pub fn raw_moment(dist: DistKind, args: &[Coeff], k: u32) -> Result<Coeff> {
    if k == 0 {
        return Ok(Field::one());
    }
    let rat = |r: BigRational| -> Coeff { Field::from_rat(&r) };
    Ok(match dist {
        DistKind::Bernoulli => args[0].clone(),
        DistKind::Normal => {
            // second argument is the variance
            let central = |j: u32| -> Coeff {
                if j % 2 == 1 {
                    Field::zero()
                } else {
                    Field::mul(&Field::pow(&args[1], j / 2), &rat(odd_double_factorial(j)))
                }
            };
            location_scale_moment(&args[0], central, k)
        }
        DistKind::Laplace => {
            let central = |j: u32| -> Coeff {
                if j % 2 == 1 {
                    Field::zero()
                } else {
                    Field::mul(&Field::pow(&args[1], j), &rat(factorial(j)))
                }
            };
            location_scale_moment(&args[0], central, k)
        }
        DistKind::Uniform => {
            let (a, b) = (&args[0], &args[1]);
            let width = Field::sub(b, a);
            if Field::is_zero(&width) {
                return Ok(Field::pow(a, k));
            }
            let num = Field::sub(&Field::pow(b, k + 1), &Field::pow(a, k + 1));
            let den = Field::mul(&width, &Field::from_int(k as i64 + 1));
            Field::div(&num, &den)
        }
        DistKind::Exponential => {
            // rate parameterization: E(X^k) = k! / lambda^k
            Field::div(&rat(factorial(k)), &Field::pow(&args[0], k))
        }
        DistKind::Gamma => {
            // shape alpha, rate beta: E(X^k) = prod_{j<k}(alpha+j) / beta^k
            let mut num: Coeff = Field::one();
            for j in 0..k {
                num = Field::mul(&num, &Field::add(&args[0], &Field::from_int(j as i64)));
            }
            Field::div(&num, &Field::pow(&args[1], k))
        }
        DistKind::Beta => {
            let mut acc: Coeff = Field::one();
            let ab = Field::add(&args[0], &args[1]);
            for j in 0..k {
                let j = Field::from_int(j as i64);
                acc = Field::mul(
                    &acc,
                    &Field::div(&Field::add(&args[0], &j), &Field::add(&ab, &j)),
                );
            }
            acc
        }
        DistKind::DiscreteUniform => {
            let to_int = |c: &Coeff| -> Result<i64> {
                c.as_rational()
                    .filter(|r| r.is_integer())
                    .and_then(|r| r.to_integer().to_i64())
                    .ok_or_else(|| {
                        Error::Invalid("DiscreteUniform bounds must be integer constants".into())
                    })
            };
            let a = to_int(&args[0])?;
            let b = to_int(&args[1])?;
            if b < a {
                return Err(Error::Invalid("empty DiscreteUniform range".into()));
            }
            let mut sum = BigRational::from_integer(0.into());
            for i in a..=b {
                sum += num_traits::pow::pow(BigRational::from_integer(i.into()), k as usize);
            }
            rat(sum / BigRational::from_integer((b - a + 1).into()))
        }
        DistKind::Categorical => {
            // values 0..m-1 with the given probabilities
            let mut acc: Coeff = Field::zero();
            for (i, p) in args.iter().enumerate() {
                let ik = num_traits::pow::pow(
                    BigRational::from_integer((i as i64).into()),
                    k as usize,
                );
                acc = Field::add(&acc, &Field::mul(p, &rat(ik)));
            }
            acc
        }
        DistKind::TruncNormal => {
            return Err(Error::UnsupportedMoment("TruncNormal".into()));
        }
    })
}

/// Central moments `E((X - E X)^d)` for d = 0..raw.len()-1 from raw moments
/// (`raw[j]` = E(X^j), with `raw[0]` = 1).
pub fn central_from_raw<R: Ring>(raw: &[R]) -> Vec<R> {
    let mean = raw[1].clone();
    (0..raw.len())
        .map(|d| {
            let mut acc = R::zero();
            for j in 0..=d {
                let sign = if (d - j) % 2 == 0 {
                    <BigRational as One>::one()
                } else {
                    -<BigRational as One>::one()
                };
                let c = binomial(d as u32, j as u32) * sign;
                let term = raw[j].mul(&mean.pow((d - j) as u32)).mul(&R::from_rat(&c));
                acc = acc.add(&term);
            }
            acc
        })
        .collect()
}

/// Cumulants for d = 0..raw.len()-1 from raw moments (`cum[0]` is 0 by
/// convention).
pub fn cumulant_from_raw<R: Ring>(raw: &[R]) -> Vec<R> {
    let mut cum: Vec<R> = vec![R::zero()];
    for d in 1..raw.len() {
        let mut k = raw[d].clone();
        for j in 1..d {
            let c = binomial(d as u32 - 1, j as u32 - 1);
            k = k.sub(&cum[j].mul(&raw[d - j]).mul(&R::from_rat(&c)));
        }
        cum.push(k);
    }
    cum
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }
    fn c(n: i64, d: i64) -> Coeff {
        Field::from_rat(&q(n, d))
    }

    #[test]
    fn normal_moments() {
        // Normal(0, v): E X^2 = v, E X^3 = 0, E X^4 = 3 v^2
        let v = Coeff::param("v");
        let args = [Field::zero(), v.clone()];
        assert_eq!(raw_moment(DistKind::Normal, &args, 2).unwrap(), v);
        assert!(Field::is_zero(
            &raw_moment(DistKind::Normal, &args, 3).unwrap()
        ));
        assert_eq!(
            raw_moment(DistKind::Normal, &args, 4).unwrap(),
            Field::mul(&Field::pow(&v, 2), &c(3, 1))
        );
    }

    #[test]
    fn uniform_and_discrete_uniform() {
        let args = [c(0, 1), c(1, 1)];
        for k in 1..6u32 {
            assert_eq!(
                raw_moment(DistKind::Uniform, &args, k).unwrap(),
                c(1, k as i64 + 1)
            );
        }
        // DiscreteUniform(1, 3): E X^2 = (1 + 4 + 9)/3
        let args = [c(1, 1), c(3, 1)];
        assert_eq!(
            raw_moment(DistKind::DiscreteUniform, &args, 2).unwrap(),
            c(14, 3)
        );
    }

    #[test]
    fn exponential_and_gamma_agree() {
        // Exponential(l) = Gamma(1, l)
        let l = Coeff::param("l");
        for k in 1..5u32 {
            assert_eq!(
                raw_moment(DistKind::Exponential, &[l.clone()], k).unwrap(),
                raw_moment(DistKind::Gamma, &[Field::one(), l.clone()], k).unwrap()
            );
        }
    }

    #[test]
    fn beta_uniform_special_case() {
        // Beta(1,1) = Uniform(0,1)
        for k in 1..5u32 {
            assert_eq!(
                raw_moment(DistKind::Beta, &[Field::one(), Field::one()], k).unwrap(),
                c(1, k as i64 + 1)
            );
        }
    }

    #[test]
    fn bernoulli_variance() {
        let p = Coeff::param("p");
        let raw: Vec<Coeff> = vec![
            Field::one(),
            raw_moment(DistKind::Bernoulli, &[p.clone()], 1).unwrap(),
            raw_moment(DistKind::Bernoulli, &[p.clone()], 2).unwrap(),
        ];
        let central = central_from_raw(&raw);
        // Var = p - p^2
        assert_eq!(central[2], Field::sub(&p, &Field::mul(&p, &p)));
    }

    #[test]
    fn normal_cumulants_vanish_above_two() {
        let v = Coeff::param("v");
        let args = [Field::zero(), v.clone()];
        let raw: Vec<Coeff> = (0..=4)
            .map(|k| raw_moment(DistKind::Normal, &args, k).unwrap())
            .collect();
        let cum = cumulant_from_raw(&raw);
        assert!(Field::is_zero(&cum[1]));
        assert_eq!(cum[2], v);
        assert!(Field::is_zero(&cum[3]));
        assert!(Field::is_zero(&cum[4]));
    }

    #[test]
    fn laplace_kurtosis() {
        // Laplace(0, b): E X^2 = 2 b^2, E X^4 = 24 b^4
        let b = Coeff::param("b");
        let args = [Field::zero(), b.clone()];
        assert_eq!(
            raw_moment(DistKind::Laplace, &args, 2).unwrap(),
            Field::mul(&Field::pow(&b, 2), &c(2, 1))
        );
        assert_eq!(
            raw_moment(DistKind::Laplace, &args, 4).unwrap(),
            Field::mul(&Field::pow(&b, 4), &c(24, 1))
        );
    }

    #[test]
    fn goal_strings_round_trip() {
        for s in ["E(x)", "E(x**2*y)", "E(1)", "c2(x)", "k3(count)"] {
            let g = MomentGoal::parse(s).unwrap();
            assert_eq!(g.to_string(), s);
        }
        assert_eq!(
            MomentGoal::parse("c2(x)").unwrap(),
            MomentGoal::Central(2, Monom::var("x"))
        );
        assert_eq!(
            MomentGoal::parse(" E( x * y ) ").unwrap(),
            MomentGoal::Raw(Monom::var("x").mul(&Monom::var("y")))
        );
        for s in ["x", "E(x", "c0(x)", "q2(x)", "E(2x)", "E()"] {
            assert!(MomentGoal::parse(s).is_err(), "accepted {}", s);
        }
    }

    #[test]
    fn truncated_normal_unsupported() {
        let args = [c(0, 1), c(1, 1), c(-1, 1), c(1, 1)];
        assert!(matches!(
            raw_moment(DistKind::TruncNormal, &args, 1),
            Err(Error::UnsupportedMoment(_))
        ));
    }
}
