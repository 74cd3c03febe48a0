//! Polynomial invariants of closed forms: replace exponential sequences by
//! fresh variables, add the multiplicative relations that hold among the
//! bases, and eliminate everything except the goal symbols by a lex Groebner
//! basis. The result generates all polynomial relations among the closed
//! forms that hold for every iteration count.

use crate::algebra::{
    eliminate_vars, hilbert_basis_nat, in_ideal, Coeff, DioSystem, Field, MPoly, MonomialOrder,
    PPoly, Surd, SurdCoeff,
};
use crate::error::{Error, Result};
use crate::limits::Limits;
use crate::solver::{BaseValue, ExpPoly};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::collections::{BTreeMap, BTreeSet};

/// Internal ring variables: names the surface language cannot produce.
const EXP_VAR_PREFIX: &str = "%e";
const SURD_VAR: &str = "%s";

const SEARCH_CAP: usize = 200_000;

#[derive(Clone, Debug)]
pub struct InvariantBasis {
    /// Goal symbols the generators are expressed in.
    pub goals: Vec<String>,
    /// Generators of the invariant ideal, in goal symbols and parameters.
    pub generators: Vec<PPoly>,
}

fn prime_factors(n: &BigInt) -> BTreeMap<BigInt, i64> {
    let mut n = n.abs();
    let mut out = BTreeMap::new();
    let mut d = BigInt::from(2);
    let limit = BigInt::from(1_000_000u64);
    while &d * &d <= n && d <= limit {
        let mut e = 0i64;
        while (&n % &d).is_zero() {
            n /= &d;
            e += 1;
        }
        if e > 0 {
            out.insert(d.clone(), e);
        }
        d += 1;
    }
    if n > BigInt::one() {
        // prime, or a hard composite treated as an atom
        *out.entry(n).or_insert(0) += 1;
    }
    out
}

/// Signed prime-exponent vector of a nonzero rational, plus its sign.
fn rational_exponents(r: &BigRational) -> (BTreeMap<BigInt, i64>, bool) {
    let mut exps = prime_factors(r.numer());
    for (p, e) in prime_factors(r.denom()) {
        *exps.entry(p).or_insert(0) -= e;
    }
    exps.retain(|_, e| *e != 0);
    (exps, r.is_negative())
}

fn lift_base(b: &BaseValue) -> SurdCoeff {
    match b {
        BaseValue::Rat(r) => Surd::pure(Field::from_rat(r)),
        BaseValue::Surd(s) => Surd {
            a: Field::from_rat(&s.a),
            b: Field::from_rat(&s.b),
            d: s.d.clone(),
        },
        BaseValue::Param(c) => Surd::pure(c.clone()),
    }
}

/// Binomial generators of the multiplicative-relation ideal of the bases:
/// for each relation `prod base_i^{u_i} = prod base_i^{w_i}` the binomial
/// `prod var_i^{u_i} - prod var_i^{w_i}`.
///
/// Rational bases get the complete toric ideal from a Hilbert basis of the
/// prime-balance system (with an even-multiplicity constraint for the sign).
/// Irrational or parameter-valued bases fall back to a bounded exponent
/// search: sound but incomplete.
pub fn mult_relations(bases: &[(String, BaseValue)], limits: &Limits) -> Result<Vec<PPoly>> {
    if bases.is_empty() {
        return Ok(Vec::new());
    }
    let all_rational = bases.iter().all(|(_, b)| matches!(b, BaseValue::Rat(_)));
    if all_rational {
        mult_relations_rational(bases, limits)
    } else {
        mult_relations_search(bases, limits)
    }
}

fn binomial(bases: &[(String, BaseValue)], u: &[u32], w: &[u32]) -> PPoly {
    let mono = |exps: &[u32]| -> PPoly {
        let mut m: PPoly = MPoly::one();
        for ((name, _), &e) in bases.iter().zip(exps.iter()) {
            if e > 0 {
                m = m.mul(&MPoly::var_pow(name, e));
            }
        }
        m
    };
    mono(u).sub(&mono(w))
}

fn mult_relations_rational(
    bases: &[(String, BaseValue)],
    limits: &Limits,
) -> Result<Vec<PPoly>> {
    let k = bases.len();
    let mut primes: BTreeSet<BigInt> = BTreeSet::new();
    let mut exps: Vec<BTreeMap<BigInt, i64>> = Vec::new();
    let mut negative: Vec<bool> = Vec::new();
    for (_, b) in bases {
        let r = match b {
            BaseValue::Rat(r) => r,
            _ => unreachable!(),
        };
        let (e, neg) = rational_exponents(r);
        primes.extend(e.keys().cloned());
        exps.push(e);
        negative.push(neg);
    }
    let has_sign = negative.iter().any(|&n| n);
    // unknowns: u_1..u_k, w_1..w_k, and two parity slacks when signs matter
    let cols = 2 * k + if has_sign { 2 } else { 0 };
    let mut rows: Vec<Vec<i64>> = Vec::new();
    for p in &primes {
        let mut row = vec![0i64; cols];
        for (i, e) in exps.iter().enumerate() {
            let c = *e.get(p).unwrap_or(&0);
            row[i] = c;
            row[k + i] = -c;
        }
        rows.push(row);
    }
    if has_sign {
        // the multiplicity of negative factors on both sides must agree
        // modulo 2: sum_neg u_i - sum_neg w_i = 2 t - 2 t'
        let mut row = vec![0i64; cols];
        for (i, &n) in negative.iter().enumerate() {
            if n {
                row[i] = 1;
                row[k + i] = -1;
            }
        }
        row[2 * k] = -2;
        row[2 * k + 1] = 2;
        rows.push(row);
    }
    let sols = hilbert_basis_nat(&DioSystem::new(rows), limits)?;
    let mut seen: BTreeSet<(Vec<u32>, Vec<u32>)> = BTreeSet::new();
    let mut out = Vec::new();
    for s in sols {
        let u = s[..k].to_vec();
        let w = s[k..2 * k].to_vec();
        if u == w {
            continue;
        }
        let key = if u > w {
            (u.clone(), w.clone())
        } else {
            (w.clone(), u.clone())
        };
        if seen.insert(key) {
            out.push(binomial(bases, &u, &w));
        }
    }
    Ok(out)
}

fn mult_relations_search(bases: &[(String, BaseValue)], limits: &Limits) -> Result<Vec<PPoly>> {
    let k = bases.len();
    let bound = limits.surd_exponent_bound as i64;
    let width = 2 * bound + 1;
    let mut total: usize = 1;
    for _ in 0..k {
        total = total.saturating_mul(width as usize);
        if total > SEARCH_CAP {
            return Err(Error::ResourceLimit(format!(
                "exponent search over {} bases exceeds {} candidates",
                k, SEARCH_CAP
            )));
        }
    }
    let lifted: Vec<SurdCoeff> = bases.iter().map(|(_, b)| lift_base(b)).collect();
    let inverses: Vec<SurdCoeff> = lifted.iter().map(|c| c.inv()).collect();
    let mut kept: Vec<Vec<i64>> = Vec::new();
    let mut found: Vec<Vec<i64>> = Vec::new();
    let mut z = vec![-bound; k];
    loop {
        // canonical representative: first nonzero entry positive
        if z.iter().find(|&&x| x != 0).map(|&x| x > 0).unwrap_or(false) {
            let mut prod: SurdCoeff = Field::one();
            for (i, &e) in z.iter().enumerate() {
                let base = if e >= 0 { &lifted[i] } else { &inverses[i] };
                prod = prod.mul(&Field::pow(base, e.unsigned_abs() as u32));
            }
            if Field::is_one(&prod) {
                found.push(z.clone());
            }
        }
        // odometer step
        let mut i = 0;
        loop {
            if i == k {
                break;
            }
            z[i] += 1;
            if z[i] <= bound {
                break;
            }
            z[i] = -bound;
            i += 1;
        }
        if i == k {
            break;
        }
    }
    found.sort_by_key(|z| (z.iter().map(|x| x.unsigned_abs()).sum::<u64>(), z.clone()));
    let mut out = Vec::new();
    for z in found {
        // skip scalar multiples of an already kept relation
        let redundant = kept.iter().any(|base| {
            let mut ratio: Option<i64> = None;
            for (&a, &b) in z.iter().zip(base.iter()) {
                match (a, b) {
                    (0, 0) => {}
                    (_, 0) | (0, _) => return false,
                    _ => {
                        if a % b != 0 {
                            return false;
                        }
                        let r = a / b;
                        if r <= 0 || *ratio.get_or_insert(r) != r {
                            return false;
                        }
                    }
                }
            }
            ratio.is_some()
        });
        if redundant {
            continue;
        }
        let u: Vec<u32> = z.iter().map(|&x| x.max(0) as u32).collect();
        let w: Vec<u32> = z.iter().map(|&x| (-x).max(0) as u32).collect();
        out.push(binomial(bases, &u, &w));
        kept.push(z);
    }
    Ok(out)
}

/// Polynomial in the ring variables (`n`, exponential variables, surd
/// variable) equal to the closed form.
fn polynomialize(
    e: &ExpPoly,
    exp_vars: &BTreeMap<BaseValue, PPoly>,
) -> Result<PPoly> {
    let mut out: PPoly = MPoly::zero();
    for (b, cs) in &e.terms {
        if b.is_zero() {
            return Err(Error::Invalid(
                "closed form has a transient step, no invariant over all n".into(),
            ));
        }
        let mut poly: PPoly = MPoly::zero();
        for (j, c) in cs.iter().enumerate() {
            let mut coeff_poly: PPoly = MPoly::constant(c.a.clone());
            if !Field::is_zero(&c.b) {
                coeff_poly =
                    coeff_poly.add(&MPoly::var(SURD_VAR).scale(&c.b));
            }
            poly = poly.add(&MPoly::<Coeff>::var_pow("n", j as u32).mul(&coeff_poly));
        }
        if !b.is_one() {
            poly = poly.mul(&exp_vars[b]);
        }
        out = out.add(&poly);
    }
    Ok(out)
}

/// Sort key putting bases that are plausibly powers of others last.
fn base_size(b: &BaseValue) -> (BigRational, BaseValue) {
    let size = match b {
        BaseValue::Rat(r) => r.abs(),
        BaseValue::Surd(s) => s.a.abs() + s.b.abs(),
        BaseValue::Param(_) => BigRational::from_integer(BigInt::from(i64::MAX)),
    };
    (size, b.clone())
}

/// Exponents expressing `target` as a product of powers of `gens`, found by
/// a small bounded enumeration.
fn decompose_base(target: &BaseValue, gens: &[BaseValue]) -> Option<Vec<u32>> {
    const EXP_BOUND: u32 = 4;
    let m = gens.len();
    if m == 0 {
        return None;
    }
    let mut k = vec![0u32; m];
    loop {
        // odometer step first: the all-zero tuple is the empty product
        let mut i = 0;
        while i < m && k[i] == EXP_BOUND {
            k[i] = 0;
            i += 1;
        }
        if i == m {
            return None;
        }
        k[i] += 1;
        let mut prod = BaseValue::one();
        let mut ok = true;
        for (g, &e) in gens.iter().zip(k.iter()) {
            for _ in 0..e {
                match prod.mul(g) {
                    Some(p) => prod = p,
                    None => {
                        ok = false;
                        break;
                    }
                }
            }
            if !ok {
                break;
            }
        }
        if ok && &prod == target {
            return Some(k);
        }
    }
}

/// Basis of the ideal of all polynomial relations among the closed forms,
/// over the goal symbols (parameters stay in the coefficient field).
pub fn invariant_basis(
    forms: &BTreeMap<String, ExpPoly>,
    limits: &Limits,
) -> Result<InvariantBasis> {
    let goals: Vec<String> = forms.keys().cloned().collect();
    // one fresh variable per distinct non-constant base
    let mut bases: BTreeSet<BaseValue> = BTreeSet::new();
    let mut radicand: Option<BigInt> = None;
    for e in forms.values() {
        for (b, cs) in &e.terms {
            if !b.is_one() && !b.is_zero() {
                bases.insert(b.clone());
            }
            if let Some(d) = b.radicand() {
                radicand = Some(d.clone());
            }
            for c in cs {
                if !Field::is_zero(&c.b) {
                    radicand = Some(c.d.clone());
                }
            }
        }
    }
    // bases that are products of powers of smaller bases reuse their
    // variables, which keeps the elimination small: 4^n becomes e^2 for the
    // variable e of 2^n rather than a fresh unknown
    let mut ordered: Vec<BaseValue> = bases.iter().cloned().collect();
    ordered.sort_by_key(base_size);
    let mut generators_b: Vec<BaseValue> = Vec::new();
    let mut exponents: BTreeMap<BaseValue, Vec<u32>> = BTreeMap::new();
    for b in ordered {
        match decompose_base(&b, &generators_b) {
            Some(k) => {
                exponents.insert(b, k);
            }
            None => {
                let mut unit = vec![0u32; generators_b.len() + 1];
                *unit.last_mut().unwrap() = 1;
                generators_b.push(b.clone());
                exponents.insert(b, unit);
            }
        }
    }
    let var_of = |i: usize| format!("{}{}", EXP_VAR_PREFIX, i);
    let exp_vars: BTreeMap<BaseValue, PPoly> = exponents
        .iter()
        .map(|(b, k)| {
            let mut m: PPoly = MPoly::one();
            for (i, &e) in k.iter().enumerate() {
                if e > 0 {
                    m = m.mul(&MPoly::var_pow(&var_of(i), e));
                }
            }
            (b.clone(), m)
        })
        .collect();

    let mut gens: Vec<PPoly> = Vec::new();
    for (g, e) in forms {
        let p = polynomialize(e, &exp_vars)?;
        gens.push(MPoly::<Coeff>::var(g).sub(&p));
    }
    let named: Vec<(String, BaseValue)> = generators_b
        .iter()
        .enumerate()
        .map(|(i, b)| (var_of(i), b.clone()))
        .collect();
    gens.extend(mult_relations(&named, limits)?);
    if let Some(d) = &radicand {
        let d_const: PPoly = MPoly::constant(Field::from_rat(&BigRational::from_integer(
            d.clone(),
        )));
        gens.push(MPoly::<Coeff>::var_pow(SURD_VAR, 2).sub(&d_const));
    }

    let mut kill: Vec<String> = vec!["n".to_string()];
    kill.extend((0..generators_b.len()).map(var_of));
    if radicand.is_some() {
        kill.push(SURD_VAR.to_string());
    }
    let generators = eliminate_vars(&gens, &kill, &goals, limits)?;
    Ok(InvariantBasis { goals, generators })
}

/// Whether the candidate polynomial lies in the ideal of the basis.
pub fn membership_check(candidate: &PPoly, basis: &InvariantBasis) -> bool {
    let prec: Vec<&str> = basis.goals.iter().map(|s| s.as_str()).collect();
    let order = MonomialOrder::lex(&prec);
    in_ideal(candidate, &basis.generators, &order)
}

/// Substitute closed forms for the goal symbols of a generator: the result
/// must be the zero closed form for a sound invariant.
pub fn eval_at_forms(p: &PPoly, forms: &BTreeMap<String, ExpPoly>) -> ExpPoly {
    use crate::moments::Ring;
    let vars = p.vars().to_vec();
    let mut acc = ExpPoly::zero();
    for (exps, c) in p.terms() {
        let mut term = ExpPoly::constant(Surd::pure(c.clone()));
        for (i, &e) in exps.iter().enumerate() {
            if e == 0 {
                continue;
            }
            let f = forms
                .get(&vars[i])
                .cloned()
                .unwrap_or_else(|| ExpPoly::from_coeff(&Coeff::param(&vars[i])));
            term = term.mul(&Ring::pow(&f, e));
        }
        acc = acc.add(&term);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }
    fn sc(n: i64, d: i64) -> SurdCoeff {
        Surd::pure(<Coeff as Field>::from_rat(&q(n, d)))
    }
    fn named(vals: &[(&str, BaseValue)]) -> Vec<(String, BaseValue)> {
        vals.iter().map(|(n, b)| (n.to_string(), b.clone())).collect()
    }

    #[test]
    fn powers_of_two_and_four() {
        let bases = named(&[
            ("a", BaseValue::Rat(q(2, 1))),
            ("b", BaseValue::Rat(q(4, 1))),
        ]);
        let rels = mult_relations(&bases, &Limits::default()).unwrap();
        let want: PPoly = MPoly::var_pow("a", 2).sub(&MPoly::var("b"));
        assert!(rels.iter().any(|r| r == &want || r == &want.neg()));
    }

    #[test]
    fn product_collapsing_to_one() {
        let bases = named(&[
            ("a", BaseValue::Rat(q(2, 1))),
            ("b", BaseValue::Rat(q(1, 4))),
            ("c", BaseValue::Rat(q(1, 6))),
        ]);
        let rels = mult_relations(&bases, &Limits::default()).unwrap();
        // 2^2 * (1/4) = 1
        let want: PPoly = MPoly::var_pow("a", 2)
            .mul(&MPoly::var("b"))
            .sub(&MPoly::one());
        assert!(rels.iter().any(|r| r == &want || r == &want.neg()));
    }

    #[test]
    fn sign_relations_among_negatives() {
        let bases = named(&[("c", BaseValue::Rat(q(-1, 1)))]);
        let rels = mult_relations(&bases, &Limits::default()).unwrap();
        let want: PPoly = MPoly::var_pow("c", 2).sub(&MPoly::one());
        assert!(rels.iter().any(|r| r == &want || r == &want.neg()));
    }

    #[test]
    fn golden_ratio_relations() {
        let phi = BaseValue::Surd(Surd::new(q(1, 2), q(1, 2), BigInt::from(5)));
        let psi = BaseValue::Surd(Surd::new(q(1, 2), q(-1, 2), BigInt::from(5)));
        let bases = named(&[
            ("f", phi),
            ("g", psi),
            ("c", BaseValue::Rat(q(-1, 1))),
        ]);
        let rels = mult_relations(&bases, &Limits::default()).unwrap();
        // phi * psi = -1, so f g c = 1; and c^2 = 1
        let prod: PPoly = MPoly::var("f")
            .mul(&MPoly::var("g"))
            .mul(&MPoly::var("c"))
            .sub(&MPoly::one());
        let sq: PPoly = MPoly::var_pow("c", 2).sub(&MPoly::one());
        assert!(rels.iter().any(|r| r == &prod || r == &prod.neg()));
        assert!(rels.iter().any(|r| r == &sq || r == &sq.neg()));
    }

    fn poly_form(coeffs: &[(i64, i64)]) -> ExpPoly {
        // polynomial in n with rational coefficients, base 1
        ExpPoly::term(
            BaseValue::one(),
            coeffs.iter().map(|&(n, d)| sc(n, d)).collect(),
        )
    }

    #[test]
    fn cubic_relation_between_polynomials() {
        // x = n^2 - 1, y = n^3 + n
        let mut forms = BTreeMap::new();
        forms.insert("x".to_string(), poly_form(&[(-1, 1), (0, 1), (1, 1)]));
        forms.insert("y".to_string(), poly_form(&[(0, 1), (1, 1), (0, 1), (1, 1)]));
        let basis = invariant_basis(&forms, &Limits::default()).unwrap();
        assert_eq!(basis.generators.len(), 1);
        let order = MonomialOrder::lex(&["x", "y"]);
        assert_eq!(
            basis.generators[0].to_string_ordered(&order),
            "x**3 + 5*x**2 + 8*x - y**2 + 4"
        );
        for g in &basis.generators {
            assert!(eval_at_forms(g, &forms).is_zero());
        }
    }

    #[test]
    fn exponential_square_relation() {
        // x = n 2^n, y = n^2 4^n gives x^2 = y
        let mut forms = BTreeMap::new();
        forms.insert(
            "x".to_string(),
            ExpPoly::term(BaseValue::Rat(q(2, 1)), vec![sc(0, 1), sc(1, 1)]),
        );
        forms.insert(
            "y".to_string(),
            ExpPoly::term(BaseValue::Rat(q(4, 1)), vec![sc(0, 1), sc(0, 1), sc(1, 1)]),
        );
        let basis = invariant_basis(&forms, &Limits::default()).unwrap();
        let want: PPoly = MPoly::var_pow("x", 2).sub(&MPoly::var("y"));
        assert_eq!(basis.generators.len(), 1);
        let g = &basis.generators[0];
        assert!(g == &want || g == &want.neg());
    }

    #[test]
    fn stopping_time_relation() {
        // count = 2 - 2 (1/2)^n, stop = 1 - (1/2)^n
        let mut forms = BTreeMap::new();
        forms.insert(
            "count".to_string(),
            ExpPoly::constant(sc(2, 1))
                .add(&ExpPoly::term(BaseValue::Rat(q(1, 2)), vec![sc(-2, 1)])),
        );
        forms.insert(
            "stop".to_string(),
            ExpPoly::constant(sc(1, 1))
                .add(&ExpPoly::term(BaseValue::Rat(q(1, 2)), vec![sc(-1, 1)])),
        );
        let basis = invariant_basis(&forms, &Limits::default()).unwrap();
        let want: PPoly = MPoly::var("count").sub(&MPoly::var("stop").scale(
            &<Coeff as Field>::from_int(2),
        ));
        assert!(membership_check(&want, &basis));
        let not: PPoly = MPoly::var("count").sub(&MPoly::var("stop"));
        assert!(!membership_check(&not, &basis));
    }

    #[test]
    fn fibonacci_defining_relation() {
        // a = F_n, b = F_{n+1}, c = F_{n+2} through the surd closed form
        let phi = Surd::new(q(1, 2), q(1, 2), BigInt::from(5));
        let psi = Surd::new(q(1, 2), q(-1, 2), BigInt::from(5));
        let inv_sqrt5: SurdCoeff = Surd {
            a: <Coeff as Field>::zero(),
            b: <Coeff as Field>::from_rat(&q(1, 5)),
            d: BigInt::from(5),
        };
        let fib = |shift: u32| -> ExpPoly {
            let lift = |s: &crate::algebra::QuadraticSurd| -> SurdCoeff {
                Surd {
                    a: <Coeff as Field>::from_rat(&s.a),
                    b: <Coeff as Field>::from_rat(&s.b),
                    d: s.d.clone(),
                }
            };
            let cp: SurdCoeff = lift(&Field::pow(&phi, shift)).mul(&inv_sqrt5);
            let cm: SurdCoeff = lift(&Field::pow(&psi, shift)).mul(&inv_sqrt5).neg();
            ExpPoly::term(BaseValue::from_surd(phi.clone()), vec![cp])
                .add(&ExpPoly::term(BaseValue::from_surd(psi.clone()), vec![cm]))
        };
        let mut forms = BTreeMap::new();
        forms.insert("a".to_string(), fib(0));
        forms.insert("b".to_string(), fib(1));
        forms.insert("c".to_string(), fib(2));
        // sanity: the closed form really is Fibonacci
        assert_eq!(forms["a"].evaluate_at(10), sc(55, 1));
        assert_eq!(forms["c"].evaluate_at(3), sc(5, 1));
        let basis = invariant_basis(&forms, &Limits::default()).unwrap();
        let want: PPoly = MPoly::var("a").add(&MPoly::var("b")).sub(&MPoly::var("c"));
        assert!(membership_check(&want, &basis));
        for g in &basis.generators {
            assert!(eval_at_forms(g, &forms).is_zero(), "generator {} not sound", g);
        }
    }

    #[test]
    fn transient_forms_are_rejected() {
        let mut forms = BTreeMap::new();
        forms.insert(
            "x".to_string(),
            ExpPoly::term(BaseValue::zero(), vec![sc(3, 1)]),
        );
        assert!(matches!(
            invariant_basis(&forms, &Limits::default()),
            Err(Error::Invalid(_))
        ));
    }
}
