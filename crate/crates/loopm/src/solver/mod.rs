//! Closed-form solver for linear recurrence systems with constant
//! coefficients: computes eigenvalues of the (reachable part of the) system
//! matrix, then fits an exponential-polynomial ansatz to exactly computed
//! iterates. Supports rational eigenvalues, real quadratic surds, and
//! parameter-valued eigenvalues coming from one-dimensional blocks.

mod exppoly;

pub use exppoly::{BaseValue, ExpPoly};

use crate::algebra::{solve_linear, Coeff, Field, LinSolve, QuadraticSurd, Surd, SurdCoeff};
use crate::error::{Error, Result};
use crate::limits::Limits;
use crate::recurrences::{Monom, RecurrenceSystem};
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::collections::BTreeMap;

/// Univariate polynomial over the rationals, coefficients by ascending power.
pub(crate) type UPoly = Vec<BigRational>;

fn rat0() -> BigRational {
    Zero::zero()
}
fn rat1() -> BigRational {
    One::one()
}
fn is_rz(r: &BigRational) -> bool {
    Zero::is_zero(r)
}
fn is_ro(r: &BigRational) -> bool {
    One::is_one(r)
}

const TRIAL_DIVISION_LIMIT: u64 = 1_000_000;
const MAX_DIVISORS: usize = 4096;
/// Bound on the coefficients tried when searching for monic integer
/// quadratic factors of a characteristic polynomial of degree three or more.
const QUAD_SEARCH_BOUND: i64 = 64;

/// Closed forms for the expected values of the target monomials.
pub fn solve(
    sys: &RecurrenceSystem,
    targets: &[Monom],
    limits: &Limits,
) -> Result<BTreeMap<Monom, ExpPoly>> {
    let target_idx: Vec<usize> = targets
        .iter()
        .map(|m| {
            sys.index_of(m)
                .ok_or_else(|| Error::Invalid(format!("monomial {} not in the system state", m)))
        })
        .collect::<Result<_>>()?;

    // restrict to the part of the state the targets depend on
    let local = reachable(sys, &target_idx);
    let k = local.len();
    let pos: BTreeMap<usize, usize> = local.iter().enumerate().map(|(i, &g)| (g, i)).collect();
    let matrix: Vec<Vec<Coeff>> = local
        .iter()
        .map(|&i| local.iter().map(|&j| sys.matrix[i][j].clone()).collect())
        .collect();
    let initial: Vec<Coeff> = local.iter().map(|&i| sys.initial[i].clone()).collect();

    let (eigen, m0) = eigenvalues(&matrix, sys, &local, limits)?;

    // at most one radicand: surd arithmetic stays in a single extension
    let mut radicand: Option<BigInt> = None;
    for b in eigen.keys() {
        if let Some(d) = b.radicand() {
            match &radicand {
                None => radicand = Some(d.clone()),
                Some(r) if r == d => {}
                Some(r) => {
                    return Err(Error::UnsupportedEigenvalue(format!(
                        "eigenvalues involve distinct radicands {} and {}",
                        r, d
                    )))
                }
            }
        }
    }

    // exact iterates of the restricted system
    let nonzero_dim: usize = eigen.values().sum();
    debug_assert_eq!(nonzero_dim + m0, k);
    let mut samples: Vec<Vec<Coeff>> = vec![initial];
    for _ in 1..k.max(1) {
        let prev = samples.last().unwrap();
        let next: Vec<Coeff> = matrix
            .iter()
            .map(|row| {
                row.iter()
                    .zip(prev.iter())
                    .fold(<Coeff as Field>::zero(), |acc, (a, x)| {
                        acc.add(&a.mul(x))
                    })
            })
            .collect();
        samples.push(next);
    }

    // basis functions n^j * lambda^n, fitted on the window past the transient
    let basis: Vec<(BaseValue, u32)> = eigen
        .iter()
        .flat_map(|(b, &mult)| (0..mult as u32).map(move |j| (b.clone(), j)))
        .collect();
    let rows: Vec<Vec<SurdCoeff>> = (m0..m0 + nonzero_dim)
        .map(|n| {
            basis
                .iter()
                .map(|(b, j)| {
                    let nj: SurdCoeff = Surd::pure(Field::pow(
                        &<Coeff as Field>::from_int(n as i64),
                        *j,
                    ));
                    b.pow_n(n as u64).mul(&nj)
                })
                .collect()
        })
        .collect();

    let mut out = BTreeMap::new();
    for (m, &gi) in targets.iter().zip(target_idx.iter()) {
        let li = pos[&gi];
        let rhs: Vec<SurdCoeff> = (m0..m0 + nonzero_dim)
            .map(|n| Surd::pure(samples[n][li].clone()))
            .collect();
        let coeffs = match solve_linear(&rows, &rhs) {
            LinSolve::Unique(c) | LinSolve::NonUnique(c) => c,
            LinSolve::NoSolution => {
                return Err(Error::Invalid(
                    "ansatz fit failed for a recurrence sequence".into(),
                ))
            }
        };
        let mut e = ExpPoly::zero();
        for ((b, j), c) in basis.iter().zip(coeffs.into_iter()) {
            if Field::is_zero(&c) {
                continue;
            }
            let mut v = vec![<SurdCoeff as Field>::zero(); *j as usize + 1];
            v[*j as usize] = c;
            e = e.add(&ExpPoly::term(b.clone(), v));
        }
        // transient steps must match up to a correction at n = 0
        for n in 0..m0 {
            let want: SurdCoeff = Surd::pure(samples[n][li].clone());
            let residual = want.sub(&e.evaluate_at(n as u64));
            if Field::is_zero(&residual) {
                continue;
            }
            if n == 0 {
                e = e.add(&ExpPoly::term(BaseValue::zero(), vec![residual]));
            } else {
                return Err(Error::TransientTooDeep);
            }
        }
        out.insert(m.clone(), e);
    }
    Ok(out)
}

/// Indices reachable from the targets along nonzero matrix entries.
fn reachable(sys: &RecurrenceSystem, targets: &[usize]) -> Vec<usize> {
    let n = sys.state.len();
    let mut seen = vec![false; n];
    let mut stack: Vec<usize> = targets.to_vec();
    while let Some(i) = stack.pop() {
        if seen[i] {
            continue;
        }
        seen[i] = true;
        for (j, c) in sys.matrix[i].iter().enumerate() {
            if !Field::is_zero(c) && !seen[j] {
                stack.push(j);
            }
        }
    }
    (0..n).filter(|&i| seen[i]).collect()
}

/// Eigenvalues with multiplicities, plus the multiplicity of zero. Works per
/// strongly connected component: the characteristic polynomial of the block
/// triangular matrix is the product over components.
fn eigenvalues(
    matrix: &[Vec<Coeff>],
    sys: &RecurrenceSystem,
    local: &[usize],
    _limits: &Limits,
) -> Result<(BTreeMap<BaseValue, usize>, usize)> {
    let mut eigen: BTreeMap<BaseValue, usize> = BTreeMap::new();
    let mut m0 = 0usize;
    for comp in sccs(matrix) {
        let param_free = comp.iter().all(|&i| {
            comp.iter()
                .all(|&j| matrix[i][j].as_rational().is_some())
        });
        if param_free {
            let block: Vec<Vec<BigRational>> = comp
                .iter()
                .map(|&i| {
                    comp.iter()
                        .map(|&j| matrix[i][j].as_rational().unwrap())
                        .collect()
                })
                .collect();
            let cp = char_poly(&block);
            let (roots, zeros) = factor_roots(cp)?;
            m0 += zeros;
            for (b, mult) in roots {
                *eigen.entry(b).or_insert(0) += mult;
            }
        } else if comp.len() == 1 {
            let c = matrix[comp[0]][comp[0]].clone();
            let b = BaseValue::from_coeff(&c);
            if b.is_zero() {
                m0 += 1;
            } else {
                *eigen.entry(b).or_insert(0) += 1;
            }
        } else {
            let names: Vec<String> = comp
                .iter()
                .map(|&i| sys.state[local[i]].to_string())
                .collect();
            return Err(Error::UnsupportedEigenvalue(format!(
                "coupled parameter-dependent block over {}",
                names.join(", ")
            )));
        }
    }
    Ok((eigen, m0))
}

/// Tarjan strongly connected components of the matrix dependency graph
/// (an edge i -> j for each nonzero entry).
fn sccs(matrix: &[Vec<Coeff>]) -> Vec<Vec<usize>> {
    let n = matrix.len();
    struct St<'a> {
        matrix: &'a [Vec<Coeff>],
        index: Vec<Option<usize>>,
        low: Vec<usize>,
        on_stack: Vec<bool>,
        stack: Vec<usize>,
        next: usize,
        out: Vec<Vec<usize>>,
    }
    fn visit(s: &mut St, v: usize) {
        s.index[v] = Some(s.next);
        s.low[v] = s.next;
        s.next += 1;
        s.stack.push(v);
        s.on_stack[v] = true;
        for w in 0..s.matrix.len() {
            if Field::is_zero(&s.matrix[v][w]) {
                continue;
            }
            match s.index[w] {
                None => {
                    visit(s, w);
                    s.low[v] = s.low[v].min(s.low[w]);
                }
                Some(iw) => {
                    if s.on_stack[w] {
                        s.low[v] = s.low[v].min(iw);
                    }
                }
            }
        }
        if s.low[v] == s.index[v].unwrap() {
            let mut comp = Vec::new();
            loop {
                let w = s.stack.pop().unwrap();
                s.on_stack[w] = false;
                comp.push(w);
                if w == v {
                    break;
                }
            }
            comp.sort_unstable();
            s.out.push(comp);
        }
    }
    let mut st = St {
        matrix,
        index: vec![None; n],
        low: vec![0; n],
        on_stack: vec![false; n],
        stack: Vec::new(),
        next: 0,
        out: Vec::new(),
    };
    for v in 0..n {
        if st.index[v].is_none() {
            visit(&mut st, v);
        }
    }
    st.out
}

/// Characteristic polynomial (monic, ascending coefficients) by the
/// Faddeev-LeVerrier recurrence, exact over the rationals.
pub(crate) fn char_poly(a: &[Vec<BigRational>]) -> UPoly {
    let k = a.len();
    let mut coeffs = vec![rat0(); k + 1];
    coeffs[k] = rat1();
    let mut m: Vec<Vec<BigRational>> = (0..k)
        .map(|i| {
            (0..k)
                .map(|j| {
                    if i == j {
                        rat1()
                    } else {
                        rat0()
                    }
                })
                .collect()
        })
        .collect();
    for j in 1..=k {
        // m <- a * m
        let prod: Vec<Vec<BigRational>> = (0..k)
            .map(|r| {
                (0..k)
                    .map(|c| {
                        (0..k)
                            .map(|t| &a[r][t] * &m[t][c])
                            .fold(rat0(), |x, y| x + y)
                    })
                    .collect()
            })
            .collect();
        m = prod;
        let tr: BigRational = (0..k).map(|i| m[i][i].clone()).sum();
        let c = -tr / BigRational::from_integer(BigInt::from(j as i64));
        coeffs[k - j] = c.clone();
        for (i, row) in m.iter_mut().enumerate() {
            row[i] += &c;
        }
    }
    coeffs
}

/// Factor a monic rational polynomial into its roots: rational roots, real
/// quadratic-surd pairs, and the multiplicity of zero. Degrees that resist
/// the rational-root and quadratic-factor searches are reported as
/// unsupported.
pub(crate) fn factor_roots(mut p: UPoly) -> Result<(BTreeMap<BaseValue, usize>, usize)> {
    let mut roots: BTreeMap<BaseValue, usize> = BTreeMap::new();
    // zero roots
    let mut zeros = 0usize;
    while p.len() > 1 && is_rz(&p[0]) {
        p.remove(0);
        zeros += 1;
    }
    // rational roots by the rational root test on the integer-scaled poly
    loop {
        if p.len() <= 1 {
            return Ok((roots, zeros));
        }
        match find_rational_root(&p) {
            Some(r) => {
                p = deflate_linear(&p, &r);
                *roots.entry(BaseValue::Rat(r)).or_insert(0) += 1;
            }
            None => break,
        }
    }
    while p.len() > 1 {
        if p.len() == 3 {
            let (r1, r2) = quadratic_roots(&p)?;
            *roots.entry(r1).or_insert(0) += 1;
            *roots.entry(r2).or_insert(0) += 1;
            return Ok((roots, zeros));
        }
        let q = find_quadratic_factor(&p).ok_or_else(|| {
            Error::UnsupportedEigenvalue(format!(
                "irreducible characteristic factor of degree {}",
                p.len() - 1
            ))
        })?;
        let (quot, rem) = poly_divmod(&p, &q);
        debug_assert!(rem.iter().all(is_rz));
        let (r1, r2) = quadratic_roots(&q)?;
        *roots.entry(r1).or_insert(0) += 1;
        *roots.entry(r2).or_insert(0) += 1;
        p = quot;
    }
    Ok((roots, zeros))
}

/// Roots of a monic quadratic with no rational roots: a conjugate pair of
/// real quadratic surds. Complex pairs are unsupported.
fn quadratic_roots(p: &UPoly) -> Result<(BaseValue, BaseValue)> {
    debug_assert_eq!(p.len(), 3);
    debug_assert!(is_ro(&p[2]));
    let b = &p[1];
    let c = &p[0];
    let four = BigRational::from_integer(4.into());
    let disc: BigRational = b * b - four * c;
    if disc <= rat0() {
        return Err(Error::UnsupportedEigenvalue(
            "complex or repeated irrational eigenvalue pair".into(),
        ));
    }
    // sqrt(num/den) = sqrt(num*den)/den
    let num = disc.numer().clone();
    let den = disc.denom().clone();
    let d = &num * &den;
    let half = BigRational::new(BigInt::from(1), BigInt::from(2));
    let a0 = -b * &half;
    let bc = BigRational::new(BigInt::from(1), BigInt::from(2) * den);
    let r1 = Surd::new(a0.clone(), bc.clone(), d.clone());
    let r2 = Surd::new(a0, -bc, d);
    Ok((BaseValue::from_surd(r1), BaseValue::from_surd(r2)))
}

fn poly_eval(p: &UPoly, x: &BigRational) -> BigRational {
    let mut acc = rat0();
    for c in p.iter().rev() {
        acc = acc * x + c;
    }
    acc
}

/// Divide by `x - r` assuming `r` is a root.
pub(crate) fn deflate_linear(p: &UPoly, r: &BigRational) -> UPoly {
    let mut out = vec![rat0(); p.len() - 1];
    let mut carry = rat0();
    for i in (0..p.len() - 1).rev() {
        carry = &p[i + 1] + r * &carry;
        out[i] = carry.clone();
    }
    out
}

/// Division with remainder by a monic divisor.
fn poly_divmod(p: &UPoly, div: &UPoly) -> (UPoly, UPoly) {
    debug_assert!(div.last().map(is_ro).unwrap_or(false));
    let mut rem = p.clone();
    let dd = div.len() - 1;
    if rem.len() <= dd {
        return (vec![rat0()], rem);
    }
    let mut quot = vec![rat0(); rem.len() - dd];
    for i in (0..quot.len()).rev() {
        let c = rem[i + dd].clone();
        if is_rz(&c) {
            continue;
        }
        quot[i] = c.clone();
        for (j, dc) in div.iter().enumerate() {
            rem[i + j] -= &c * dc;
        }
    }
    rem.truncate(dd);
    (quot, rem)
}

fn divisors(n: &BigInt) -> Vec<BigInt> {
    let mut n = n.abs();
    let mut primes: Vec<(BigInt, u32)> = Vec::new();
    let mut d = BigInt::from(2);
    let limit = BigInt::from(TRIAL_DIVISION_LIMIT);
    while &d * &d <= n && d <= limit {
        let mut e = 0;
        while (&n % &d).is_zero() {
            n /= &d;
            e += 1;
        }
        if e > 0 {
            primes.push((d.clone(), e));
        }
        d += 1;
    }
    if n > BigInt::one() {
        // no factor below the trial bound: prime, or a hard composite we
        // treat as an atom (missed roots surface as an unsupported factor)
        primes.push((n, 1));
    }
    let mut out = vec![BigInt::one()];
    for (p, e) in primes {
        let mut next = Vec::new();
        for b in &out {
            let mut pw = BigInt::one();
            for _ in 0..=e {
                next.push(b * &pw);
                pw *= &p;
                if next.len() > MAX_DIVISORS {
                    return out;
                }
            }
        }
        out = next;
    }
    out
}

/// A rational root of the polynomial, if one exists among the divisor
/// candidates.
pub(crate) fn find_rational_root(p: &UPoly) -> Option<BigRational> {
    // scale to integer coefficients
    let mut den = BigInt::one();
    for c in p {
        den = den.lcm(c.denom());
    }
    let ints: Vec<BigInt> = p.iter().map(|c| (c * BigRational::from_integer(den.clone())).to_integer()).collect();
    let a0 = ints.first()?;
    let an = ints.last()?;
    if a0.is_zero() {
        return Some(rat0());
    }
    let ps = divisors(a0);
    let qs = divisors(an);
    for num in &ps {
        for q in &qs {
            for sign in [1i64, -1] {
                let cand = BigRational::new(num * BigInt::from(sign), q.clone());
                if is_rz(&poly_eval(p, &cand)) {
                    return Some(cand);
                }
            }
        }
    }
    None
}

/// Bounded search for a monic integer quadratic factor `x^2 + b x + c`.
fn find_quadratic_factor(p: &UPoly) -> Option<UPoly> {
    if !p.iter().all(|c| c.is_integer()) {
        return None;
    }
    for b in -QUAD_SEARCH_BOUND..=QUAD_SEARCH_BOUND {
        for c in -QUAD_SEARCH_BOUND..=QUAD_SEARCH_BOUND {
            if c == 0 {
                continue;
            }
            let q: UPoly = vec![
                BigRational::from_integer(c.into()),
                BigRational::from_integer(b.into()),
                rat1(),
            ];
            let (_, rem) = poly_divmod(p, &q);
            if rem.iter().all(is_rz) {
                return Some(q);
            }
        }
    }
    None
}

/// Whether the base of a surd pair collapses: used by tests and callers that
/// need the numeric value of a closed form.
pub fn surd_to_f64(s: &QuadraticSurd) -> Option<f64> {
    let a = s.a.to_f64()?;
    let b = s.b.to_f64()?;
    let d = s.d.to_f64()?;
    Some(a + b * d.sqrt())
}
