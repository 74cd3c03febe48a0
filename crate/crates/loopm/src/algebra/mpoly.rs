//! Sparse multivariate polynomials over an arbitrary coefficient field.
//!
//! Representation: sorted variable list plus a map from exponent vectors to
//! nonzero coefficients. The variable list is kept minimal (every stored
//! variable occurs somewhere), which makes structural equality canonical.

use super::field::Field;
use num_rational::BigRational;
use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

pub type Exponents = Vec<u32>;

#[derive(Clone, Debug, PartialEq)]
pub struct MPoly<K> {
    vars: Arc<Vec<String>>,
    terms: BTreeMap<Exponents, K>,
}

/// Monomial comparison used by Gröbner bases and canonical printing.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OrderKind {
    Lex,
    DegRevLex,
}

/// A total monomial order: kind plus variable precedence (highest first).
/// Variables not listed rank below all listed ones, in name order.
#[derive(Clone, Debug)]
pub struct MonomialOrder {
    pub kind: OrderKind,
    pub precedence: Vec<String>,
}

impl MonomialOrder {
    pub fn lex(precedence: &[&str]) -> Self {
        MonomialOrder {
            kind: OrderKind::Lex,
            precedence: precedence.iter().map(|s| s.to_string()).collect(),
        }
    }

    pub fn degrevlex() -> Self {
        MonomialOrder {
            kind: OrderKind::DegRevLex,
            precedence: Vec::new(),
        }
    }

    /// Precedence-ordered storage indices for a given variable list:
    /// listed variables first, the rest in name order.
    fn index_order(&self, vars: &[String]) -> Vec<usize> {
        let mut order: Vec<usize> = Vec::new();
        for name in &self.precedence {
            if let Some(i) = vars.iter().position(|v| v == name) {
                order.push(i);
            }
        }
        for (i, _) in vars.iter().enumerate() {
            if !order.contains(&i) {
                order.push(i);
            }
        }
        order
    }

    pub fn compare(&self, vars: &[String], a: &[u32], b: &[u32]) -> Ordering {
        let idx = self.index_order(vars);
        match self.kind {
            OrderKind::Lex => {
                for &i in &idx {
                    match a[i].cmp(&b[i]) {
                        Ordering::Equal => continue,
                        ord => return ord,
                    }
                }
                Ordering::Equal
            }
            OrderKind::DegRevLex => {
                let da: u32 = a.iter().sum();
                let db: u32 = b.iter().sum();
                match da.cmp(&db) {
                    Ordering::Equal => {}
                    ord => return ord,
                }
                for &i in idx.iter().rev() {
                    match a[i].cmp(&b[i]) {
                        Ordering::Equal => continue,
                        // smaller exponent in the least significant place wins
                        ord => return ord.reverse(),
                    }
                }
                Ordering::Equal
            }
        }
    }
}

impl<K: Field> MPoly<K> {
    pub fn zero() -> Self {
        MPoly {
            vars: Arc::new(Vec::new()),
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(c: K) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(Vec::new(), c);
        }
        MPoly {
            vars: Arc::new(Vec::new()),
            terms,
        }
    }

    pub fn one() -> Self {
        Self::constant(K::one())
    }

    pub fn from_int(n: i64) -> Self {
        Self::constant(K::from_int(n))
    }

    pub fn var(name: &str) -> Self {
        Self::var_pow(name, 1)
    }

    pub fn var_pow(name: &str, e: u32) -> Self {
        if e == 0 {
            return Self::one();
        }
        let mut terms = BTreeMap::new();
        terms.insert(vec![e], K::one());
        MPoly {
            vars: Arc::new(vec![name.to_string()]),
            terms,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.vars.is_empty()
    }

    pub fn as_constant(&self) -> Option<K> {
        if self.terms.is_empty() {
            Some(K::zero())
        } else if self.vars.is_empty() {
            self.terms.get(&Vec::new()).cloned()
        } else {
            None
        }
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponents, &K)> {
        self.terms.iter()
    }

    pub fn total_degree(&self) -> u32 {
        self.terms
            .keys()
            .map(|e| e.iter().sum())
            .max()
            .unwrap_or(0)
    }

    pub fn degree_in(&self, var: &str) -> u32 {
        match self.vars.iter().position(|v| v == var) {
            None => 0,
            Some(i) => self.terms.keys().map(|e| e[i]).max().unwrap_or(0),
        }
    }

    pub fn contains_var(&self, var: &str) -> bool {
        self.degree_in(var) > 0
    }

    /// Rebuild in canonical form: drop zero coefficients and unused variables.
    fn normalized(vars: Arc<Vec<String>>, terms: BTreeMap<Exponents, K>) -> Self {
        let terms: BTreeMap<Exponents, K> =
            terms.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        if terms.is_empty() {
            return Self::zero();
        }
        let n = vars.len();
        let mut used = vec![false; n];
        for e in terms.keys() {
            for (i, &x) in e.iter().enumerate() {
                if x > 0 {
                    used[i] = true;
                }
            }
        }
        if used.iter().all(|&u| u) {
            return MPoly { vars, terms };
        }
        let keep: Vec<usize> = (0..n).filter(|&i| used[i]).collect();
        let new_vars: Vec<String> = keep.iter().map(|&i| vars[i].clone()).collect();
        let new_terms = terms
            .into_iter()
            .map(|(e, c)| (keep.iter().map(|&i| e[i]).collect(), c))
            .collect();
        MPoly {
            vars: Arc::new(new_vars),
            terms: new_terms,
        }
    }

    /// Remap both operands onto the union of their variable lists.
    fn unify(&self, other: &Self) -> (Arc<Vec<String>>, Vec<(Exponents, K)>, Vec<(Exponents, K)>) {
        if self.vars == other.vars {
            return (
                self.vars.clone(),
                self.terms.iter().map(|(e, c)| (e.clone(), c.clone())).collect(),
                other.terms.iter().map(|(e, c)| (e.clone(), c.clone())).collect(),
            );
        }
        let mut union: Vec<String> = self.vars.iter().cloned().collect();
        for v in other.vars.iter() {
            if !union.contains(v) {
                union.push(v.clone());
            }
        }
        union.sort();
        let remap = |vars: &[String], terms: &BTreeMap<Exponents, K>| -> Vec<(Exponents, K)> {
            let idx: Vec<usize> = vars
                .iter()
                .map(|v| union.iter().position(|u| u == v).unwrap())
                .collect();
            terms
                .iter()
                .map(|(e, c)| {
                    let mut ne = vec![0u32; union.len()];
                    for (j, &x) in e.iter().enumerate() {
                        ne[idx[j]] = x;
                    }
                    (ne, c.clone())
                })
                .collect()
        };
        let a = remap(&self.vars, &self.terms);
        let b = remap(&other.vars, &other.terms);
        (Arc::new(union), a, b)
    }

    pub fn add(&self, other: &Self) -> Self {
        let (vars, a, b) = self.unify(other);
        let mut terms: BTreeMap<Exponents, K> = a.into_iter().collect();
        for (e, c) in b {
            match terms.get_mut(&e) {
                Some(x) => *x = x.add(&c),
                None => {
                    terms.insert(e, c);
                }
            }
        }
        Self::normalized(vars, terms)
    }

    pub fn neg(&self) -> Self {
        MPoly {
            vars: self.vars.clone(),
            terms: self.terms.iter().map(|(e, c)| (e.clone(), c.neg())).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn scale(&self, k: &K) -> Self {
        if k.is_zero() {
            return Self::zero();
        }
        MPoly {
            vars: self.vars.clone(),
            terms: self
                .terms
                .iter()
                .map(|(e, c)| (e.clone(), c.mul(k)))
                .collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let (vars, a, b) = self.unify(other);
        let mut terms: BTreeMap<Exponents, K> = BTreeMap::new();
        for (ea, ca) in &a {
            for (eb, cb) in &b {
                let e: Exponents = ea.iter().zip(eb.iter()).map(|(x, y)| x + y).collect();
                let c = ca.mul(cb);
                match terms.get_mut(&e) {
                    Some(x) => *x = x.add(&c),
                    None => {
                        terms.insert(e, c);
                    }
                }
            }
        }
        Self::normalized(vars, terms)
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Self::one();
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        acc
    }

    /// Multiply by a single term `c * x^e` given on this polynomial's vars.
    pub fn mul_term(&self, exps: &[u32], c: &K) -> Self {
        assert_eq!(exps.len(), self.vars.len());
        let terms = self
            .terms
            .iter()
            .map(|(e, k)| {
                (
                    e.iter().zip(exps.iter()).map(|(a, b)| a + b).collect(),
                    k.mul(c),
                )
            })
            .collect();
        Self::normalized(self.vars.clone(), terms)
    }

    /// Simultaneous substitution of variables by polynomials.
    pub fn substitute(&self, map: &BTreeMap<String, MPoly<K>>) -> Self {
        if self.vars.iter().all(|v| !map.contains_key(v)) {
            return self.clone();
        }
        let mut result = Self::zero();
        for (e, c) in &self.terms {
            let mut term = Self::constant(c.clone());
            for (i, &exp) in e.iter().enumerate() {
                if exp == 0 {
                    continue;
                }
                let v = &self.vars[i];
                let factor = match map.get(v) {
                    Some(p) => p.pow(exp),
                    None => Self::var_pow(v, exp),
                };
                term = term.mul(&factor);
            }
            result = result.add(&term);
        }
        result
    }

    /// Substitute a single variable.
    pub fn substitute_var(&self, var: &str, value: &MPoly<K>) -> Self {
        let mut map = BTreeMap::new();
        map.insert(var.to_string(), value.clone());
        self.substitute(&map)
    }

    /// Full evaluation; every occurring variable must be bound.
    pub fn eval(&self, bindings: &BTreeMap<String, K>) -> Option<K> {
        let mut acc = K::zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for (i, &exp) in e.iter().enumerate() {
                if exp == 0 {
                    continue;
                }
                let v = bindings.get(&self.vars[i])?;
                t = t.mul(&v.pow(exp));
            }
            acc = acc.add(&t);
        }
        Some(acc)
    }

    /// View as univariate in `var`: coefficient polynomials by ascending power.
    pub fn univariate_in(&self, var: &str) -> Vec<MPoly<K>> {
        let deg = self.degree_in(var);
        let mut coeffs = vec![Self::zero(); (deg + 1) as usize];
        let pos = self.vars.iter().position(|v| v == var);
        for (e, c) in &self.terms {
            let (k, rest_exps): (u32, Exponents) = match pos {
                None => (0, e.clone()),
                Some(i) => {
                    let mut rest = e.clone();
                    let k = rest[i];
                    rest[i] = 0;
                    (k, rest)
                }
            };
            let term = Self::normalized(
                self.vars.clone(),
                [(rest_exps, c.clone())].into_iter().collect(),
            );
            coeffs[k as usize] = coeffs[k as usize].add(&term);
        }
        coeffs
    }

    pub fn derivative(&self, var: &str) -> Self {
        let pos = match self.vars.iter().position(|v| v == var) {
            None => return Self::zero(),
            Some(i) => i,
        };
        let mut terms = BTreeMap::new();
        for (e, c) in &self.terms {
            if e[pos] == 0 {
                continue;
            }
            let mut ne = e.clone();
            ne[pos] -= 1;
            let nc = c.mul(&K::from_int(e[pos] as i64));
            let entry = terms.entry(ne).or_insert_with(K::zero);
            *entry = entry.add(&nc);
        }
        Self::normalized(self.vars.clone(), terms)
    }

    /// Leading (exponents, coefficient) with respect to `order`.
    pub fn leading(&self, order: &MonomialOrder) -> Option<(Exponents, K)> {
        self.terms
            .iter()
            .max_by(|(a, _), (b, _)| order.compare(&self.vars, a, b))
            .map(|(e, c)| (e.clone(), c.clone()))
    }

    /// Divide every coefficient by the leading coefficient.
    pub fn monic(&self, order: &MonomialOrder) -> Self {
        match self.leading(order) {
            None => self.clone(),
            Some((_, lc)) => {
                if lc.is_one() {
                    self.clone()
                } else {
                    self.scale(&lc.inv())
                }
            }
        }
    }

    /// Exponents of `var` present in this polynomial (for power rewriting).
    pub fn exponents_of(&self, var: &str) -> BTreeSet<u32> {
        match self.vars.iter().position(|v| v == var) {
            None => BTreeSet::new(),
            Some(i) => self.terms.keys().map(|e| e[i]).filter(|&x| x > 0).collect(),
        }
    }

    /// Map coefficients into another field.
    pub fn map_coeffs<L: Field>(&self, f: impl Fn(&K) -> L) -> MPoly<L> {
        MPoly::<L>::normalized(
            self.vars.clone(),
            self.terms.iter().map(|(e, c)| (e.clone(), f(c))).collect(),
        )
    }

    /// Terms sorted descending by `order`, for deterministic printing.
    pub fn sorted_terms(&self, order: &MonomialOrder) -> Vec<(Exponents, K)> {
        let mut ts: Vec<(Exponents, K)> =
            self.terms.iter().map(|(e, c)| (e.clone(), c.clone())).collect();
        ts.sort_by(|(a, _), (b, _)| order.compare(&self.vars, b, a));
        ts
    }

    pub fn monomial_string(&self, exps: &[u32]) -> String {
        let mut parts = Vec::new();
        for (i, &e) in exps.iter().enumerate() {
            if e == 1 {
                parts.push(self.vars[i].clone());
            } else if e > 1 {
                parts.push(format!("{}**{}", self.vars[i], e));
            }
        }
        parts.join("*")
    }

    pub fn to_string_ordered(&self, order: &MonomialOrder) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (i, (exps, coeff)) in self.sorted_terms(order).into_iter().enumerate() {
            let mono = self.monomial_string(&exps);
            let (sign, coeff) = match coeff.neg_for_display() {
                Some(c) => ("-", c),
                None => ("+", coeff),
            };
            if i == 0 {
                if sign == "-" {
                    out.push_str("-");
                }
            } else {
                out.push_str(if sign == "-" { " - " } else { " + " });
            }
            let coeff_str = coeff.to_string();
            let atomic = !(coeff_str.contains('+')
                || coeff_str[1..].contains('-')
                || coeff_str.contains(' '));
            if mono.is_empty() {
                if atomic {
                    out.push_str(&coeff_str);
                } else {
                    out.push_str(&format!("({})", coeff_str));
                }
            } else if coeff.is_one() {
                out.push_str(&mono);
            } else if atomic {
                out.push_str(&format!("{}*{}", coeff_str, mono));
            } else {
                out.push_str(&format!("({})*{}", coeff_str, mono));
            }
        }
        out
    }
}

impl<K: Field> fmt::Display for MPoly<K> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // default printing: lex with natural (sorted-name) precedence
        write!(f, "{}", self.to_string_ordered(&MonomialOrder::lex(&[])))
    }
}

// ---------------------------------------------------------------------------
// GCD over Q (used to reduce rational functions in parameters)
// ---------------------------------------------------------------------------

pub type QPoly = MPoly<BigRational>;

impl MPoly<BigRational> {
    /// Rational content: gcd of numerators over lcm of denominators, signed
    /// to make the lex-leading coefficient positive.
    fn content(&self) -> BigRational {
        use num_bigint::BigInt;
        use num_integer::Integer;
        use num_traits::{One, Signed, Zero};
        if self.is_zero() {
            return BigRational::from_integer(BigInt::from(0));
        }
        let mut num_gcd = BigInt::from(0);
        let mut den_lcm = BigInt::from(1);
        for c in self.terms.values() {
            num_gcd = num_gcd.gcd(c.numer());
            den_lcm = den_lcm.lcm(c.denom());
        }
        if num_gcd.is_zero() {
            num_gcd = BigInt::one();
        }
        let mut content = BigRational::new(num_gcd, den_lcm);
        // sign from the lex-leading coefficient
        let order = MonomialOrder::lex(&[]);
        if let Some((_, lc)) = self.leading(&order) {
            if lc.is_negative() {
                content = -content;
            }
        }
        content
    }

    /// Primitive part: divide out the rational content.
    pub fn primitive(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let c = self.content();
        self.scale(&c.recip())
    }

    /// Exact division; panics if `div` does not divide `self`.
    pub fn div_exact(&self, div: &Self) -> Self {
        let (q, r) = self.div_rem_lex(div);
        assert!(r.is_zero(), "inexact polynomial division");
        q
    }

    /// Division with remainder with respect to plain lex order.
    pub fn div_rem_lex(&self, div: &Self) -> (Self, Self) {
        assert!(!div.is_zero(), "division by zero polynomial");
        let order = MonomialOrder::lex(&[]);
        let mut quot = Self::zero();
        let mut rem = Self::zero();
        let mut p = self.clone();
        while !p.is_zero() {
            // put both on the same variable list so exponent vectors align
            let (vars, pa, da) = p.unify(div);
            let max_of = |ts: &[(Exponents, BigRational)]| {
                ts.iter()
                    .max_by(|(a, _), (b, _)| order.compare(&vars, a, b))
                    .map(|(e, c)| (e.clone(), c.clone()))
                    .unwrap()
            };
            let (pl, plc) = max_of(&pa);
            let (dl, dlc) = max_of(&da);
            if pl.iter().zip(dl.iter()).all(|(a, b)| a >= b) {
                let qe: Exponents = pl.iter().zip(dl.iter()).map(|(a, b)| a - b).collect();
                let qterm = Self::normalized(
                    vars.clone(),
                    [(qe, plc / dlc)].into_iter().collect(),
                );
                quot = quot.add(&qterm);
                p = p.sub(&qterm.mul(div));
            } else {
                // move leading term to remainder
                let lead_term =
                    Self::normalized(vars.clone(), [(pl, plc)].into_iter().collect());
                rem = rem.add(&lead_term);
                p = p.sub(&lead_term);
            }
        }
        (quot, rem)
    }

    /// Multivariate gcd via primitive pseudo-remainder sequences.
    /// Result is primitive with positive leading coefficient.
    pub fn gcd(a: &Self, b: &Self) -> Self {
        if a.is_zero() {
            return b.primitive();
        }
        if b.is_zero() {
            return a.primitive();
        }
        if a.is_constant() || b.is_constant() {
            return Self::one();
        }
        // main variable: first of the union
        let var = {
            let mut vs: Vec<&String> = a.vars.iter().chain(b.vars.iter()).collect();
            vs.sort();
            vs[0].clone()
        };
        if !a.contains_var(&var) || !b.contains_var(&var) {
            // main var missing from one side: gcd divides both contents w.r.t. var
            let ca = Self::poly_content(a, &var);
            let cb = Self::poly_content(b, &var);
            return Self::gcd(&ca, &cb);
        }
        let ca = Self::poly_content(a, &var);
        let cb = Self::poly_content(b, &var);
        let cont = Self::gcd(&ca, &cb);
        let mut f = a.div_exact(&ca);
        let mut g = b.div_exact(&cb);
        if f.degree_in(&var) < g.degree_in(&var) {
            std::mem::swap(&mut f, &mut g);
        }
        loop {
            if g.is_zero() {
                break;
            }
            if !g.contains_var(&var) {
                // nontrivial gcd must be free of var; primitive parts are coprime
                return cont;
            }
            let r = Self::pseudo_rem(&f, &g, &var);
            f = g;
            g = if r.is_zero() {
                r
            } else {
                let c = Self::poly_content(&r, &var);
                r.div_exact(&c)
            };
        }
        cont.mul(&f.primitive()).primitive()
    }

    /// Content with respect to `var`: gcd of the univariate coefficients.
    fn poly_content(p: &Self, var: &str) -> Self {
        let coeffs = p.univariate_in(var);
        let mut acc = Self::zero();
        for c in coeffs {
            if !c.is_zero() {
                acc = Self::gcd(&acc, &c);
            }
        }
        if acc.is_zero() {
            Self::one()
        } else {
            acc
        }
    }

    /// Pseudo-remainder of `f` by `g` in `var`.
    fn pseudo_rem(f: &Self, g: &Self, var: &str) -> Self {
        let dg = g.degree_in(var);
        let g_coeffs = g.univariate_in(var);
        let lcg = g_coeffs[dg as usize].clone();
        let mut r = f.clone();
        while !r.is_zero() && r.degree_in(var) >= dg {
            let dr = r.degree_in(var);
            let r_coeffs = r.univariate_in(var);
            let lcr = r_coeffs[dr as usize].clone();
            // r := lcg * r - lcr * x^(dr-dg) * g
            let shift = MPoly::var_pow(var, dr - dg);
            r = r.mul(&lcg).sub(&lcr.mul(&shift).mul(g));
        }
        r
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    fn q(n: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(n))
    }

    fn x() -> QPoly {
        MPoly::var("x")
    }
    fn y() -> QPoly {
        MPoly::var("y")
    }

    #[test]
    fn ring_ops() {
        let p = x().add(&y()).pow(2);
        let expect = x()
            .pow(2)
            .add(&x().mul(&y()).scale(&q(2)))
            .add(&y().pow(2));
        assert_eq!(p, expect);
        assert_eq!(p.sub(&p), MPoly::zero());
        assert_eq!(p.total_degree(), 2);
    }

    #[test]
    fn unused_vars_trimmed() {
        let p = x().add(&y()).sub(&y());
        assert_eq!(p, x());
        assert_eq!(p.vars(), &["x".to_string()]);
    }

    #[test]
    fn substitution() {
        // (x + y) with x -> y^2 gives y^2 + y
        let p = x().add(&y());
        let s = p.substitute_var("x", &y().pow(2));
        assert_eq!(s, y().pow(2).add(&y()));
    }

    #[test]
    fn division_and_gcd() {
        // gcd(x^2 - 1, x - 1) = x - 1
        let a = x().pow(2).sub(&MPoly::one());
        let b = x().sub(&MPoly::one());
        assert_eq!(QPoly::gcd(&a, &b), b);

        // gcd((x+y)^2 * x, (x+y) * y) = x + y
        let s = x().add(&y());
        let a = s.pow(2).mul(&x());
        let b = s.mul(&y());
        assert_eq!(QPoly::gcd(&a, &b), s);
    }

    #[test]
    fn degrevlex_vs_lex_leading() {
        // p = x*y^2 + x^2: lex(x>y) leads with x^2, degrevlex leads with x*y^2
        let p = x().mul(&y().pow(2)).add(&x().pow(2));
        let lex = MonomialOrder::lex(&["x", "y"]);
        let (e, _) = p.leading(&lex).unwrap();
        assert_eq!(p.monomial_string(&e), "x**2");
        let drl = MonomialOrder::degrevlex();
        let (e, _) = p.leading(&drl).unwrap();
        assert_eq!(p.monomial_string(&e), "x*y**2");
    }

    #[test]
    fn display_canonical() {
        let p = x().pow(3).scale(&q(1)).add(&x().scale(&q(-2))).add(&MPoly::constant(q(4)));
        assert_eq!(p.to_string(), "x**3 - 2*x + 4");
    }
}
