//! Buchberger's algorithm, normal forms, ideal membership, and lex-order
//! variable elimination.

use super::field::Field;
use super::mpoly::{MonomialOrder, MPoly};
use crate::error::{Error, Result};
use crate::limits::Limits;
use std::collections::BTreeMap;

/// Named exponent map of a monomial (variable -> exponent, no zeros).
pub type NamedMono = BTreeMap<String, u32>;

fn lead_named<K: Field>(p: &MPoly<K>, order: &MonomialOrder) -> Option<(NamedMono, K)> {
    let (exps, c) = p.leading(order)?;
    let mut m = NamedMono::new();
    for (i, &e) in exps.iter().enumerate() {
        if e > 0 {
            m.insert(p.vars()[i].clone(), e);
        }
    }
    Some((m, c))
}

fn mono_divides(a: &NamedMono, b: &NamedMono) -> bool {
    a.iter().all(|(v, &e)| b.get(v).copied().unwrap_or(0) >= e)
}

fn mono_div(a: &NamedMono, b: &NamedMono) -> NamedMono {
    let mut out = NamedMono::new();
    for (v, &e) in a {
        let d = e - b.get(v).copied().unwrap_or(0);
        if d > 0 {
            out.insert(v.clone(), d);
        }
    }
    out
}

fn mono_lcm(a: &NamedMono, b: &NamedMono) -> NamedMono {
    let mut out = a.clone();
    for (v, &e) in b {
        let cur = out.entry(v.clone()).or_insert(0);
        *cur = (*cur).max(e);
    }
    out
}

fn mono_mul_disjoint(a: &NamedMono, b: &NamedMono) -> NamedMono {
    let mut out = a.clone();
    for (v, &e) in b {
        *out.entry(v.clone()).or_insert(0) += e;
    }
    out
}

fn mono_poly<K: Field>(m: &NamedMono, c: &K) -> MPoly<K> {
    let mut p = MPoly::constant(c.clone());
    for (v, &e) in m {
        p = p.mul(&MPoly::var_pow(v, e));
    }
    p
}

/// Fully reduce `p` modulo `basis`: no term of the result is divisible by a
/// basis leading monomial.
pub fn normal_form<K: Field>(p: &MPoly<K>, basis: &[MPoly<K>], order: &MonomialOrder) -> MPoly<K> {
    let leads: Vec<(NamedMono, K)> = basis
        .iter()
        .filter_map(|g| lead_named(g, order))
        .collect();
    let mut rem = MPoly::zero();
    let mut p = p.clone();
    'outer: while !p.is_zero() {
        let (pm, pc) = lead_named(&p, order).unwrap();
        for (i, (gm, gc)) in leads.iter().enumerate() {
            if mono_divides(gm, &pm) {
                let factor = mono_poly(&mono_div(&pm, gm), &pc.div(gc));
                p = p.sub(&factor.mul(&basis[i]));
                continue 'outer;
            }
        }
        let lead_term = mono_poly(&pm, &pc);
        rem = rem.add(&lead_term);
        p = p.sub(&lead_term);
    }
    rem
}

fn s_poly<K: Field>(f: &MPoly<K>, g: &MPoly<K>, order: &MonomialOrder) -> MPoly<K> {
    let (fm, fc) = lead_named(f, order).unwrap();
    let (gm, gc) = lead_named(g, order).unwrap();
    let lcm = mono_lcm(&fm, &gm);
    let mf = mono_poly(&mono_div(&lcm, &fm), &fc.inv());
    let mg = mono_poly(&mono_div(&lcm, &gm), &gc.inv());
    mf.mul(f).sub(&mg.mul(g))
}

/// Reduced Gröbner basis of the ideal generated by `gens`.
/// Basis elements are monic, auto-reduced, and sorted descending by leading
/// monomial, so the output is deterministic.
pub fn groebner_basis<K: Field>(
    gens: &[MPoly<K>],
    order: &MonomialOrder,
    limits: &Limits,
) -> Result<Vec<MPoly<K>>> {
    let mut basis: Vec<MPoly<K>> = gens
        .iter()
        .filter(|g| !g.is_zero())
        .map(|g| g.monic(order))
        .collect();
    if basis.is_empty() {
        return Ok(Vec::new());
    }
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    for i in 0..basis.len() {
        for j in 0..i {
            pairs.push((j, i));
        }
    }
    let mut processed = 0usize;
    loop {
        // normal selection strategy: take the pair with the smallest lcm
        let lcm_of = |&(i, j): &(usize, usize)| {
            let (fi, _) = lead_named(&basis[i], order).unwrap();
            let (fj, _) = lead_named(&basis[j], order).unwrap();
            mono_lcm(&fi, &fj)
        };
        let best = pairs
            .iter()
            .enumerate()
            .min_by(|(_, a), (_, b)| compare_named(&lcm_of(a), &lcm_of(b), order))
            .map(|(idx, _)| idx);
        let (i, j) = match best {
            Some(idx) => pairs.swap_remove(idx),
            None => break,
        };
        processed += 1;
        if processed > limits.max_spairs {
            return Err(Error::ResourceLimit(format!(
                "S-pair limit {} exceeded",
                limits.max_spairs
            )));
        }
        let (fi, _) = lead_named(&basis[i], order).unwrap();
        let (fj, _) = lead_named(&basis[j], order).unwrap();
        // product criterion: coprime leading monomials reduce to zero
        if mono_lcm(&fi, &fj) == mono_mul_disjoint(&fi, &fj) {
            continue;
        }
        let s = s_poly(&basis[i], &basis[j], order);
        let r = normal_form(&s, &basis, order);
        if r.is_zero() {
            continue;
        }
        if r.num_terms() > limits.max_monomials {
            return Err(Error::ResourceLimit(format!(
                "monomial limit {} exceeded",
                limits.max_monomials
            )));
        }
        let r = r.monic(order);
        let k = basis.len();
        for idx in 0..k {
            pairs.push((idx, k));
        }
        basis.push(r);
    }
    Ok(autoreduce(basis, order))
}

fn autoreduce<K: Field>(mut basis: Vec<MPoly<K>>, order: &MonomialOrder) -> Vec<MPoly<K>> {
    // reduce one element at a time against the rest, so that of two equal
    // generators exactly one survives
    let mut i = 0;
    while i < basis.len() {
        let p = basis.remove(i);
        let r = normal_form(&p, &basis, order);
        if r.is_zero() {
            i = 0;
        } else {
            let r = r.monic(order);
            let changed = r != p;
            basis.insert(i, r);
            if changed {
                i = 0;
            } else {
                i += 1;
            }
        }
    }
    // deterministic order: descending by leading monomial
    basis.sort_by(|a, b| {
        let (am, _) = lead_named(a, order).unwrap();
        let (bm, _) = lead_named(b, order).unwrap();
        compare_named(&bm, &am, order)
    });
    basis
}

fn compare_named(a: &NamedMono, b: &NamedMono, order: &MonomialOrder) -> std::cmp::Ordering {
    // embed both into a shared variable list and compare exponent vectors
    let mut vars: Vec<String> = a.keys().chain(b.keys()).cloned().collect();
    vars.sort();
    vars.dedup();
    let ea: Vec<u32> = vars.iter().map(|v| a.get(v).copied().unwrap_or(0)).collect();
    let eb: Vec<u32> = vars.iter().map(|v| b.get(v).copied().unwrap_or(0)).collect();
    order.compare(&vars, &ea, &eb)
}

/// `p` lies in the ideal spanned by the (Gröbner) basis.
pub fn in_ideal<K: Field>(p: &MPoly<K>, basis: &[MPoly<K>], order: &MonomialOrder) -> bool {
    normal_form(p, basis, order).is_zero()
}

/// Generators of `ideal ∩ K[vars \ kill]`, obtained from a lex Gröbner basis
/// with the killed variables ranked highest.
pub fn eliminate_vars<K: Field>(
    gens: &[MPoly<K>],
    kill: &[String],
    keep_precedence: &[String],
    limits: &Limits,
) -> Result<Vec<MPoly<K>>> {
    let mut prec: Vec<&str> = kill.iter().map(|s| s.as_str()).collect();
    prec.extend(keep_precedence.iter().map(|s| s.as_str()));
    let order = MonomialOrder::lex(&prec);
    let gb = groebner_basis(gens, &order, limits)?;
    Ok(gb
        .into_iter()
        .filter(|g| kill.iter().all(|v| !g.contains_var(v)))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::mpoly::QPoly;
    use num_bigint::BigInt;
    use num_rational::BigRational;

    fn q(n: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(n))
    }
    fn v(name: &str) -> QPoly {
        MPoly::var(name)
    }

    fn limits() -> Limits {
        Limits::default()
    }

    #[test]
    fn principal_ideal() {
        let order = MonomialOrder::lex(&["x"]);
        let gb = groebner_basis(&[v("x")], &order, &limits()).unwrap();
        assert_eq!(gb, vec![v("x")]);
    }

    #[test]
    fn reduces_redundant_generator() {
        // <x^2 - 1, x - 1> = <x - 1>
        let order = MonomialOrder::lex(&["x"]);
        let gens = vec![v("x").pow(2).sub(&MPoly::one()), v("x").sub(&MPoly::one())];
        let gb = groebner_basis(&gens, &order, &limits()).unwrap();
        assert_eq!(gb, vec![v("x").sub(&MPoly::one())]);
    }

    #[test]
    fn twisted_cubic_style_basis() {
        // x = n^2 - 1, y = n^3 + n, lex n > x > y
        let order = MonomialOrder::lex(&["n", "x", "y"]);
        let gens = vec![
            v("x").sub(&v("n").pow(2)).add(&MPoly::one()),
            v("y").sub(&v("n").pow(3)).sub(&v("n")),
        ];
        let gb = groebner_basis(&gens, &order, &limits()).unwrap();
        let strs: Vec<String> = gb.iter().map(|g| g.to_string_ordered(&order)).collect();
        assert_eq!(
            strs,
            vec![
                "n**2 - x - 1",
                "n*x + 2*n - y",
                "n*y - x**2 - 3*x - 2",
                "x**3 + 5*x**2 + 8*x - y**2 + 4",
            ]
        );
        // every S-polynomial of the returned basis reduces to zero
        for i in 0..gb.len() {
            for j in 0..i {
                let s = s_poly(&gb[i], &gb[j], &order);
                assert!(normal_form(&s, &gb, &order).is_zero());
            }
        }
    }

    #[test]
    fn elimination() {
        // <x - n, y - n>, kill n  ->  <x - y>
        let gens = vec![v("x").sub(&v("n")), v("y").sub(&v("n"))];
        let out = eliminate_vars(
            &gens,
            &["n".to_string()],
            &["x".to_string(), "y".to_string()],
            &limits(),
        )
        .unwrap();
        assert_eq!(out, vec![v("x").sub(&v("y"))]);
    }

    #[test]
    fn elimination_with_exponential_vars() {
        // x = n a, y = n^2 b, a^2 - b  ->  x^2 - y (Example 5 shape)
        let gens = vec![
            v("x").sub(&v("n").mul(&v("a"))),
            v("y").sub(&v("n").pow(2).mul(&v("b"))),
            v("a").pow(2).sub(&v("b")),
        ];
        let out = eliminate_vars(
            &gens,
            &["n".to_string(), "a".to_string(), "b".to_string()],
            &["x".to_string(), "y".to_string()],
            &limits(),
        )
        .unwrap();
        assert_eq!(out, vec![v("x").pow(2).sub(&v("y"))]);
    }

    #[test]
    fn membership() {
        let order = MonomialOrder::lex(&["x", "y"]);
        let gens = vec![v("x").sub(&v("y"))];
        let gb = groebner_basis(&gens, &order, &limits()).unwrap();
        assert!(in_ideal(&v("x").pow(2).sub(&v("y").pow(2)), &gb, &order));
        assert!(!in_ideal(&v("x").add(&v("y")), &gb, &order));
    }

    #[test]
    fn scale_invariance() {
        let order = MonomialOrder::lex(&["x"]);
        let g = v("x").scale(&q(3)).add(&MPoly::constant(q(6)));
        let gb = groebner_basis(&[g], &order, &limits()).unwrap();
        assert_eq!(gb, vec![v("x").add(&MPoly::constant(q(2)))]);
    }
}
