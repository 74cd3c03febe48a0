//! Randomized properties of the algebraic core and the analysis pipeline.

use loopm::algebra::{
    groebner_basis, hilbert_basis_nat, in_ideal, DioSystem, Field, MPoly, MonomialOrder, QPoly,
    Surd,
};
use loopm::frontend::{normalize, parse};
use loopm::moments::{central_from_raw, cumulant_from_raw};
use loopm::simulator::run_samples;
use loopm::solver::{BaseValue, ExpPoly};
use loopm::Limits;
use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;
use std::collections::{BTreeMap, BTreeSet};

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Random bivariate polynomial with small integer coefficients.
fn small_poly() -> impl Strategy<Value = QPoly> {
    prop::collection::vec(((0u32..3, 0u32..3), -4i64..5), 0..5).prop_map(|terms| {
        let mut p: QPoly = MPoly::zero();
        for ((ex, ey), c) in terms {
            let mono = MPoly::var_pow("x", ex).mul(&MPoly::var_pow("y", ey));
            p = p.add(&mono.scale(&q(c, 1)));
        }
        p
    })
}

fn small_rat() -> impl Strategy<Value = BigRational> {
    (-6i64..7, 1i64..5).prop_map(|(n, d)| q(n, d))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn polynomial_ring_laws(a in small_poly(), b in small_poly(), c in small_poly()) {
        prop_assert_eq!(a.add(&b).add(&c), a.add(&b.add(&c)));
        prop_assert_eq!(a.mul(&b), b.mul(&a));
        prop_assert_eq!(a.mul(&b.add(&c)), a.mul(&b).add(&a.mul(&c)));
        prop_assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
    }

    #[test]
    fn surd_times_conjugate_is_rational(
        a in small_rat(),
        b in small_rat(),
        d in prop::sample::select(vec![2i64, 3, 5, 7, 13]),
    ) {
        let d = BigInt::from(d);
        let s = Surd::new(a.clone(), b.clone(), d.clone());
        let conj = Surd::new(a.clone(), -b.clone(), d.clone());
        let prod = s.mul(&conj);
        let want = Surd::pure(&a * &a - BigRational::from_integer(d) * &b * &b);
        prop_assert_eq!(prod, want);
    }

    #[test]
    fn minimal_solutions_generate_the_box(row in prop::collection::vec(-3i64..4, 2..4)) {
        let width = row.len();
        let sys = DioSystem::new(vec![row.clone()]);
        let basis = hilbert_basis_nat(&sys, &Limits::default()).unwrap();

        // every natural combination of basis vectors solves the system, and
        // every solution in the box reaches zero by subtracting some basis
        // vector, which makes the basis complete on the box by induction
        let eval = |v: &[u32]| -> i64 {
            row.iter().zip(v.iter()).map(|(&a, &x)| a * x as i64).sum()
        };
        for b in &basis {
            prop_assert_eq!(eval(b), 0);
        }
        let bound = 6u32;
        let mut cursor = vec![0u32; width];
        loop {
            if eval(&cursor) == 0 && cursor.iter().any(|&x| x > 0) {
                let covered = basis.iter().any(|b| {
                    b.iter().zip(cursor.iter()).all(|(&bi, &ci)| bi <= ci)
                });
                prop_assert!(covered, "uncovered solution {:?}", cursor);
            }
            let mut i = 0;
            while i < width && cursor[i] == bound {
                cursor[i] = 0;
                i += 1;
            }
            if i == width {
                break;
            }
            cursor[i] += 1;
        }
    }

    #[test]
    fn ideal_membership_accepts_combinations(
        g1 in small_poly(),
        g2 in small_poly(),
        f1 in small_poly(),
        f2 in small_poly(),
    ) {
        prop_assume!(!g1.is_zero() || !g2.is_zero());
        let order = MonomialOrder::lex(&["x", "y"]);
        let limits = Limits::default();
        let gb = match groebner_basis(&[g1.clone(), g2.clone()], &order, &limits) {
            Ok(gb) => gb,
            Err(_) => return Ok(()), // resource cap on a degenerate draw
        };
        let h = f1.mul(&g1).add(&f2.mul(&g2));
        prop_assert!(in_ideal(&h, &gb, &order));
    }

    #[test]
    fn derivative_obeys_the_product_rule(
        c1 in small_rat(),
        c2 in small_rat(),
        b1 in 1i64..4,
        b2 in 1i64..4,
    ) {
        use loopm::algebra::Coeff;
        let coeff = |r: &BigRational| -> Surd<Coeff> {
            Surd::pure(Field::mul(&Coeff::param("p"), &Field::from_rat(r)))
        };
        let f = ExpPoly::term(BaseValue::Rat(q(b1, 1)), vec![coeff(&c1), coeff(&c2)]);
        let g = ExpPoly::term(BaseValue::Rat(q(b2, 1)), vec![coeff(&c2), coeff(&c1)]);
        let lhs = f.mul(&g).derivative("p").unwrap();
        let rhs = f
            .derivative("p")
            .unwrap()
            .mul(&g)
            .add(&f.mul(&g.derivative("p").unwrap()));
        prop_assert!(lhs.sub(&rhs).is_zero());
    }

    #[test]
    fn point_mass_has_no_spread(m in small_rat(), order in 2usize..6) {
        // raw moments of a point mass at m are its powers
        let raw: Vec<BigRational> = (0..=order)
            .map(|k| num_traits::pow::pow(m.clone(), k))
            .collect();
        let central = central_from_raw(&raw);
        let cumulant = cumulant_from_raw(&raw);
        for d in 2..=order {
            prop_assert!(num_traits::Zero::is_zero(&central[d]));
            prop_assert!(num_traits::Zero::is_zero(&cumulant[d]));
        }
        prop_assert!(num_traits::Zero::is_zero(&central[1]));
        prop_assert_eq!(&cumulant[1], &m);
    }

    #[test]
    fn simulation_is_reproducible(seed in 0u64..1000) {
        let src = "x, y = 0, 0\nwhile true:\n    x = x + 2 {1/2} x - 1\n    y = y + 1 {1/2} y - 2\nend\n";
        let ast = normalize(parse(src).unwrap()).unwrap();
        let a = run_samples(&ast, 5, 50, seed, &BTreeMap::new()).unwrap();
        let b = run_samples(&ast, 5, 50, seed, &BTreeMap::new()).unwrap();
        for (ta, tb) in a.iter().zip(b.iter()) {
            prop_assert_eq!(&ta.values, &tb.values);
        }
        // distinct streams actually diverge somewhere
        let distinct: BTreeSet<String> =
            a.iter().map(|t| format!("{:?}", t.values)).collect();
        prop_assert!(distinct.len() > 1);
    }
}
