//! Analysis of loops whose defective variables block the moment pipeline:
//! searches for polynomial combinations of defective variables whose
//! expected values still obey a linear recurrence, and rebuilds a
//! deterministic loop that computes such a combination directly.

use crate::algebra::{nullspace, Coeff, Field, MPoly, PPoly};
use crate::error::{Error, Result};
use crate::frontend::{classify, poly_to_expr, Assignment, Ast, Expr, Statement};
use crate::limits::Limits;
use crate::recurrences::{
    expected_after, initial_values, lower_body, poly_to_monomials, Monom,
};
use crate::solver::{char_poly, deflate_linear, find_rational_root};
use num_rational::BigRational;
use num_traits::Zero;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

/// A polynomial over defective variables whose expected value satisfies
/// `E(S_{n+1}) = eigenvalue * E(S_n) + E(inhomogeneous_n)`, where the
/// inhomogeneous part only mentions non-defective variables (evaluated
/// before the iteration runs).
#[derive(Clone, Debug)]
pub struct Combination {
    pub combination: PPoly,
    pub eigenvalue: BigRational,
    pub inhomogeneous: PPoly,
}

impl fmt::Display for Combination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "S = {}, eigenvalue {}, inhomogeneous part {}",
            self.combination,
            crate::algebra::field::rat_str(&self.eigenvalue),
            self.inhomogeneous
        )
    }
}

/// Variables that sit on, or feed from, a dependency cycle with a
/// non-linear edge. Their moments admit no exponential-polynomial closed
/// form in general.
pub fn find_defective(ast: &Ast, limits: &Limits) -> Result<BTreeSet<String>> {
    Ok(classify(ast, limits)?.defective.clone())
}

/// All monomials over `vars` with total degree between 1 and `max_degree`.
fn defective_monomials(vars: &[String], max_degree: u32) -> Vec<Monom> {
    let mut out = Vec::new();
    let mut exps = vec![0u32; vars.len()];
    fn rec(vars: &[String], exps: &mut Vec<u32>, i: usize, left: u32, out: &mut Vec<Monom>) {
        if i == vars.len() {
            let m = Monom(
                vars.iter()
                    .zip(exps.iter())
                    .filter(|(_, &e)| e > 0)
                    .map(|(v, &e)| (v.clone(), e))
                    .collect(),
            );
            if !m.is_one() {
                out.push(m);
            }
            return;
        }
        for e in 0..=left {
            exps[i] = e;
            rec(vars, exps, i + 1, left - e, out);
        }
        exps[i] = 0;
    }
    rec(vars, &mut exps, 0, max_degree, &mut out);
    out.sort_by_key(|m| (m.degree(), m.to_string()));
    out
}

/// Rational eigenvalues of a rational matrix, ignoring zero roots and any
/// irrational residual factor of the characteristic polynomial.
fn rational_eigenvalues(m: &[Vec<BigRational>]) -> Vec<BigRational> {
    let mut cp = char_poly(m);
    while cp.first().map(Zero::is_zero).unwrap_or(false) {
        cp.remove(0);
    }
    let mut out = Vec::new();
    while cp.len() > 1 {
        match find_rational_root(&cp) {
            Some(r) => {
                if !Zero::is_zero(&r) && !out.contains(&r) {
                    out.push(r.clone());
                }
                cp = deflate_linear(&cp, &r);
            }
            None => break,
        }
    }
    out.sort();
    out
}

/// Combinations of defective-variable monomials up to the given degree
/// whose expected values follow a first-order linear recurrence.
///
/// The expected-value update of each candidate monomial is split three
/// ways: coefficients on other candidate monomials form a square matrix,
/// coefficients on further defective monomials must be cancelled by the
/// combination, and everything else becomes the inhomogeneous part. Left
/// eigenvectors of the matrix that also cancel the residual defective
/// monomials yield the returned combinations.
pub fn synthesize_combinations(
    ast: &Ast,
    max_degree: u32,
    limits: &Limits,
) -> Result<Vec<Combination>> {
    let class = classify(ast, limits)?;
    if class.defective.is_empty() {
        return Err(Error::NotUnsolvable);
    }
    let vars: Vec<String> = class.defective.iter().cloned().collect();
    let monoms = defective_monomials(&vars, max_degree);
    let k = monoms.len();
    if k > limits.max_state_monomials {
        return Err(Error::ResourceLimit(format!(
            "{} defective monomials exceed the state cap {}",
            k, limits.max_state_monomials
        )));
    }
    let index: BTreeMap<&Monom, usize> = monoms.iter().enumerate().map(|(i, m)| (m, i)).collect();
    let stmts = lower_body(ast, &class, limits)?;

    let zero = <Coeff as Field>::zero();
    let mut matrix = vec![vec![zero.clone(); k]; k];
    // defective monomials outside the candidate set, per row
    let mut residual: Vec<BTreeMap<Monom, Coeff>> = vec![BTreeMap::new(); k];
    let mut inhom: Vec<PPoly> = vec![MPoly::zero(); k];
    for (i, m) in monoms.iter().enumerate() {
        let after = expected_after(&m.to_poly(), &stmts, &class.supports)?;
        for (dep, c) in poly_to_monomials(&after) {
            if let Some(&j) = index.get(&dep) {
                matrix[i][j] = Field::add(&matrix[i][j], &c);
            } else if dep.vars().any(|v| class.defective.contains(v)) {
                let e = residual[i].entry(dep).or_insert_with(|| zero.clone());
                *e = Field::add(e, &c);
            } else {
                inhom[i] = inhom[i].add(&dep.to_poly().scale(&c));
            }
        }
    }

    let rational: Vec<Vec<BigRational>> = matrix
        .iter()
        .map(|row| {
            row.iter()
                .map(|c| {
                    c.as_rational().ok_or_else(|| {
                        Error::UnsupportedEigenvalue(
                            "parameter-dependent update of defective monomials".into(),
                        )
                    })
                })
                .collect::<Result<_>>()
        })
        .collect::<Result<_>>()?;

    // monomials the combination has to cancel, shared across rows
    let cancel: BTreeSet<Monom> = residual
        .iter()
        .flat_map(|r| r.keys().cloned())
        .collect();

    let mut out: Vec<Combination> = Vec::new();
    for lambda in rational_eigenvalues(&rational) {
        // left eigenvector: (M^T - lambda I) c = 0, plus cancellation rows
        let mut rows: Vec<Vec<Coeff>> = (0..k)
            .map(|j| {
                (0..k)
                    .map(|i| {
                        let mut e = matrix[i][j].clone();
                        if i == j {
                            e = Field::sub(&e, &Field::from_rat(&lambda));
                        }
                        e
                    })
                    .collect()
            })
            .collect();
        for m in &cancel {
            rows.push(
                residual
                    .iter()
                    .map(|r| r.get(m).cloned().unwrap_or_else(|| zero.clone()))
                    .collect(),
            );
        }
        for c in nullspace(&rows) {
            let first = match c.iter().find(|x| !Field::is_zero(*x)) {
                Some(f) => f.clone(),
                None => continue,
            };
            let inv = first.inv();
            let mut combination: PPoly = MPoly::zero();
            let mut part: PPoly = MPoly::zero();
            for (i, ci) in c.iter().enumerate() {
                if Field::is_zero(ci) {
                    continue;
                }
                let ci = Field::mul(ci, &inv);
                combination = combination.add(&monoms[i].to_poly().scale(&ci));
                part = part.add(&inhom[i].scale(&ci));
            }
            if out
                .iter()
                .any(|o| o.combination == combination && o.eigenvalue == lambda)
            {
                continue;
            }
            out.push(Combination {
                combination,
                eigenvalue: lambda.clone(),
                inhomogeneous: part,
            });
        }
    }
    out.sort_by_key(|c| {
        (
            c.combination.total_degree(),
            c.eigenvalue.clone(),
            c.combination.to_string(),
        )
    });
    Ok(out)
}

fn fresh_name(base: &str, used: &BTreeSet<String>) -> String {
    let mut name = base.to_string();
    while used.contains(&name) {
        name.push('_');
    }
    name
}

/// Rebuild a loop that tracks the expected value of a combination with a
/// fresh variable `s`. The emitted loop is deterministic: probabilistic
/// updates of the auxiliary variables feeding the inhomogeneous part are
/// replaced by their expectations, and each auxiliary update goes through
/// a temporary so the `s` update reads the values from before the
/// iteration.
pub fn synth_solvable_loop(ast: &Ast, cand: &Combination, limits: &Limits) -> Result<Ast> {
    let class = classify(ast, limits)?;
    let stmts = lower_body(ast, &class, limits)?;

    // auxiliary variables: everything the inhomogeneous part reads,
    // closed under what their own expected updates read
    let mut aux: Vec<String> = Vec::new();
    let mut updates: BTreeMap<String, PPoly> = BTreeMap::new();
    let mut queue: Vec<String> = cand.inhomogeneous.vars().to_vec();
    while let Some(v) = queue.pop() {
        if updates.contains_key(&v) || ast.is_param(&v) {
            continue;
        }
        let up = expected_after(&MPoly::var(&v), &stmts, &class.supports)?;
        for w in up.vars() {
            if !updates.contains_key(w) {
                queue.push(w.clone());
            }
        }
        updates.insert(v.clone(), up);
        aux.push(v);
    }
    aux.sort_by_key(|v| ast.vars.iter().position(|x| x == v).unwrap_or(usize::MAX));

    let mut used: BTreeSet<String> = ast.vars.iter().cloned().collect();
    used.extend(ast.params.iter().cloned());
    let s = fresh_name("s", &used);
    used.insert(s.clone());

    // initial values: E(S) and every auxiliary variable at iteration zero
    let mut init: Vec<Assignment> = Vec::new();
    let terms = poly_to_monomials(&cand.combination);
    let state: Vec<Monom> = terms.iter().map(|(m, _)| m.clone()).collect();
    let start = initial_values(ast, &class, &state)?;
    let mut s0 = <Coeff as Field>::zero();
    for ((_, c), v) in terms.iter().zip(start.iter()) {
        s0 = Field::add(&s0, &Field::mul(c, v));
    }
    init.push(Assignment::deterministic(
        &s,
        poly_to_expr(&MPoly::constant(s0)),
    ));
    for v in &aux {
        let v0 = initial_values(ast, &class, &[Monom::var(v)])?;
        init.push(Assignment::deterministic(
            v,
            poly_to_expr(&MPoly::constant(v0[0].clone())),
        ));
    }

    let mut body: Vec<Statement> = Vec::new();
    let mut copies: Vec<(String, String)> = Vec::new();
    for (i, v) in aux.iter().enumerate() {
        let up = &updates[v];
        if *up == MPoly::var(v) {
            continue;
        }
        let base = if i == 0 {
            "t".to_string()
        } else {
            format!("t{}", i + 1)
        };
        let t = fresh_name(&base, &used);
        used.insert(t.clone());
        body.push(Statement::Assign(Assignment::deterministic(
            &t,
            poly_to_expr(up),
        )));
        copies.push((v.clone(), t));
    }
    let s_update = MPoly::var(&s)
        .scale(&Field::from_rat(&cand.eigenvalue))
        .add(&cand.inhomogeneous);
    body.push(Statement::Assign(Assignment::deterministic(
        &s,
        poly_to_expr(&s_update),
    )));
    for (v, t) in copies {
        body.push(Statement::Assign(Assignment::deterministic(
            &v,
            Expr::Ident(t),
        )));
    }

    let mut out = Ast {
        init,
        guard: None,
        body,
        params: BTreeSet::new(),
        vars: Vec::new(),
        original_guard: None,
    };
    out.reclassify();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::{normalize, parse};
    use crate::recurrences::moment_system;
    use crate::solver::solve;
    use num_bigint::BigInt;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    fn prog(src: &str) -> Ast {
        normalize(parse(src).unwrap()).unwrap()
    }

    const SELF_SQUARING: &str = "x = x0\ny = y0\nz = 0\nwhile true:\n    z = 1 - z\n    x = 2*x + y**2 + z\n    y = 2*y - y**2 + 2*z\nend\n";

    #[test]
    fn linear_loop_has_nothing_to_synthesize() {
        let ast = prog("x = 0\nwhile true:\n    x = 2*x + 1\nend\n");
        assert!(find_defective(&ast, &Limits::default()).unwrap().is_empty());
        let err = synthesize_combinations(&ast, 1, &Limits::default());
        assert!(matches!(err, Err(Error::NotUnsolvable)));
    }

    #[test]
    fn additive_combination_cancels_the_square() {
        let ast = prog(SELF_SQUARING);
        let defective = find_defective(&ast, &Limits::default()).unwrap();
        assert_eq!(
            defective,
            ["x", "y"].iter().map(|s| s.to_string()).collect()
        );
        let cands = synthesize_combinations(&ast, 1, &Limits::default()).unwrap();
        assert_eq!(cands.len(), 1);
        let c = &cands[0];
        assert_eq!(
            c.combination,
            MPoly::var("x").add(&MPoly::var("y"))
        );
        assert_eq!(c.eigenvalue, q(2, 1));
        let expect = MPoly::from_int(3).sub(&MPoly::var("z").scale(&Field::from_int(3)));
        assert_eq!(c.inhomogeneous, expect);
    }

    #[test]
    fn combination_satisfies_its_recurrence() {
        let ast = prog(SELF_SQUARING);
        let class = classify(&ast, &Limits::default()).unwrap();
        let stmts = lower_body(&ast, &class, &Limits::default()).unwrap();
        for c in synthesize_combinations(&ast, 1, &Limits::default()).unwrap() {
            let pushed =
                expected_after(&c.combination, &stmts, &class.supports).unwrap();
            let want = c
                .combination
                .scale(&Field::from_rat(&c.eigenvalue))
                .add(&c.inhomogeneous);
            assert!(pushed.sub(&want).is_zero());
        }
    }

    #[test]
    fn coupled_pair_with_forced_square_has_no_linear_combination() {
        // the square of one defective variable feeds the other and no
        // degree-one vector can cancel it
        let src = "u, w, x, y, z = 0, 1, 2, 3, 4\nwhile true:\n    z = z + p**2 {1/2} z + p\n    y = y - 5*p*z\n    w = 5*w + x**2\n    x = 5 + w + x\n    u = x + p*y\nend\n";
        let ast = prog(src);
        let defective = find_defective(&ast, &Limits::default()).unwrap();
        assert_eq!(
            defective,
            ["u", "w", "x"].iter().map(|s| s.to_string()).collect()
        );
        let cands = synthesize_combinations(&ast, 1, &Limits::default()).unwrap();
        assert!(cands.is_empty(), "unexpected candidates: {:?}", cands);
    }

    #[test]
    fn synthesized_loop_tracks_the_combination() {
        let ast = prog(SELF_SQUARING);
        let cands = synthesize_combinations(&ast, 1, &Limits::default()).unwrap();
        let synth = synth_solvable_loop(&ast, &cands[0], &Limits::default()).unwrap();

        // the emitted program is valid surface syntax
        let reparsed = prog(&synth.to_string());
        let class = classify(&reparsed, &Limits::default()).unwrap();
        assert!(class.defective.is_empty());

        let goal = Monom::var("s");
        let sys = moment_system(&reparsed, &class, &[goal.clone()], &Limits::default()).unwrap();
        let forms = solve(&sys, &[goal.clone()], &Limits::default()).unwrap();
        let cf = &forms[&goal];

        // 2^n (x0 + y0 + 2) - (-1)^n / 2 - 3/2
        let x0 = Coeff::param("x0");
        let y0 = Coeff::param("y0");
        for n in 0..8u64 {
            let lead = Field::mul(
                &Field::from_rat(&q(2, 1).pow(n as i32)),
                &Field::add(&Field::add(&x0, &y0), &Field::from_int(2)),
            );
            let alt = Field::from_rat(&(q(-1, 1).pow(n as i32) * q(-1, 2)));
            let want = Field::add(&Field::add(&lead, &alt), &Field::from_rat(&q(-3, 2)));
            assert_eq!(cf.evaluate_at(n), crate::algebra::Surd::pure(want));
        }
    }

    #[test]
    fn synthesized_loop_is_deterministic_for_probabilistic_input() {
        let src = "x = x0\ny = y0\nz = 0\nwhile true:\n    z = 1 - z {1/2} z\n    x = 2*x + y**2 + z\n    y = 2*y - y**2 + 2*z\nend\n";
        let ast = prog(src);
        let cands = synthesize_combinations(&ast, 1, &Limits::default()).unwrap();
        assert_eq!(cands.len(), 1);
        let synth = synth_solvable_loop(&ast, &cands[0], &Limits::default()).unwrap();
        fn deterministic(stmts: &[Statement]) -> bool {
            stmts.iter().all(|s| match s {
                Statement::Assign(a) => match &a.rhs {
                    crate::frontend::AssignRhs::Choice(alts) => alts.len() == 1,
                    crate::frontend::AssignRhs::Draw { .. } => false,
                },
                Statement::If(ifs) => {
                    ifs.branches.iter().all(|(_, b)| deterministic(b))
                        && ifs
                            .else_branch
                            .as_ref()
                            .map(|b| deterministic(b))
                            .unwrap_or(true)
                }
            })
        }
        assert!(deterministic(&synth.body));
        assert!(synth.init.iter().all(|a| matches!(
            &a.rhs,
            crate::frontend::AssignRhs::Choice(alts) if alts.len() == 1
        )));
    }

    #[test]
    fn emitted_shape_uses_a_temporary_for_the_auxiliary_variable() {
        let ast = prog(SELF_SQUARING);
        let cands = synthesize_combinations(&ast, 1, &Limits::default()).unwrap();
        let synth = synth_solvable_loop(&ast, &cands[0], &Limits::default()).unwrap();
        let text = synth.to_string();
        assert!(text.contains("t = -z + 1") || text.contains("t = 1 - z"), "{}", text);
        assert!(text.contains("s = 2*s - 3*z + 3") || text.contains("s = 2*s + 3 - 3*z"), "{}", text);
        assert!(text.contains("z = t"), "{}", text);
    }
}
