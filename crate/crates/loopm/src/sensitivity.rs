//! Parameter sensitivities: exact partial derivatives of variable-moment
//! closed forms with respect to a symbolic parameter. Either differentiate a
//! closed form directly, or build a joint recurrence system over expected
//! values and their derivatives. The joint system zeroes derivatives of
//! moments over parameter-independent variables, which can cut through
//! subsystems that have no closed forms of their own.

use crate::error::{Error, Result};
use crate::frontend::{Ast, Classification, Statement};
use crate::limits::Limits;
use crate::recurrences::{
    expected_after, initial_values, lower_body, poly_to_monomials, Monom, RecurrenceSystem,
};
use crate::solver::{solve, ExpPoly};
use crate::algebra::{Coeff, Field};
use std::collections::{BTreeMap, BTreeSet};

/// Tag variable marking derivative entries in the joint state. The surface
/// language cannot name variables starting with `#`.
pub const SENS_TAG: &str = "#s";

/// Derivative of a closed form with respect to a parameter.
pub fn diff_closed_form(cf: &ExpPoly, param: &str) -> Result<ExpPoly> {
    cf.derivative(param)
}

/// Variables whose joint distribution cannot be affected by the parameter:
/// no occurrence of the parameter is backward-reachable through assignments,
/// probabilities, distribution arguments, or branch conditions.
pub fn param_independent_vars(ast: &Ast, param: &str) -> BTreeSet<String> {
    // forward closure of "depends on the parameter"
    let mut dependent: BTreeSet<String> = BTreeSet::new();
    let mut changed = true;
    while changed {
        changed = false;
        for a in &ast.init {
            let reads = a.reads();
            if reads.contains(param) || reads.iter().any(|r| dependent.contains(r)) {
                for t in &a.targets {
                    changed |= dependent.insert(t.clone());
                }
            }
        }
        let mut ctx: BTreeSet<String> = BTreeSet::new();
        if let Some(g) = &ast.guard {
            g.idents(&mut ctx);
        }
        changed |= mark_stmts(&ast.body, param, &ctx, &mut dependent);
    }
    ast.vars
        .iter()
        .filter(|v| !dependent.contains(*v))
        .cloned()
        .collect()
}

fn mark_stmts(
    stmts: &[Statement],
    param: &str,
    ctx: &BTreeSet<String>,
    dependent: &mut BTreeSet<String>,
) -> bool {
    let mut changed = false;
    for s in stmts {
        match s {
            Statement::Assign(a) => {
                let mut reads = a.reads();
                reads.extend(ctx.iter().cloned());
                if reads.contains(param) || reads.iter().any(|r| dependent.contains(r)) {
                    for t in &a.targets {
                        changed |= dependent.insert(t.clone());
                    }
                }
            }
            Statement::If(ifs) => {
                let mut inner = ctx.clone();
                for (c, _) in &ifs.branches {
                    c.idents(&mut inner);
                }
                for (_, b) in &ifs.branches {
                    changed |= mark_stmts(b, param, &inner, dependent);
                }
                if let Some(eb) = &ifs.else_branch {
                    changed |= mark_stmts(eb, param, &inner, dependent);
                }
            }
        }
    }
    changed
}

fn tag(m: &Monom) -> Monom {
    m.mul(&Monom::var(SENS_TAG))
}

fn over(m: &Monom, set: &BTreeSet<String>) -> bool {
    m.vars().all(|v| set.contains(v))
}

/// Joint recurrence system over expected values and their derivatives with
/// respect to `param`, closed over the derivative of the goal monomial.
/// Derivative entries are the goal monomials multiplied by the tag variable.
pub fn sensitivity_system(
    ast: &Ast,
    class: &Classification,
    goals: &[Monom],
    param: &str,
    limits: &Limits,
) -> Result<RecurrenceSystem> {
    let indep = param_independent_vars(ast, param);
    let stmts = lower_body(ast, class, limits)?;

    // rows keyed by the tagged encoding; (is derivative, base monomial)
    let mut rows: BTreeMap<Monom, Vec<(Monom, Coeff)>> = BTreeMap::new();
    let mut queue: Vec<(bool, Monom)> = goals
        .iter()
        .map(|g| (true, g.clone()))
        .filter(|(_, g)| !over(g, &indep))
        .collect();
    let mut bases: BTreeSet<Monom> = BTreeSet::new();
    while let Some((is_sens, m)) = queue.pop() {
        let key = if is_sens { tag(&m) } else { m.clone() };
        if rows.contains_key(&key) {
            continue;
        }
        if rows.len() >= limits.max_state_monomials {
            return Err(Error::ResourceLimit(format!(
                "sensitivity state exceeds {} entries",
                limits.max_state_monomials
            )));
        }
        if !is_sens {
            // plain moments must avoid defective monomials; derivative rows
            // may pass through them as long as every needed plain moment is
            // well behaved
            let bad: Vec<String> = m
                .vars()
                .filter(|v| class.defective.contains(*v))
                .cloned()
                .collect();
            if !bad.is_empty() {
                return Err(Error::DefectiveDependency(bad));
            }
        }
        let after = expected_after(&m.to_poly(), &stmts, &class.supports)?;
        let terms = poly_to_monomials(&after);
        let mut row: BTreeMap<Monom, Coeff> = BTreeMap::new();
        for (dep, c) in &terms {
            if is_sens {
                // product rule: d/dp (c * E(dep)) = c' E(dep) + c dE(dep)
                let dc = c.derivative(param);
                if !Field::is_zero(&dc) {
                    queue.push((false, dep.clone()));
                    let e = row.entry(dep.clone()).or_insert_with(Field::zero);
                    *e = e.add(&dc);
                }
                if !dep.is_one() && !over(dep, &indep) {
                    queue.push((true, dep.clone()));
                    let e = row.entry(tag(dep)).or_insert_with(Field::zero);
                    *e = e.add(c);
                }
            } else {
                queue.push((false, dep.clone()));
                let e = row.entry(dep.clone()).or_insert_with(Field::zero);
                *e = e.add(c);
            }
        }
        bases.insert(m);
        rows.insert(key, row.into_iter().collect());
    }

    let mut state: Vec<Monom> = rows.keys().cloned().collect();
    state.sort_by_key(|m| (m.degree(), m.to_string()));
    let index: BTreeMap<&Monom, usize> = state.iter().enumerate().map(|(i, m)| (m, i)).collect();
    let n = state.len();
    let mut matrix = vec![vec![<Coeff as Field>::zero(); n]; n];
    for (m, terms) in &rows {
        let i = index[m];
        for (dep, c) in terms {
            matrix[i][index[dep]] = Field::add(&matrix[i][index[dep]], c);
        }
    }

    // initial values: expected values after the init block, derivative
    // entries differentiated
    let base_list: Vec<Monom> = bases.iter().cloned().collect();
    let base_init = initial_values(ast, class, &base_list)?;
    let init_of: BTreeMap<&Monom, &Coeff> =
        base_list.iter().zip(base_init.iter()).collect();
    let initial: Vec<Coeff> = state
        .iter()
        .map(|m| {
            if m.0.contains_key(SENS_TAG) {
                let mut base = m.clone();
                base.0.remove(SENS_TAG);
                init_of[&base].derivative(param)
            } else {
                (*init_of[m]).clone()
            }
        })
        .collect();
    Ok(RecurrenceSystem {
        state,
        matrix,
        initial,
    })
}

/// Closed form of the derivative of the goal's expected value with respect
/// to the parameter, via the joint recurrence system.
pub fn solve_sensitivity(
    ast: &Ast,
    class: &Classification,
    goal: &Monom,
    param: &str,
    limits: &Limits,
) -> Result<ExpPoly> {
    let indep = param_independent_vars(ast, param);
    if over(goal, &indep) {
        return Ok(ExpPoly::zero());
    }
    let sys = sensitivity_system(ast, class, &[goal.clone()], param, limits)?;
    let target = tag(goal);
    let mut forms = solve(&sys, &[target.clone()], limits)?;
    Ok(forms.remove(&target).expect("solved target present"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::normalize::normalize;
    use crate::frontend::parser::parse;
    use crate::frontend::restrict::classify;
    use crate::recurrences::moment_system;
    use crate::algebra::{Surd, SurdCoeff};
    use num_bigint::BigInt;
    use num_rational::BigRational;

    fn prepared(src: &str) -> (Ast, Classification) {
        let ast = normalize(parse(src).unwrap()).unwrap();
        let class = classify(&ast, &Limits::default()).unwrap();
        (ast, class)
    }
    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }
    fn sc(n: i64, d: i64) -> SurdCoeff {
        Surd::pure(<Coeff as Field>::from_rat(&q(n, d)))
    }

    #[test]
    fn independent_variable_detection() {
        let src = "x = 0\nw = 1\ny = 0\nwhile true:\n    x = x + 1\n    w = w + x\n    y = y + p * x\nend\n";
        let (ast, _) = prepared(src);
        let indep = param_independent_vars(&ast, "p");
        assert!(indep.contains("x"));
        assert!(indep.contains("w"));
        assert!(!indep.contains("y"));
    }

    #[test]
    fn condition_propagates_dependence() {
        let src = "c = 0\nx = 0\nwhile true:\n    c = Bernoulli(p)\n    if c == 1:\n        x = x + 1\n    end\nend\n";
        let (ast, _) = prepared(src);
        let indep = param_independent_vars(&ast, "p");
        assert!(!indep.contains("c"));
        assert!(!indep.contains("x"));
    }

    #[test]
    fn goal_over_independent_vars_is_zero() {
        let src = "x = 0\ny = 0\nwhile true:\n    x = x + 1\n    y = y + p\nend\n";
        let (ast, class) = prepared(src);
        let s = solve_sensitivity(&ast, &class, &Monom::var("x"), "p", &Limits::default())
            .unwrap();
        assert!(s.is_zero());
    }

    #[test]
    fn matches_differentiated_closed_form() {
        // y_{n+1} = y_n + p: E(y_n) = y0 + n p, sensitivity n
        let src = "y = 3\nwhile true:\n    y = y + p\nend\n";
        let (ast, class) = prepared(src);
        let goal = Monom::var("y");
        let s = solve_sensitivity(&ast, &class, &goal, "p", &Limits::default()).unwrap();
        let sys = moment_system(&ast, &class, &[goal.clone()], &Limits::default()).unwrap();
        let cf = solve(&sys, &[goal.clone()], &Limits::default())
            .unwrap()
            .remove(&goal)
            .unwrap();
        assert_eq!(s, diff_closed_form(&cf, "p").unwrap());
        assert_eq!(s.evaluate_at(7), sc(7, 1));
    }

    #[test]
    fn probabilistic_choice_sensitivity() {
        // x_{n+1} = x_n + 1 with prob p: E(x_n) = n p, sensitivity n
        let src = "x = 0\nwhile true:\n    x = x + 1 {p} x\nend\n";
        let (ast, class) = prepared(src);
        let s = solve_sensitivity(&ast, &class, &Monom::var("x"), "p", &Limits::default())
            .unwrap();
        assert_eq!(s.evaluate_at(5), sc(5, 1));
        assert_eq!(s.evaluate_at(0), sc(0, 1));
    }

    #[test]
    fn geometric_decay_in_parameter() {
        // x_{n+1} = p x_n from x_0 = 1: E(x_n) = p^n, sensitivity n p^(n-1)
        let src = "x = 1\nwhile true:\n    x = p * x\nend\n";
        let (ast, class) = prepared(src);
        let s = solve_sensitivity(&ast, &class, &Monom::var("x"), "p", &Limits::default())
            .unwrap();
        // at n = 4: 4 p^3
        let p = Coeff::param("p");
        let expect = Field::mul(&<Coeff as Field>::from_int(4), &Field::pow(&p, 3));
        assert_eq!(s.evaluate_at(4).a, expect);
    }

    #[test]
    fn sensitivity_through_unsolvable_subsystem() {
        // w, x blow up non-linearly but never read p; u mixes them with a
        // p-scaled solvable part, so d/dp E(u) still has a closed form
        let src = "w = 1\nx = 2\ny = 3\nu = 0\nwhile true:\n    w = 5 * w + x**2\n    x = 5 + w + x\n    y = y - 5 * p\n    u = x + p * y\nend\n";
        let (ast, class) = prepared(src);
        assert!(class.defective.contains("w"));
        assert!(class.defective.contains("x"));
        assert!(class.defective.contains("u"));
        // the plain moment has no closed form
        assert!(matches!(
            moment_system(&ast, &class, &[Monom::var("u")], &Limits::default()),
            Err(Error::DefectiveDependency(_))
        ));
        let s = solve_sensitivity(&ast, &class, &Monom::var("u"), "p", &Limits::default())
            .unwrap();
        // E(u_{n+1}) = E(x_{n+1}) + p E(y_{n+1}) with E(y_n) = 3 - 5 n p,
        // so d/dp E(u_n) = E(y_n) + p dE(y_n) = 3 - 10 n p (for n >= 1)
        let p = Coeff::param("p");
        let at = |n: i64| {
            Field::sub(
                &<Coeff as Field>::from_int(3),
                &Field::mul(&<Coeff as Field>::from_int(10 * n), &p),
            )
        };
        assert_eq!(s.evaluate_at(1).a, at(1));
        assert_eq!(s.evaluate_at(6).a, at(6));
    }
}
