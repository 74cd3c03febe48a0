//! From a normalized loop to a linear recurrence system over expected values
//! of monomials in the program variables.
//!
//! The body is first lowered to a flat list of simultaneous probabilistic
//! assignments. Branching is compiled away by assigning each branch an
//! indicator variable (a polynomial in the finite-valued condition
//! variables, built by interpolation) and guarding the branch assignments
//! with it; this stays correct even when a branch modifies its own
//! condition variables, because the indicator is read before the branch
//! body runs. Draws contribute through their raw moments, powers of
//! finite-valued variables are rewritten modulo the variable's minimal
//! polynomial, and the expected value of any monomial after one iteration
//! becomes a linear combination of expected values of monomials before it.
//! Closing the set of needed monomials under this map yields the system.

use crate::algebra::{Coeff, Field, MPoly, PPoly};
use crate::error::{Error, Result};
use crate::frontend::ast::*;
use crate::frontend::poly::{expr_to_coeff, expr_to_poly};
use crate::frontend::restrict::Classification;
use crate::frontend::supports::SupportEnv;
use crate::limits::Limits;
use crate::moments::raw_moment;
use num_rational::BigRational;
use num_traits::Zero;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

/// A monomial in program variables, e.g. `x**2*y`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Monom(pub BTreeMap<String, u32>);

impl Monom {
    pub fn one() -> Monom {
        Monom(BTreeMap::new())
    }

    pub fn var(name: &str) -> Monom {
        Monom([(name.to_string(), 1)].into_iter().collect())
    }

    pub fn var_pow(name: &str, e: u32) -> Monom {
        if e == 0 {
            Monom::one()
        } else {
            Monom([(name.to_string(), e)].into_iter().collect())
        }
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn mul(&self, other: &Monom) -> Monom {
        let mut out = self.0.clone();
        for (v, e) in &other.0 {
            *out.entry(v.clone()).or_insert(0) += e;
        }
        Monom(out)
    }

    pub fn degree(&self) -> u32 {
        self.0.values().sum()
    }

    pub fn vars(&self) -> impl Iterator<Item = &String> {
        self.0.keys()
    }

    pub fn to_poly(&self) -> PPoly {
        let mut p = MPoly::one();
        for (v, &e) in &self.0 {
            p = p.mul(&MPoly::var_pow(v, e));
        }
        p
    }
}

impl fmt::Display for Monom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        let parts: Vec<String> = self
            .0
            .iter()
            .map(|(v, &e)| {
                if e == 1 {
                    v.clone()
                } else {
                    format!("{}**{}", v, e)
                }
            })
            .collect();
        write!(f, "{}", parts.join("*"))
    }
}

/// A centered draw with constant arguments, bound to a one-shot symbol.
#[derive(Clone, Debug)]
pub struct DrawRef {
    pub sym: String,
    pub dist: DistKind,
    pub args: Vec<Coeff>,
}

/// Flat simultaneous probabilistic assignment.
#[derive(Clone, Debug)]
pub struct LinStmt {
    pub targets: Vec<String>,
    /// (values per target, probability); probabilities sum to one.
    pub alts: Vec<(Vec<PPoly>, Coeff)>,
    pub draw: Option<DrawRef>,
}

const IVERSON_TUPLE_CAP: usize = 4096;

fn eval_cond(cond: &BoolExpr, tuple: &BTreeMap<String, BigRational>) -> Result<bool> {
    Ok(match cond {
        BoolExpr::True => true,
        BoolExpr::False => false,
        BoolExpr::Not(a) => !eval_cond(a, tuple)?,
        BoolExpr::And(a, b) => eval_cond(a, tuple)? && eval_cond(b, tuple)?,
        BoolExpr::Or(a, b) => eval_cond(a, tuple)? || eval_cond(b, tuple)?,
        BoolExpr::Cmp(l, op, r) => {
            let lv = eval_num(l, tuple)?;
            let rv = eval_num(r, tuple)?;
            match op {
                CmpOp::Eq => lv == rv,
                CmpOp::Ne => lv != rv,
                CmpOp::Lt => lv < rv,
                CmpOp::Le => lv <= rv,
                CmpOp::Gt => lv > rv,
                CmpOp::Ge => lv >= rv,
            }
        }
    })
}

fn eval_num(e: &Expr, tuple: &BTreeMap<String, BigRational>) -> Result<BigRational> {
    let fail = || {
        Error::NotFinite(format!(
            "cannot decide condition expression `{}` (symbolic parameter in a comparison)",
            e
        ))
    };
    Ok(match e {
        Expr::Const(c) => c.clone(),
        Expr::Ident(x) => tuple.get(x).cloned().ok_or_else(fail)?,
        Expr::Add(a, b) => eval_num(a, tuple)? + eval_num(b, tuple)?,
        Expr::Sub(a, b) => eval_num(a, tuple)? - eval_num(b, tuple)?,
        Expr::Mul(a, b) => eval_num(a, tuple)? * eval_num(b, tuple)?,
        Expr::Div(a, b) => {
            let d = eval_num(b, tuple)?;
            if Zero::is_zero(&d) {
                return Err(fail());
            }
            eval_num(a, tuple)? / d
        }
        Expr::Neg(a) => -eval_num(a, tuple)?,
        Expr::Pow(a, k) => num_traits::pow::pow(eval_num(a, tuple)?, *k as usize),
    })
}

/// Lagrange basis polynomial for value `a` over a finite support.
fn lagrange_basis(var: &str, a: &BigRational, support: &[BigRational]) -> PPoly {
    let mut p: PPoly = MPoly::one();
    let x: PPoly = MPoly::var(var);
    for b in support {
        if b == a {
            continue;
        }
        let denom = a - b;
        let factor = x
            .sub(&MPoly::constant(Coeff::from_rat(b)))
            .scale(&Coeff::from_rat(&denom.recip()));
        p = p.mul(&factor);
    }
    p
}

/// Rewrite powers of finite-valued variables modulo their minimal
/// polynomials, capping per-variable degrees at |support| - 1.
pub fn reduce_powers(p: &PPoly, supports: &SupportEnv) -> PPoly {
    let mut p = p.clone();
    let vars: Vec<String> = p.vars().to_vec();
    for v in vars {
        let support = match supports.get(&v).and_then(|s| s.as_ref()) {
            Some(s) if !s.is_empty() => s,
            _ => continue,
        };
        let m = support.len() as u32;
        if p.degree_in(&v) < m {
            continue;
        }
        let values: Vec<BigRational> = support.iter().cloned().collect();
        let table = power_table(&v, &values, p.degree_in(&v));
        let coeffs = p.univariate_in(&v);
        let mut acc: PPoly = MPoly::zero();
        for (k, c) in coeffs.into_iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            acc = acc.add(&c.mul(&table[k]));
        }
        p = acc;
    }
    p
}

/// x^k mod prod (x - a) for k = 0..=max_deg.
fn power_table(var: &str, values: &[BigRational], max_deg: u32) -> Vec<PPoly> {
    let m = values.len();
    // minimal polynomial, monic of degree m
    let x: PPoly = MPoly::var(var);
    let mut mu: PPoly = MPoly::one();
    for a in values {
        mu = mu.mul(&x.sub(&MPoly::constant(Coeff::from_rat(a))));
    }
    // x^m = x^m - mu  (mu is monic)
    let wrap = MPoly::var_pow(var, m as u32).sub(&mu);
    let mut table: Vec<PPoly> = Vec::with_capacity(max_deg as usize + 1);
    for k in 0..=max_deg as usize {
        if k < m {
            table.push(MPoly::var_pow(var, k as u32));
        } else {
            let prev = table[k - 1].mul(&x);
            // reduce the (single possible) x^m term
            let coeffs = prev.univariate_in(var);
            let mut red: PPoly = MPoly::zero();
            for (j, c) in coeffs.into_iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                if j == m {
                    red = red.add(&c.mul(&wrap));
                } else {
                    red = red.add(&c.mul(&MPoly::var_pow(var, j as u32)));
                }
            }
            table.push(red);
        }
    }
    table
}

/// Lower the loop body into flat simultaneous assignments.
/// Branches become indicator-guarded assignments; every draw gets a fresh
/// one-shot symbol that later statements cannot observe.
pub fn lower_body(ast: &Ast, class: &Classification, _limits: &Limits) -> Result<Vec<LinStmt>> {
    let is_param = |s: &str| ast.is_param(s);
    let mut out: Vec<LinStmt> = Vec::new();
    let mut fresh = 0usize;
    lower_stmts(
        &ast.body,
        &Vec::new(),
        &mut out,
        &mut fresh,
        &class.supports,
        &is_param,
    )?;
    Ok(out)
}

/// Indicator variables introduced by lowering use this prefix; the lexer
/// rejects `#`, so no program variable can collide.
pub const COND_PREFIX: &str = "#c";
const DRAW_PREFIX: &str = "#d";

fn lower_stmts(
    stmts: &[Statement],
    guards: &[String],
    out: &mut Vec<LinStmt>,
    fresh: &mut usize,
    supports: &SupportEnv,
    is_param: &dyn Fn(&str) -> bool,
) -> Result<()> {
    for s in stmts {
        match s {
            Statement::Assign(a) => {
                out.push(lower_assign(a, guards, fresh, is_param)?);
            }
            Statement::If(ifs) => {
                // selection polynomial for branch i: cond_i holds and no
                // earlier condition does
                let indicators: Vec<PPoly> = ifs
                    .branches
                    .iter()
                    .map(|(c, _)| iverson_poly(c, supports, is_param))
                    .collect::<Result<_>>()?;
                let mut none_before: PPoly = MPoly::one();
                let mut selections: Vec<PPoly> = Vec::new();
                for ind in &indicators {
                    selections.push(none_before.mul(ind));
                    none_before = none_before.mul(&MPoly::one().sub(ind));
                }
                let else_selection = none_before;
                let mut branches: Vec<(&PPoly, &Vec<Statement>)> = ifs
                    .branches
                    .iter()
                    .zip(selections.iter())
                    .map(|((_, b), s)| (s, b))
                    .collect();
                let else_body;
                if let Some(e) = &ifs.else_branch {
                    else_body = e;
                    branches.push((&else_selection, else_body));
                }
                for (sel, body) in branches {
                    let cname = format!("{}{}", COND_PREFIX, *fresh);
                    *fresh += 1;
                    // the indicator is captured before the branch runs, so
                    // branch code may overwrite its own condition variables
                    out.push(LinStmt {
                        targets: vec![cname.clone()],
                        alts: vec![(vec![reduce_powers(sel, supports)], Field::one())],
                        draw: None,
                    });
                    let mut inner = guards.to_vec();
                    inner.push(cname);
                    lower_stmts(body, &inner, out, fresh, supports, is_param)?;
                }
            }
        }
    }
    Ok(())
}

/// Indicator polynomial of a condition over finite-valued variables: equals
/// 1 on satisfying valuations of the variables' supports and 0 elsewhere.
pub fn iverson_poly(
    cond: &BoolExpr,
    supports: &SupportEnv,
    is_param: &dyn Fn(&str) -> bool,
) -> Result<PPoly> {
    // enumerate valuations of the condition's finite variables
    let mut idents = BTreeSet::new();
    cond.idents(&mut idents);
    let vars: Vec<String> = idents.into_iter().filter(|v| !is_param(v)).collect();
    let mut value_sets: Vec<(String, Vec<BigRational>)> = Vec::new();
    let mut combos: usize = 1;
    for v in &vars {
        let support = supports.get(v).and_then(|s| s.as_ref()).ok_or_else(|| {
            Error::NotFinite(format!(
                "condition variable `{}` has no known finite value set",
                v
            ))
        })?;
        combos = combos.saturating_mul(support.len().max(1));
        value_sets.push((v.clone(), support.iter().cloned().collect()));
    }
    if combos > IVERSON_TUPLE_CAP {
        return Err(Error::ResourceLimit(format!(
            "condition over {} valuations exceeds cap {}",
            combos, IVERSON_TUPLE_CAP
        )));
    }
    let mut acc: PPoly = MPoly::zero();
    let mut idx = vec![0usize; value_sets.len()];
    loop {
        let tuple: BTreeMap<String, BigRational> = value_sets
            .iter()
            .zip(idx.iter())
            .map(|((v, vals), &i)| (v.clone(), vals[i].clone()))
            .collect();
        if eval_cond(cond, &tuple)? {
            let mut basis: PPoly = MPoly::one();
            for ((v, vals), &i) in value_sets.iter().zip(idx.iter()) {
                basis = basis.mul(&lagrange_basis(v, &vals[i], vals));
            }
            acc = acc.add(&basis);
        }
        // advance the odometer
        let mut k = 0;
        loop {
            if k == idx.len() {
                return Ok(acc);
            }
            idx[k] += 1;
            if idx[k] < value_sets[k].1.len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

fn lower_assign(
    a: &Assignment,
    guards: &[String],
    fresh: &mut usize,
    is_param: &dyn Fn(&str) -> bool,
) -> Result<LinStmt> {
    // guarded value: g * new + (1 - g) * old, with g the product of
    // enclosing branch indicators
    let guard_poly: PPoly = guards
        .iter()
        .fold(MPoly::one(), |acc, g| acc.mul(&MPoly::var(g)));
    let guarded = |target: &str, new: PPoly| -> PPoly {
        if guards.is_empty() {
            new
        } else {
            let old: PPoly = MPoly::var(target);
            guard_poly
                .mul(&new)
                .add(&MPoly::one().sub(&guard_poly).mul(&old))
        }
    };
    match &a.rhs {
        AssignRhs::Choice(alts) => {
            let mut lowered = Vec::new();
            for alt in alts {
                let prob = match &alt.prob {
                    Some(p) => expr_to_coeff(p, is_param)?,
                    None => Field::one(),
                };
                let vals: Vec<PPoly> = alt
                    .exprs
                    .iter()
                    .zip(a.targets.iter())
                    .map(|(e, t)| Ok(guarded(t, expr_to_poly(e, is_param)?)))
                    .collect::<Result<_>>()?;
                lowered.push((vals, prob));
            }
            Ok(LinStmt {
                targets: a.targets.clone(),
                alts: lowered,
                draw: None,
            })
        }
        AssignRhs::Draw { shift, dist, args } => {
            let sym = format!("{}{}", DRAW_PREFIX, *fresh);
            *fresh += 1;
            let args: Vec<Coeff> = args
                .iter()
                .map(|e| expr_to_coeff(e, is_param))
                .collect::<Result<_>>()?;
            let value = expr_to_poly(shift, is_param)?.add(&MPoly::var(&sym));
            Ok(LinStmt {
                targets: vec![a.targets[0].clone()],
                alts: vec![(vec![guarded(&a.targets[0], value)], Field::one())],
                draw: Some(DrawRef {
                    sym,
                    dist: *dist,
                    args,
                }),
            })
        }
    }
}

/// Expected value of `p` over one execution of the lowered statements,
/// as a polynomial in the variable values before execution.
pub fn expected_after(
    p: &PPoly,
    stmts: &[LinStmt],
    supports: &SupportEnv,
) -> Result<PPoly> {
    let mut p = p.clone();
    for s in stmts.iter().rev() {
        if p.is_zero() {
            break;
        }
        let touches = s.targets.iter().any(|t| p.contains_var(t))
            || s
                .draw
                .as_ref()
                .map(|d| p.contains_var(&d.sym))
                .unwrap_or(false);
        if !touches {
            continue;
        }
        let mut acc: PPoly = MPoly::zero();
        for (vals, prob) in &s.alts {
            let map: BTreeMap<String, PPoly> = s
                .targets
                .iter()
                .cloned()
                .zip(vals.iter().cloned())
                .collect();
            acc = acc.add(&p.substitute(&map).scale(prob));
        }
        if let Some(d) = &s.draw {
            // the draw symbol is independent of everything before it
            let coeffs = acc.univariate_in(&d.sym);
            let mut folded: PPoly = MPoly::zero();
            for (k, c) in coeffs.into_iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                let mk = raw_moment(d.dist, &d.args, k as u32)?;
                folded = folded.add(&c.scale(&mk));
            }
            acc = folded;
        }
        p = reduce_powers(&acc, supports);
    }
    Ok(p)
}

#[derive(Clone, Debug)]
pub struct RecurrenceSystem {
    /// Monomials whose expected values form the state vector.
    /// Contains the constant monomial `1` whenever any row needs it.
    pub state: Vec<Monom>,
    /// Row i: E(state[i]) after an iteration = sum_j matrix[i][j] * E(state[j]).
    pub matrix: Vec<Vec<Coeff>>,
    /// E(state[i]) before the first iteration.
    pub initial: Vec<Coeff>,
}

impl RecurrenceSystem {
    pub fn index_of(&self, m: &Monom) -> Option<usize> {
        self.state.iter().position(|x| x == m)
    }
}

pub(crate) fn poly_to_monomials(p: &PPoly) -> Vec<(Monom, Coeff)> {
    p.terms()
        .map(|(exps, c)| {
            let mono = Monom(
                exps.iter()
                    .enumerate()
                    .filter(|(_, &e)| e > 0)
                    .map(|(i, &e)| (p.vars()[i].clone(), e))
                    .collect(),
            );
            (mono, c.clone())
        })
        .collect()
}

/// Build the linear system of expected values closed over the given goal
/// monomials.
pub fn moment_system(
    ast: &Ast,
    class: &Classification,
    goals: &[Monom],
    limits: &Limits,
) -> Result<RecurrenceSystem> {
    for g in goals {
        let bad: Vec<String> = g
            .vars()
            .filter(|v| class.defective.contains(*v))
            .cloned()
            .collect();
        if !bad.is_empty() {
            return Err(Error::DefectiveDependency(bad));
        }
    }
    let stmts = lower_body(ast, class, limits)?;
    let mut state: Vec<Monom> = Vec::new();
    let mut rows: BTreeMap<Monom, Vec<(Monom, Coeff)>> = BTreeMap::new();
    let mut queue: Vec<Monom> = goals.to_vec();
    while let Some(m) = queue.pop() {
        if rows.contains_key(&m) {
            continue;
        }
        let bad: Vec<String> = m
            .vars()
            .filter(|v| class.defective.contains(*v))
            .cloned()
            .collect();
        if !bad.is_empty() {
            return Err(Error::DefectiveDependency(bad));
        }
        if state.len() >= limits.max_state_monomials {
            return Err(Error::ResourceLimit(format!(
                "recurrence state exceeds {} monomials",
                limits.max_state_monomials
            )));
        }
        state.push(m.clone());
        let after = expected_after(&m.to_poly(), &stmts, &class.supports)?;
        let terms = poly_to_monomials(&after);
        for (dep, _) in &terms {
            if !rows.contains_key(dep) {
                queue.push(dep.clone());
            }
        }
        rows.insert(m, terms);
    }
    // deterministic order: by (degree, display)
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
    let initial = initial_values(ast, class, &state)?;
    Ok(RecurrenceSystem {
        state,
        matrix,
        initial,
    })
}

/// Expected values of the state monomials after the initialization block.
/// Variables without an initial value stay symbolic: `x` becomes the
/// parameter `x0`.
pub fn initial_values(
    ast: &Ast,
    class: &Classification,
    state: &[Monom],
) -> Result<Vec<Coeff>> {
    let is_param = |s: &str| ast.is_param(s);
    // lower init statements with the same machinery (no branches allowed
    // in the init block by the grammar)
    let mut stmts = Vec::new();
    let mut fresh = 0usize;
    for a in &ast.init {
        stmts.push(lower_assign(a, &[], &mut fresh, &is_param)?);
    }
    state
        .iter()
        .map(|m| {
            let p = expected_after(&m.to_poly(), &stmts, &class.supports)?;
            // remaining variables were never initialized
            let mut subst: BTreeMap<String, PPoly> = BTreeMap::new();
            for v in p.vars() {
                subst.insert(
                    v.clone(),
                    MPoly::constant(Coeff::param(&format!("{}0", v))),
                );
            }
            let folded = p.substitute(&subst);
            Ok(folded.as_constant().expect("all variables substituted"))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::normalize::normalize;
    use crate::frontend::parser::parse;
    use crate::frontend::restrict::classify;
    use num_bigint::BigInt;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }
    fn c(n: i64, d: i64) -> Coeff {
        Field::from_rat(&q(n, d))
    }

    fn system(src: &str, goals: &[Monom]) -> RecurrenceSystem {
        let ast = normalize(parse(src).unwrap()).unwrap();
        let class = classify(&ast, &Limits::default()).unwrap();
        moment_system(&ast, &class, goals, &Limits::default()).unwrap()
    }

    /// Iterate the recurrence directly: exact ground truth for closed forms.
    pub fn iterate(sys: &RecurrenceSystem, n: usize) -> Vec<Vec<Coeff>> {
        let mut out = vec![sys.initial.clone()];
        for _ in 0..n {
            let prev = out.last().unwrap();
            let next: Vec<Coeff> = sys
                .matrix
                .iter()
                .map(|row| {
                    row.iter()
                        .zip(prev.iter())
                        .fold(<Coeff as Field>::zero(), |acc, (a, x)| {
                            Field::add(&acc, &Field::mul(a, x))
                        })
                })
                .collect();
            out.push(next);
        }
        out
    }

    #[test]
    fn asymmetric_random_walk_mean() {
        // x -> x+2 w.p. 1/2, x-1 w.p. 1/2: E(x_{n+1}) = E(x_n) + 1/2
        let sys = system(
            "x = 0\nwhile true:\n    x = x + 2 {1/2} x - 1\nend\n",
            &[Monom::var("x")],
        );
        assert_eq!(sys.state, vec![Monom::one(), Monom::var("x")]);
        let i1 = sys.index_of(&Monom::var("x")).unwrap();
        let i0 = sys.index_of(&Monom::one()).unwrap();
        assert_eq!(sys.matrix[i1][i1], c(1, 1));
        assert_eq!(sys.matrix[i1][i0], c(1, 2));
        let vals = iterate(&sys, 8);
        assert_eq!(vals[8][i1], c(4, 1));
    }

    #[test]
    fn second_moment_through_draw() {
        // x = x + g with g ~ Normal(0, 1): E(x^2) grows by 1 each step
        let sys = system(
            "x = 0\ng = 0\nwhile true:\n    g = Normal(0, 1)\n    x = x + g\nend\n",
            &[Monom::var_pow("x", 2)],
        );
        let vals = iterate(&sys, 5);
        let ix2 = sys.index_of(&Monom::var_pow("x", 2)).unwrap();
        assert_eq!(vals[5][ix2], c(5, 1));
    }

    #[test]
    fn guard_as_branch_keeps_old_value() {
        // while stop == 0: stop = Bernoulli(1/2); count = count + 1
        let src = "stop = 0\ncount = 0\nwhile stop == 0:\n    stop = Bernoulli(1/2)\n    count = count + 1\nend\n";
        let sys = system(src, &[Monom::var("count"), Monom::var("stop")]);
        let vals = iterate(&sys, 4);
        let ic = sys.index_of(&Monom::var("count")).unwrap();
        let is = sys.index_of(&Monom::var("stop")).unwrap();
        // E(count_n) = 2 - 2 (1/2)^n, E(stop_n) = 1 - (1/2)^n
        assert_eq!(vals[4][ic], Field::sub(&c(2, 1), &c(2, 16)));
        assert_eq!(vals[4][is], Field::sub(&c(1, 1), &c(1, 16)));
    }

    #[test]
    fn branch_modifying_its_own_condition() {
        // the branch flips d, but the indicator must use the entry value
        let src = "d = 0\nx = 0\nwhile true:\n    if d == 0:\n        d = 1\n        x = x + 1\n    end\nend\n";
        let sys = system(src, &[Monom::var("x")]);
        let vals = iterate(&sys, 3);
        let ix = sys.index_of(&Monom::var("x")).unwrap();
        // only the first iteration increments x
        assert_eq!(vals[1][ix], c(1, 1));
        assert_eq!(vals[3][ix], c(1, 1));
    }

    #[test]
    fn finite_power_reduction_closes_system() {
        // stop in {0,1}: stop**2 = stop, so the state stays small
        let src = "stop = 0\nx = 1\nwhile true:\n    stop = Bernoulli(1/2)\n    x = x + stop**2\nend\n";
        let sys = system(src, &[Monom::var("x")]);
        assert!(sys.state.len() <= 4);
        let vals = iterate(&sys, 6);
        let ix = sys.index_of(&Monom::var("x")).unwrap();
        assert_eq!(vals[6][ix], c(4, 1));
    }

    #[test]
    fn tuple_assignment_is_simultaneous() {
        let src = "a = 0\nb = 1\nwhile true:\n    a, b = b, a\nend\n";
        let sys = system(src, &[Monom::var("a"), Monom::var("b")]);
        let vals = iterate(&sys, 3);
        let ia = sys.index_of(&Monom::var("a")).unwrap();
        let ib = sys.index_of(&Monom::var("b")).unwrap();
        assert_eq!(vals[3][ia], c(1, 1));
        assert_eq!(vals[3][ib], c(0, 1));
    }

    #[test]
    fn defective_goal_rejected() {
        let src = "x = 0\nwhile true:\n    x = x**2 + 1\nend\n";
        let ast = normalize(parse(src).unwrap()).unwrap();
        let class = classify(&ast, &Limits::default()).unwrap();
        let err = moment_system(&ast, &class, &[Monom::var("x")], &Limits::default());
        assert!(matches!(err, Err(Error::DefectiveDependency(_))));
    }

    #[test]
    fn parameterized_initial_values() {
        let src = "x = x0\nwhile true:\n    x = 2*x\nend\n";
        let sys = system(src, &[Monom::var("x")]);
        let ix = sys.index_of(&Monom::var("x")).unwrap();
        assert_eq!(sys.initial[ix], Coeff::param("x0"));
    }

    #[test]
    fn random_walk_square_moments() {
        // x -> x+2 {1/2} x-1: E(x_n) = n/2, E(x_n^2) = (n^2 + 9n)/4
        let sys = system(
            "x = 0\nwhile true:\n    x = x + 2 {1/2} x - 1\nend\n",
            &[Monom::var_pow("x", 2)],
        );
        let vals = iterate(&sys, 6);
        let ix2 = sys.index_of(&Monom::var_pow("x", 2)).unwrap();
        assert_eq!(vals[6][ix2], c(36 + 54, 4));
    }
}
