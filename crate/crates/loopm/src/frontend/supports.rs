//! Finite-support analysis: an abstract fixpoint computing, per variable, a
//! finite set of rational values the variable can ever take, or `None` when
//! no such finite set is found within the configured bounds.
//!
//! Used for three things: checking that guard and branch-condition variables
//! range over finitely many values, interpolating conditions by polynomials,
//! and rewriting powers of finite-support variables to keep recurrence
//! systems linear.

use super::ast::*;
use crate::limits::Limits;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use std::collections::{BTreeMap, BTreeSet};

/// `Some(values)`: the variable only ever holds values from the set.
/// `None`: possibly infinite (or not provably finite, e.g. parameter-valued).
pub type Support = Option<BTreeSet<BigRational>>;

pub type SupportEnv = BTreeMap<String, Support>;

/// Values this large widen the analysis to "not finite": they only arise
/// from diverging value chains, and keeping them makes the fixpoint spend
/// unbounded time on astronomically long integers.
const MAX_VALUE_BITS: u64 = 128;

fn too_big(v: &BigRational) -> bool {
    v.numer().bits() > MAX_VALUE_BITS || v.denom().bits() > MAX_VALUE_BITS
}

fn join(a: &Support, b: &Support, cap: usize) -> Support {
    match (a, b) {
        (Some(x), Some(y)) => {
            let u: BTreeSet<BigRational> = x.union(y).cloned().collect();
            if u.len() > cap {
                None
            } else {
                Some(u)
            }
        }
        _ => None,
    }
}

/// Values an expression can take under the given variable supports.
fn expr_support(e: &Expr, env: &SupportEnv, cap: usize) -> Support {
    let mut vars = BTreeSet::new();
    e.idents(&mut vars);
    // identifiers without a support entry are parameters: unknown single
    // value, so not a known finite set
    let mut var_sets: Vec<(String, Vec<BigRational>)> = Vec::new();
    let mut combos: usize = 1;
    for v in vars {
        match env.get(&v) {
            Some(Some(set)) => {
                combos = combos.saturating_mul(set.len().max(1));
                var_sets.push((v, set.iter().cloned().collect()));
            }
            _ => return None,
        }
    }
    if combos > cap {
        return None;
    }
    let mut out = BTreeSet::new();
    let mut assignment: BTreeMap<String, BigRational> = BTreeMap::new();
    fn rec(
        e: &Expr,
        var_sets: &[(String, Vec<BigRational>)],
        assignment: &mut BTreeMap<String, BigRational>,
        out: &mut BTreeSet<BigRational>,
    ) -> bool {
        match var_sets.split_first() {
            None => match eval_expr(e, assignment) {
                Some(v) if !too_big(&v) => {
                    out.insert(v);
                    true
                }
                _ => false,
            },
            Some(((name, vals), rest)) => {
                for v in vals {
                    assignment.insert(name.clone(), v.clone());
                    if !rec(e, rest, assignment, out) {
                        return false;
                    }
                }
                assignment.remove(name);
                true
            }
        }
    }
    if !rec(e, &var_sets, &mut assignment, &mut out) {
        return None;
    }
    if out.len() > cap {
        None
    } else {
        Some(out)
    }
}

fn eval_expr(e: &Expr, env: &BTreeMap<String, BigRational>) -> Option<BigRational> {
    Some(match e {
        Expr::Const(c) => c.clone(),
        Expr::Ident(x) => env.get(x)?.clone(),
        Expr::Add(a, b) => eval_expr(a, env)? + eval_expr(b, env)?,
        Expr::Sub(a, b) => eval_expr(a, env)? - eval_expr(b, env)?,
        Expr::Mul(a, b) => eval_expr(a, env)? * eval_expr(b, env)?,
        Expr::Div(a, b) => {
            let d = eval_expr(b, env)?;
            if d.is_zero() {
                return None;
            }
            eval_expr(a, env)? / d
        }
        Expr::Neg(a) => -eval_expr(a, env)?,
        Expr::Pow(a, k) => num_traits::pow::pow(eval_expr(a, env)?, *k as usize),
    })
}

/// Support contributed by a draw.
fn draw_support(dist: DistKind, args: &[Expr], env: &SupportEnv, cap: usize) -> Support {
    match dist {
        DistKind::Bernoulli => Some(
            [BigRational::zero(), BigRational::one()]
                .into_iter()
                .collect(),
        ),
        DistKind::Categorical => Some(
            (0..args.len() as i64)
                .map(|i| BigRational::from_integer(i.into()))
                .collect(),
        ),
        DistKind::DiscreteUniform => {
            let lo = expr_support(&args[0], env, cap)?;
            let hi = expr_support(&args[1], env, cap)?;
            if lo.len() != 1 || hi.len() != 1 {
                return None;
            }
            let lo = lo.into_iter().next().unwrap();
            let hi = hi.into_iter().next().unwrap();
            if !lo.is_integer() || !hi.is_integer() {
                return None;
            }
            let a = lo.to_integer().to_i64()?;
            let b = hi.to_integer().to_i64()?;
            if b < a || (b - a) as usize + 1 > cap {
                return None;
            }
            Some((a..=b).map(|i| BigRational::from_integer(i.into())).collect())
        }
        _ => None,
    }
}

fn assign_support(a: &Assignment, env: &mut SupportEnv, cap: usize, widen: bool) {
    let mut new: Vec<(String, Support)> = Vec::new();
    match &a.rhs {
        AssignRhs::Choice(alts) => {
            for (ti, t) in a.targets.iter().enumerate() {
                let mut s: Support = Some(BTreeSet::new());
                for alt in alts {
                    s = join(&s, &expr_support(&alt.exprs[ti], env, cap), cap);
                }
                new.push((t.clone(), s));
            }
        }
        AssignRhs::Draw { shift, dist, args } => {
            let base = draw_support(*dist, args, env, cap);
            let sh = expr_support(shift, env, cap);
            let s = match (base, sh) {
                (Some(b), Some(sh)) => {
                    let mut out = BTreeSet::new();
                    for x in &b {
                        for y in &sh {
                            out.insert(x + y);
                        }
                    }
                    if out.len() > cap {
                        None
                    } else {
                        Some(out)
                    }
                }
                _ => None,
            };
            new.push((a.targets[0].clone(), s));
        }
    }
    for (t, s) in new {
        let s = if widen {
            join(env.get(&t).unwrap_or(&Some(BTreeSet::new())), &s, cap)
        } else {
            s
        };
        env.insert(t, s);
    }
}

fn stmts_support(stmts: &[Statement], env: &mut SupportEnv, cap: usize, widen: bool) {
    for s in stmts {
        match s {
            Statement::Assign(a) => assign_support(a, env, cap, widen),
            Statement::If(ifs) => {
                // join over all branches and over skipping the statement
                let mut joined = env.clone();
                for (_, b) in &ifs.branches {
                    let mut e = env.clone();
                    stmts_support(b, &mut e, cap, widen);
                    for (k, v) in e {
                        let cur = joined.entry(k).or_insert(None);
                        *cur = join(cur, &v, cap);
                    }
                }
                if let Some(eb) = &ifs.else_branch {
                    let mut e = env.clone();
                    stmts_support(eb, &mut e, cap, widen);
                    for (k, v) in e {
                        let cur = joined.entry(k).or_insert(None);
                        *cur = join(cur, &v, cap);
                    }
                }
                *env = joined;
            }
        }
    }
}

/// Fixpoint over loop iterations, widening to `None` past the configured
/// bounds on set size and iteration count.
pub fn variable_supports(ast: &Ast, limits: &Limits) -> SupportEnv {
    let cap = limits.support_values;
    let mut env: SupportEnv = ast
        .vars
        .iter()
        .map(|v| (v.clone(), Some(BTreeSet::new())))
        .collect();
    for a in &ast.init {
        assign_support(a, &mut env, cap, false);
    }
    for _ in 0..limits.support_iterations {
        let mut next = env.clone();
        stmts_support(&ast.body, &mut next, cap, true);
        // widen with previous env
        let mut changed = false;
        for (k, v) in &mut next {
            let joined = join(env.get(k).unwrap_or(&None), v, cap);
            if &joined != env.get(k).unwrap_or(&None) {
                changed = true;
            }
            *v = joined;
        }
        env = next;
        if !changed {
            return env;
        }
    }
    // not stabilized: anything still growing is deemed infinite
    let mut final_env = env.clone();
    let mut probe = env.clone();
    stmts_support(&ast.body, &mut probe, cap, true);
    for (k, v) in probe {
        let joined = join(env.get(&k).unwrap_or(&None), &v, cap);
        if &joined != env.get(&k).unwrap_or(&None) {
            final_env.insert(k, None);
        }
    }
    final_env
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::normalize::normalize;
    use crate::frontend::parser::parse;
    use num_bigint::BigInt;

    fn q(n: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(n))
    }

    fn supports_of(src: &str) -> SupportEnv {
        let ast = normalize(parse(src).unwrap()).unwrap();
        variable_supports(&ast, &Limits::default())
    }

    #[test]
    fn bernoulli_and_counter() {
        let env = supports_of(
            "stop = 0\ncount = 0\nwhile stop == 0:\n    stop = Bernoulli(1/2)\n    count = count + 1\nend\n",
        );
        assert_eq!(env["stop"], Some([q(0), q(1)].into_iter().collect()));
        assert_eq!(env["count"], None);
    }

    #[test]
    fn alternating_indicator() {
        let env = supports_of("z = 0\nwhile true:\n    z = 1 - z\nend\n");
        assert_eq!(env["z"], Some([q(0), q(1)].into_iter().collect()));
    }

    #[test]
    fn categorical_values() {
        let env = supports_of("d = 0\nwhile true:\n    d = Categorical(1/3, 1/3, 1/3)\nend\n");
        assert_eq!(env["d"], Some([q(0), q(1), q(2)].into_iter().collect()));
    }

    #[test]
    fn continuous_draw_is_infinite() {
        let env = supports_of("g = 0\nwhile true:\n    g = Normal(0, 1)\nend\n");
        assert_eq!(env["g"], None);
    }

    #[test]
    fn parameter_init_not_finite() {
        let env = supports_of("x = p\nwhile true:\n    x = x\nend\n");
        assert_eq!(env["x"], None);
    }

    #[test]
    fn discrete_uniform_range() {
        let env = supports_of("d = 0\nwhile true:\n    d = DiscreteUniform(1, 3)\nend\n");
        assert_eq!(env["d"], Some([q(0), q(1), q(2), q(3)].into_iter().collect()));
    }
}
