//! Monte Carlo interpreter for the loop language, used as an independent
//! statistical cross-check of the exact pipeline. This is the only module
//! that computes with floating point.
//!
//! Every sample runs on its own deterministic random stream derived from
//! the seed, so results are reproducible and independent of evaluation
//! order.

use crate::error::{Error, Result};
use crate::frontend::{
    AssignRhs, Assignment, Ast, BoolExpr, CmpOp, DistKind, Expr, Statement,
};
use crate::moments::{cumulant_from_raw, MomentGoal};
use crate::recurrences::Monom;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::Distribution;
use std::collections::BTreeMap;

/// One sampled execution: variable values after initialization (index 0)
/// and after each of the `n` iterations.
#[derive(Clone, Debug, PartialEq)]
pub struct Trace {
    pub seed: u64,
    pub values: Vec<BTreeMap<String, f64>>,
}

const TRUNC_REJECTION_CAP: usize = 1_000_000;

/// Run `samples` independent executions of `n` iterations each.
/// All symbolic parameters must be bound to rational values.
pub fn run_samples(
    ast: &Ast,
    n: usize,
    samples: usize,
    seed: u64,
    bindings: &BTreeMap<String, BigRational>,
) -> Result<Vec<Trace>> {
    let mut env_base: BTreeMap<String, f64> = BTreeMap::new();
    for p in &ast.params {
        let v = bindings
            .get(p)
            .ok_or_else(|| Error::UnboundParameter(p.clone()))?;
        env_base.insert(p.clone(), v.to_f64().unwrap());
    }

    let mut traces = Vec::with_capacity(samples);
    for i in 0..samples {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        rng.set_stream(i as u64);
        let mut env = env_base.clone();
        for a in &ast.init {
            exec_assign(a, &mut env, &mut rng)?;
        }
        let mut values = Vec::with_capacity(n + 1);
        values.push(snapshot(&env, &ast.vars));
        for _ in 0..n {
            let live = match &ast.guard {
                Some(g) => eval_bool(g, &env)?,
                None => true,
            };
            if live {
                for s in &ast.body {
                    exec_stmt(s, &mut env, &mut rng)?;
                }
            }
            values.push(snapshot(&env, &ast.vars));
        }
        traces.push(Trace { seed, values });
    }
    Ok(traces)
}

fn snapshot(env: &BTreeMap<String, f64>, vars: &[String]) -> BTreeMap<String, f64> {
    vars.iter()
        .filter_map(|v| env.get(v).map(|&x| (v.clone(), x)))
        .collect()
}

fn exec_stmt(
    s: &Statement,
    env: &mut BTreeMap<String, f64>,
    rng: &mut ChaCha12Rng,
) -> Result<()> {
    match s {
        Statement::Assign(a) => exec_assign(a, env, rng),
        Statement::If(ifs) => {
            for (cond, body) in &ifs.branches {
                if eval_bool(cond, env)? {
                    for s in body {
                        exec_stmt(s, env, rng)?;
                    }
                    return Ok(());
                }
            }
            if let Some(body) = &ifs.else_branch {
                for s in body {
                    exec_stmt(s, env, rng)?;
                }
            }
            Ok(())
        }
    }
}

fn exec_assign(
    a: &Assignment,
    env: &mut BTreeMap<String, f64>,
    rng: &mut ChaCha12Rng,
) -> Result<()> {
    match &a.rhs {
        AssignRhs::Choice(alts) => {
            let u: f64 = rng.gen();
            let mut acc = 0.0;
            let mut chosen = alts.len() - 1;
            for (i, alt) in alts.iter().enumerate() {
                match &alt.prob {
                    Some(p) => acc += eval(p, env)?,
                    None => acc = 1.0,
                }
                if u < acc {
                    chosen = i;
                    break;
                }
            }
            // evaluate the whole tuple before writing: simultaneous update
            let vals: Vec<f64> = alts[chosen]
                .exprs
                .iter()
                .map(|e| eval(e, env))
                .collect::<Result<_>>()?;
            for (t, v) in a.targets.iter().zip(vals) {
                env.insert(t.clone(), v);
            }
            Ok(())
        }
        AssignRhs::Draw { shift, dist, args } => {
            let args: Vec<f64> = args.iter().map(|e| eval(e, env)).collect::<Result<_>>()?;
            let v = eval(shift, env)? + sample(*dist, &args, rng)?;
            env.insert(a.targets[0].clone(), v);
            Ok(())
        }
    }
}

fn sample(dist: DistKind, args: &[f64], rng: &mut ChaCha12Rng) -> Result<f64> {
    let dist_err = |e: String| Error::Invalid(format!("{} parameters: {}", dist.name(), e));
    Ok(match dist {
        DistKind::Bernoulli => {
            if rng.gen::<f64>() < args[0] {
                1.0
            } else {
                0.0
            }
        }
        DistKind::Normal => {
            // arguments are mean and variance
            let d = rand_distr::Normal::new(args[0], args[1].sqrt())
                .map_err(|e| dist_err(e.to_string()))?;
            d.sample(rng)
        }
        DistKind::TruncNormal => {
            let (mean, sd, lo, hi) = (args[0], args[1].sqrt(), args[2], args[3]);
            if !(lo < hi) {
                return Err(dist_err("empty support".into()));
            }
            let d = rand_distr::Normal::new(mean, sd).map_err(|e| dist_err(e.to_string()))?;
            let mut tries = 0;
            loop {
                let x = d.sample(rng);
                if x >= lo && x <= hi {
                    break x;
                }
                tries += 1;
                if tries > TRUNC_REJECTION_CAP {
                    return Err(Error::ResourceLimit(
                        "TruncNormal rejection sampling made no progress".into(),
                    ));
                }
            }
        }
        DistKind::Uniform => {
            if args[0] == args[1] {
                args[0]
            } else {
                rng.gen_range(args[0]..args[1])
            }
        }
        DistKind::DiscreteUniform => {
            let (a, b) = (args[0] as i64, args[1] as i64);
            if b < a {
                return Err(dist_err("empty range".into()));
            }
            rng.gen_range(a..=b) as f64
        }
        DistKind::Exponential => {
            let d = rand_distr::Exp::new(args[0]).map_err(|e| dist_err(e.to_string()))?;
            d.sample(rng)
        }
        DistKind::Gamma => {
            // shape and rate, matching the exact-moment convention
            let d = rand_distr::Gamma::new(args[0], 1.0 / args[1])
                .map_err(|e| dist_err(e.to_string()))?;
            d.sample(rng)
        }
        DistKind::Beta => {
            let d = rand_distr::Beta::new(args[0], args[1])
                .map_err(|e| dist_err(e.to_string()))?;
            d.sample(rng)
        }
        DistKind::Laplace => {
            let u: f64 = rng.gen::<f64>() - 0.5;
            args[0] - args[1] * u.signum() * (1.0 - 2.0 * u.abs()).ln()
        }
        DistKind::Categorical => {
            let u: f64 = rng.gen();
            let mut acc = 0.0;
            let mut value = args.len() - 1;
            for (i, p) in args.iter().enumerate() {
                acc += p;
                if u < acc {
                    value = i;
                    break;
                }
            }
            value as f64
        }
    })
}

fn eval(e: &Expr, env: &BTreeMap<String, f64>) -> Result<f64> {
    Ok(match e {
        Expr::Const(c) => c.to_f64().unwrap(),
        Expr::Ident(x) => *env
            .get(x)
            .ok_or_else(|| Error::UseBeforeDef(x.clone()))?,
        Expr::Add(a, b) => eval(a, env)? + eval(b, env)?,
        Expr::Sub(a, b) => eval(a, env)? - eval(b, env)?,
        Expr::Mul(a, b) => eval(a, env)? * eval(b, env)?,
        Expr::Div(a, b) => eval(a, env)? / eval(b, env)?,
        Expr::Neg(a) => -eval(a, env)?,
        Expr::Pow(a, k) => eval(a, env)?.powi(*k as i32),
    })
}

fn eval_bool(c: &BoolExpr, env: &BTreeMap<String, f64>) -> Result<bool> {
    Ok(match c {
        BoolExpr::True => true,
        BoolExpr::False => false,
        BoolExpr::Not(a) => !eval_bool(a, env)?,
        BoolExpr::And(a, b) => eval_bool(a, env)? && eval_bool(b, env)?,
        BoolExpr::Or(a, b) => eval_bool(a, env)? || eval_bool(b, env)?,
        BoolExpr::Cmp(l, op, r) => {
            let (l, r) = (eval(l, env)?, eval(r, env)?);
            match op {
                CmpOp::Eq => l == r,
                CmpOp::Ne => l != r,
                CmpOp::Lt => l < r,
                CmpOp::Le => l <= r,
                CmpOp::Gt => l > r,
                CmpOp::Ge => l >= r,
            }
        }
    })
}

fn monom_value(m: &Monom, values: &BTreeMap<String, f64>) -> f64 {
    m.0.iter()
        .map(|(v, &e)| values.get(v).copied().unwrap_or(f64::NAN).powi(e as i32))
        .product()
}

/// Sample estimate of a goal at iteration `n`, with its standard error.
///
/// Central moments and cumulants are plug-in estimates from sample raw
/// moments; their reported standard error is that of the centered powers
/// `(x - mean)^d`, which ignores the uncertainty of the mean itself.
pub fn estimate_moment(traces: &[Trace], goal: &MomentGoal, n: usize) -> (f64, f64) {
    let xs: Vec<f64> = traces
        .iter()
        .map(|t| monom_value(goal.base(), &t.values[n]))
        .collect();
    let k = xs.len() as f64;
    let mean_of = |ys: &[f64]| ys.iter().sum::<f64>() / ys.len() as f64;
    let stderr_of = |ys: &[f64], mean: f64| {
        if ys.len() < 2 {
            return 0.0;
        }
        let var = ys.iter().map(|y| (y - mean) * (y - mean)).sum::<f64>() / (k - 1.0);
        (var / k).sqrt()
    };
    match goal {
        MomentGoal::Raw(_) => {
            let m = mean_of(&xs);
            (m, stderr_of(&xs, m))
        }
        MomentGoal::Central(d, _) => {
            let mean = mean_of(&xs);
            let ys: Vec<f64> = xs.iter().map(|x| (x - mean).powi(*d as i32)).collect();
            let m = mean_of(&ys);
            (m, stderr_of(&ys, m))
        }
        MomentGoal::Cumulant(d, _) => {
            // exact rational plug-in from sample raw moments
            let raw: Vec<BigRational> = (0..=*d)
                .map(|j| {
                    let s = xs
                        .iter()
                        .map(|x| BigRational::from_float(x.powi(j as i32))
                                .unwrap_or_else(|| BigRational::from_integer(0.into())))
                        .sum::<BigRational>();
                    s / BigRational::from_integer((xs.len() as i64).into())
                })
                .collect();
            let kappa = cumulant_from_raw(&raw);
            let mean = raw[1].to_f64().unwrap();
            let ys: Vec<f64> = xs.iter().map(|x| (x - mean).powi(*d as i32)).collect();
            let my = mean_of(&ys);
            (kappa[*d as usize].to_f64().unwrap(), stderr_of(&ys, my))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::parse;
    use crate::recurrences::Monom;

    fn run(
        src: &str,
        n: usize,
        samples: usize,
        seed: u64,
        bindings: &[(&str, i64, i64)],
    ) -> Vec<Trace> {
        let ast = parse(src).unwrap();
        let bindings: BTreeMap<String, BigRational> = bindings
            .iter()
            .map(|(p, num, den)| {
                (
                    p.to_string(),
                    BigRational::new((*num).into(), (*den).into()),
                )
            })
            .collect();
        run_samples(&ast, n, samples, seed, &bindings).unwrap()
    }

    #[test]
    fn deterministic_fibonacci_trace() {
        let src = "a = 0\nb = 1\nwhile true:\n    a, b = b, a + b\nend\n";
        let traces = run(src, 10, 1, 7, &[]);
        assert_eq!(traces[0].values.len(), 11);
        assert_eq!(traces[0].values[10]["a"], 55.0);
    }

    #[test]
    fn fixed_seed_reproduces_traces() {
        let src = "x = 0\nwhile true:\n    x = Normal(x, 1)\nend\n";
        let a = run(src, 15, 8, 42, &[]);
        let b = run(src, 15, 8, 42, &[]);
        assert_eq!(a, b);
        let c = run(src, 15, 8, 43, &[]);
        assert_ne!(a, c);
    }

    #[test]
    fn unbound_parameter_rejected() {
        let src = "x = 0\nwhile true:\n    x = x + 1 {p} x - 1\nend\n";
        let ast = parse(src).unwrap();
        let err = run_samples(&ast, 3, 1, 0, &BTreeMap::new());
        assert!(matches!(err, Err(Error::UnboundParameter(p)) if p == "p"));
    }

    #[test]
    fn fair_walk_mean_stays_near_zero() {
        let src = "x = 0\nwhile true:\n    x = x + 1 {p} x - 1\nend\n";
        let traces = run(src, 20, 20_000, 1, &[("p", 1, 2)]);
        let goal = MomentGoal::Raw(Monom::var("x"));
        let (est, se) = estimate_moment(&traces, &goal, 20);
        assert!(est.abs() <= 4.0 * se, "est {} se {}", est, se);
    }

    #[test]
    fn second_moment_of_skewed_walk() {
        // x -> x+2 w.p. 1/2, x-1 w.p. 1/2: E(x_n^2) = (n^2 + 9n)/4
        let src = "x = 0\nwhile true:\n    x = x + 2 {1/2} x - 1\nend\n";
        let traces = run(src, 10, 20_000, 5, &[]);
        let goal = MomentGoal::Raw(Monom::var_pow("x", 2));
        let (est, se) = estimate_moment(&traces, &goal, 10);
        assert!((est - 47.5).abs() <= 4.0 * se, "est {} se {}", est, se);
    }

    #[test]
    fn guard_freezes_state_after_termination() {
        let src = "stop = 0\ncount = 0\nwhile stop == 0:\n    stop = Bernoulli(1/2)\n    count = count + 1\nend\n";
        let traces = run(src, 30, 20_000, 9, &[]);
        let goal = MomentGoal::Raw(Monom::var("count"));
        let (est, se) = estimate_moment(&traces, &goal, 30);
        assert!((est - 2.0).abs() <= 4.0 * se, "est {} se {}", est, se);
        // counts never move once stop is one
        for t in traces.iter().take(100) {
            assert_eq!(t.values[29]["count"], t.values[30]["count"]);
        }
    }

    #[test]
    fn constant_goal_is_exact() {
        let src = "x = 0\nwhile true:\n    x = x + 1\nend\n";
        let traces = run(src, 3, 50, 0, &[]);
        let goal = MomentGoal::Raw(Monom::one());
        assert_eq!(estimate_moment(&traces, &goal, 3), (1.0, 0.0));
    }

    #[test]
    fn central_moment_matches_accumulated_variance() {
        // x gains unit-variance noise each step: c2(x) at n is n
        let src = "x = 0\nwhile true:\n    x = Normal(x, 1)\nend\n";
        let traces = run(src, 5, 20_000, 11, &[]);
        let goal = MomentGoal::parse("c2(x)").unwrap();
        let (est, se) = estimate_moment(&traces, &goal, 5);
        assert!((est - 5.0).abs() <= 4.0 * se, "est {} se {}", est, se);
        // for a symmetric distribution the third cumulant vanishes
        let goal = MomentGoal::parse("k3(x)").unwrap();
        let (est, se) = estimate_moment(&traces, &goal, 5);
        assert!(est.abs() <= 4.0 * se, "est {} se {}", est, se);
    }

    #[test]
    fn truncated_normal_respects_bounds() {
        let src = "x = 0\nwhile true:\n    x = TruncNormal(0, 4, -1, 1)\nend\n";
        let traces = run(src, 1, 500, 3, &[]);
        for t in &traces {
            let x = t.values[1]["x"];
            assert!((-1.0..=1.0).contains(&x), "{} out of bounds", x);
        }
    }

    #[test]
    fn normalized_program_simulates_like_the_original() {
        use crate::frontend::normalize;
        let src = "stop = 0\ncount = 0\nwhile stop == 0:\n    stop = Bernoulli(1/2)\n    count = count + 1\nend\n";
        let raw = parse(src).unwrap();
        let norm = normalize(parse(src).unwrap()).unwrap();
        let a = run_samples(&raw, 12, 2_000, 21, &BTreeMap::new()).unwrap();
        let b = run_samples(&norm, 12, 2_000, 21, &BTreeMap::new()).unwrap();
        let goal = MomentGoal::Raw(Monom::var("count"));
        let (ea, _) = estimate_moment(&a, &goal, 12);
        let (eb, _) = estimate_moment(&b, &goal, 12);
        assert_eq!(ea, eb);
    }
}
