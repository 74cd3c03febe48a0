//! Pipeline orchestration behind the command-line binary: loads a program,
//! runs the requested analyses, and renders a deterministic text or JSON
//! report.

use crate::error::{Error, Result};
use crate::frontend::{classify, normalize, parse, Ast, Classification};
use crate::invariants::invariant_basis;
use crate::limits::Limits;
use crate::moments::{central_from_raw, cumulant_from_raw, MomentGoal};
use crate::recurrences::{moment_system, Monom};
use crate::sensitivity::solve_sensitivity;
use crate::simulator::{estimate_moment, run_samples, Trace};
use crate::solver::{solve, ExpPoly};
use crate::unsolvable::{synth_solvable_loop, synthesize_combinations, Combination};
use num_rational::BigRational;
use serde_json::json;
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutputFormat {
    Text,
    Json,
}

#[derive(Clone, Debug)]
pub struct SimulateOptions {
    pub iterations: usize,
    pub samples: usize,
    pub seed: u64,
    pub bindings: BTreeMap<String, BigRational>,
    /// Write all traces as CSV (sample, iteration, variable, value).
    pub export_traces: Option<PathBuf>,
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub benchmark: PathBuf,
    /// Empty means: expected values of all program variables.
    pub goals: Vec<MomentGoal>,
    pub invariants: bool,
    pub after_loop: bool,
    pub sens_diff: Option<String>,
    pub sens: Option<String>,
    pub synth_unsolv_inv: bool,
    pub synth_solv_loop: bool,
    pub inv_deg: u32,
    pub format: OutputFormat,
    pub simulate: Option<SimulateOptions>,
    pub limits: Limits,
}

/// Exit codes: success, analysis failure, usage error.
pub const EXIT_OK: i32 = 0;
pub const EXIT_ANALYSIS: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Default)]
struct Report {
    program: String,
    goals: Vec<(MomentGoal, Option<ExpPoly>)>,
    after_loop: Vec<(MomentGoal, String)>,
    invariants: Vec<String>,
    /// (parameter, goal, closed form of the derivative)
    sensitivities: Vec<(String, MomentGoal, ExpPoly)>,
    combinations: Vec<(Combination, Option<ExpPoly>)>,
    synthesized: Option<String>,
    simulations: Vec<(MomentGoal, f64, f64)>,
    diagnostics: Vec<(&'static str, String)>,
}

/// Run the configured analyses. Returns the exit code together with the
/// stdout and stderr payloads, so callers (and tests) control the actual
/// printing.
pub fn run(cfg: &RunConfig) -> (i32, String, String) {
    let mut report = Report {
        program: cfg.benchmark.display().to_string(),
        ..Report::default()
    };

    let src = match std::fs::read_to_string(&cfg.benchmark) {
        Ok(s) => s,
        Err(e) => {
            return (
                EXIT_USAGE,
                String::new(),
                format!("cannot read {}: {}\n", cfg.benchmark.display(), e),
            )
        }
    };
    if cfg.after_loop {
        // only meaningful when the loop has a real termination condition
        let guarded = parse(&src)
            .map(|a| a.guard.is_some())
            .unwrap_or(false);
        if !guarded {
            return (
                EXIT_USAGE,
                String::new(),
                "after_loop requires a loop with a non-trivial guard\n".to_string(),
            );
        }
    }

    match analyze(cfg, &src, &mut report) {
        Ok(()) => {}
        Err(e) => report.diagnostics.push((e.kind(), e.to_string())),
    }

    let stdout = match cfg.format {
        OutputFormat::Text => render_text(&report),
        OutputFormat::Json => render_json(&report),
    };
    let mut stderr = String::new();
    if cfg.format == OutputFormat::Text {
        for (kind, msg) in &report.diagnostics {
            let _ = writeln!(stderr, "error[{}]: {}", kind, msg);
        }
    }
    let code = if report.diagnostics.is_empty() {
        EXIT_OK
    } else {
        EXIT_ANALYSIS
    };
    (code, stdout, stderr)
}

fn analyze(cfg: &RunConfig, src: &str, report: &mut Report) -> Result<()> {
    let ast = normalize(parse(src)?)?;
    let class = classify(&ast, &cfg.limits)?;
    let goals: Vec<MomentGoal> = if cfg.goals.is_empty() {
        ast.vars
            .iter()
            .map(|v| MomentGoal::Raw(Monom::var(v)))
            .collect()
    } else {
        cfg.goals.clone()
    };

    if cfg.synth_unsolv_inv || cfg.synth_solv_loop {
        synth_modes(cfg, &ast, report)?;
    } else if let Some(param) = &cfg.sens {
        for g in &goals {
            match g {
                MomentGoal::Raw(m) => {
                    match solve_sensitivity(&ast, &class, m, param, &cfg.limits) {
                        Ok(e) => report.sensitivities.push((param.clone(), g.clone(), e)),
                        Err(e) => report.diagnostics.push((e.kind(), e.to_string())),
                    }
                }
                _ => report.diagnostics.push((
                    "InvalidInput",
                    format!("sensitivity recurrences support raw moments only, not {}", g),
                )),
            }
        }
    } else {
        moment_modes(cfg, &ast, &class, &goals, report);
    }

    if let Some(sim) = &cfg.simulate {
        simulate(sim, &ast, &goals, report);
    }
    Ok(())
}

/// Closed forms for the goals, plus the optional invariant, derivative, and
/// after-loop stages that consume them.
fn moment_modes(
    cfg: &RunConfig,
    ast: &Ast,
    class: &Classification,
    goals: &[MomentGoal],
    report: &mut Report,
) {
    let mut solved: BTreeMap<String, ExpPoly> = BTreeMap::new();
    for g in goals {
        let form = closed_form(ast, class, g, &cfg.limits);
        match form {
            Ok(e) => {
                solved.insert(g.to_string(), e.clone());
                if cfg.after_loop {
                    match e.limit_at_infinity() {
                        Ok(v) => report.after_loop.push((g.clone(), format!("{}", v))),
                        Err(err) => report.diagnostics.push((err.kind(), err.to_string())),
                    }
                }
                if let Some(param) = &cfg.sens_diff {
                    match e.derivative(param) {
                        Ok(d) => report.sensitivities.push((param.clone(), g.clone(), d)),
                        Err(err) => report.diagnostics.push((err.kind(), err.to_string())),
                    }
                }
                report.goals.push((g.clone(), Some(e)));
            }
            Err(e) => {
                report.diagnostics.push((e.kind(), e.to_string()));
                report.goals.push((g.clone(), None));
            }
        }
    }
    if cfg.invariants {
        match invariant_basis(&solved, &cfg.limits) {
            Ok(basis) => {
                report.invariants = basis
                    .generators
                    .iter()
                    .map(|g| format!("{} = 0", g))
                    .collect();
            }
            Err(e) => report.diagnostics.push((e.kind(), e.to_string())),
        }
    }
}

/// Closed form of one goal: raw moments of the needed powers, then the
/// central-moment or cumulant conversion on exponential polynomials.
fn closed_form(
    ast: &Ast,
    class: &Classification,
    goal: &MomentGoal,
    limits: &Limits,
) -> Result<ExpPoly> {
    let base = goal.base();
    let order = goal.order();
    let needed: Vec<Monom> = (1..=order)
        .map(|j| {
            let mut m = Monom::one();
            for _ in 0..j {
                m = m.mul(base);
            }
            m
        })
        .collect();
    let sys = moment_system(ast, class, &needed, limits)?;
    let forms = solve(&sys, &needed, limits)?;
    let raw: Vec<ExpPoly> = std::iter::once(ExpPoly::constant(
        crate::algebra::Surd::pure(crate::algebra::Field::one()),
    ))
    .chain(needed.iter().map(|m| forms[m].clone()))
    .collect();
    Ok(match goal {
        MomentGoal::Raw(_) => raw[1].clone(),
        MomentGoal::Central(d, _) => central_from_raw(&raw)[*d as usize].clone(),
        MomentGoal::Cumulant(d, _) => cumulant_from_raw(&raw)[*d as usize].clone(),
    })
}

fn synth_modes(cfg: &RunConfig, ast: &Ast, report: &mut Report) -> Result<()> {
    let cands = synthesize_combinations(ast, cfg.inv_deg, &cfg.limits)?;
    if cfg.synth_unsolv_inv {
        for c in &cands {
            // the completed loop is solvable by construction unless the
            // auxiliary subsystem itself resists the solver
            let form = synth_solvable_loop(ast, c, &cfg.limits)
                .and_then(|synth| {
                    let class = classify(&synth, &cfg.limits)?;
                    let goal = Monom::var(synth.vars.first().expect("fresh variable"));
                    let sys = moment_system(&synth, &class, &[goal.clone()], &cfg.limits)?;
                    Ok(solve(&sys, &[goal.clone()], &cfg.limits)?.remove(&goal).unwrap())
                })
                .ok();
            report.combinations.push((c.clone(), form));
        }
    }
    if cfg.synth_solv_loop {
        match cands.first() {
            Some(c) => {
                let synth = synth_solvable_loop(ast, c, &cfg.limits)?;
                report.synthesized = Some(synth.to_string());
            }
            None => report.diagnostics.push((
                "NotUnsolvable",
                format!(
                    "no combination of degree at most {} follows a linear recurrence",
                    cfg.inv_deg
                ),
            )),
        }
    }
    Ok(())
}

fn simulate(sim: &SimulateOptions, ast: &Ast, goals: &[MomentGoal], report: &mut Report) {
    let traces = match run_samples(ast, sim.iterations, sim.samples, sim.seed, &sim.bindings) {
        Ok(t) => t,
        Err(e) => {
            report.diagnostics.push((e.kind(), e.to_string()));
            return;
        }
    };
    if let Some(path) = &sim.export_traces {
        if let Err(e) = export_csv(path, &traces) {
            report
                .diagnostics
                .push(("InvalidInput", format!("cannot write {}: {}", path.display(), e)));
        }
    }
    for g in goals {
        let (est, se) = estimate_moment(&traces, g, sim.iterations);
        report.simulations.push((g.clone(), est, se));
    }
}

fn export_csv(path: &PathBuf, traces: &[Trace]) -> std::io::Result<()> {
    use std::io::Write;
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(f, "sample,iteration,variable,value")?;
    for (i, t) in traces.iter().enumerate() {
        for (n, values) in t.values.iter().enumerate() {
            for (v, x) in values {
                writeln!(f, "{},{},{},{}", i, n, v, x)?;
            }
        }
    }
    Ok(())
}

fn render_text(r: &Report) -> String {
    let mut out = String::new();
    for (g, form) in &r.goals {
        if let Some(e) = form {
            let _ = writeln!(out, "{} = {}", g, e);
        }
    }
    for (g, v) in &r.after_loop {
        let _ = writeln!(out, "{} [after loop] = {}", g, v);
    }
    for inv in &r.invariants {
        let _ = writeln!(out, "{}", inv);
    }
    for (param, g, e) in &r.sensitivities {
        let _ = writeln!(out, "d/d{} {} = {}", param, g, e);
    }
    for (c, form) in &r.combinations {
        let _ = writeln!(
            out,
            "E({}) satisfies s' = {}*s + ({})",
            c.combination,
            crate::algebra::field::rat_str(&c.eigenvalue),
            c.inhomogeneous
        );
        if let Some(e) = form {
            let _ = writeln!(out, "E({}) = {}", c.combination, e);
        }
    }
    if let Some(prog) = &r.synthesized {
        out.push_str(prog);
    }
    for (g, est, se) in &r.simulations {
        let _ = writeln!(out, "{} ~ {} (stderr {})", g, est, se);
    }
    out
}

fn exp_poly_json(e: &ExpPoly) -> serde_json::Value {
    let terms: Vec<serde_json::Value> = e
        .terms
        .iter()
        .map(|(base, coeffs)| {
            json!({
                "base": base.to_string(),
                "coefficients": coeffs.iter().map(|c| c.to_string()).collect::<Vec<_>>(),
            })
        })
        .collect();
    serde_json::Value::Array(terms)
}

fn render_json(r: &Report) -> String {
    let goals: Vec<serde_json::Value> = r
        .goals
        .iter()
        .map(|(g, form)| {
            let mut obj = json!({ "goal": g.to_string() });
            obj["closed_form_terms"] = match form {
                Some(e) => exp_poly_json(e),
                None => serde_json::Value::Null,
            };
            if let Some((_, v)) = r.after_loop.iter().find(|(ag, _)| ag == g) {
                obj["after_loop"] = json!(v);
            }
            obj
        })
        .collect();
    let sens: Vec<serde_json::Value> = r
        .sensitivities
        .iter()
        .map(|(param, g, e)| {
            json!({
                "param": param,
                "goal": g.to_string(),
                "closed_form_terms": exp_poly_json(e),
            })
        })
        .collect();
    let mut top = json!({
        "program": r.program,
        "goals": goals,
        "invariants": r.invariants,
        "sensitivities": sens,
        "diagnostics": r
            .diagnostics
            .iter()
            .map(|(kind, msg)| json!({ "kind": kind, "message": msg }))
            .collect::<Vec<_>>(),
    });
    if !r.combinations.is_empty() {
        top["combinations"] = r
            .combinations
            .iter()
            .map(|(c, form)| {
                let mut obj = json!({
                    "combination": c.combination.to_string(),
                    "eigenvalue": crate::algebra::field::rat_str(&c.eigenvalue),
                    "inhomogeneous": c.inhomogeneous.to_string(),
                });
                if let Some(e) = form {
                    obj["closed_form_terms"] = exp_poly_json(e);
                }
                obj
            })
            .collect();
    }
    if let Some(prog) = &r.synthesized {
        top["synthesized_loop"] = json!(prog);
    }
    if !r.simulations.is_empty() {
        top["simulations"] = r
            .simulations
            .iter()
            .map(|(g, est, se)| {
                json!({ "goal": g.to_string(), "estimate": est, "stderr": se })
            })
            .collect();
    }
    let mut s = serde_json::to_string_pretty(&top).expect("report serializes");
    s.push('\n');
    s
}

/// Parse a rational literal: `1/2`, `3`, or a decimal like `0.25` (exact).
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::Invalid(format!("cannot parse rational `{}`", s));
    if let Some((n, d)) = s.split_once('/') {
        let n: num_bigint::BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: num_bigint::BigInt = d.trim().parse().map_err(|_| bad())?;
        if d == num_bigint::BigInt::from(0) {
            return Err(bad());
        }
        return Ok(BigRational::new(n, d));
    }
    if let Some((i, frac)) = s.split_once('.') {
        let sign = if i.trim_start().starts_with('-') { -1 } else { 1 };
        let i: num_bigint::BigInt = i.trim().parse().map_err(|_| bad())?;
        if frac.is_empty() || !frac.chars().all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let num: num_bigint::BigInt = frac.parse().map_err(|_| bad())?;
        let den = num_bigint::BigInt::from(10).pow(frac.len() as u32);
        return Ok(BigRational::from_integer(i)
            + BigRational::new(num, den) * BigRational::from_integer(sign.into()));
    }
    let n: num_bigint::BigInt = s.parse().map_err(|_| bad())?;
    Ok(BigRational::from_integer(n))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_literals() {
        assert_eq!(parse_rational("1/2").unwrap(), BigRational::new(1.into(), 2.into()));
        assert_eq!(parse_rational("-3").unwrap(), BigRational::from_integer((-3).into()));
        assert_eq!(parse_rational("0.25").unwrap(), BigRational::new(1.into(), 4.into()));
        assert_eq!(parse_rational("-1.5").unwrap(), BigRational::new((-3).into(), 2.into()));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
    }
}
