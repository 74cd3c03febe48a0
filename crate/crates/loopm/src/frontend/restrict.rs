//! Admissibility checks and variable classification.
//!
//! Three restrictions make a loop solvable:
//! 1. choice probabilities and distribution arguments are constant
//!    (parameters allowed, program variables not);
//! 2. variables appearing in the loop guard or branch conditions take
//!    finitely many values;
//! 3. non-linear self-dependence is acyclic: no variable depends, through a
//!    dependency cycle, non-linearly on a variable of the same cycle.
//!
//! Variables violating (3) are *defective*; the rest are *effective*.
//! Closed forms exist for moments of effective variables only. Finite-valued
//! variables are never defective: their powers reduce to linear expressions
//! over their value set.

use super::ast::*;
use super::poly::{expr_to_coeff, expr_to_poly};
use super::supports::{variable_supports, SupportEnv};
use crate::error::{Error, Result};
use crate::limits::Limits;
use std::collections::{BTreeMap, BTreeSet};

#[derive(Clone, Debug)]
pub struct Classification {
    /// Variables with a known finite value set.
    pub finite: BTreeSet<String>,
    pub defective: BTreeSet<String>,
    pub effective: BTreeSet<String>,
    pub supports: SupportEnv,
}

pub fn classify(ast: &Ast, limits: &Limits) -> Result<Classification> {
    let supports = variable_supports(ast, limits);
    let finite: BTreeSet<String> = supports
        .iter()
        .filter(|(_, s)| s.is_some())
        .map(|(v, _)| v.clone())
        .collect();
    check_constant_probabilities(ast)?;
    check_condition_vars(ast, &finite)?;
    let edges = dependency_edges(ast)?;
    let defective = defective_vars(&ast.vars, &edges, &finite);
    let effective = ast
        .vars
        .iter()
        .filter(|v| !defective.contains(*v))
        .cloned()
        .collect();
    Ok(Classification {
        finite,
        defective,
        effective,
        supports,
    })
}

fn check_constant_probabilities(ast: &Ast) -> Result<()> {
    let is_param = |s: &str| ast.is_param(s);
    let mut check = |a: &Assignment| -> Result<()> {
        if let AssignRhs::Choice(alts) = &a.rhs {
            for alt in alts {
                if let Some(p) = &alt.prob {
                    expr_to_coeff(p, &is_param).map_err(|_| {
                        Error::R1Violation(format!(
                            "probability `{}` depends on program variables",
                            p
                        ))
                    })?;
                }
            }
        }
        Ok(())
    };
    for a in &ast.init {
        check(a)?;
    }
    fn walk(stmts: &[Statement], check: &mut dyn FnMut(&Assignment) -> Result<()>) -> Result<()> {
        for s in stmts {
            match s {
                Statement::Assign(a) => check(a)?,
                Statement::If(ifs) => {
                    for (_, b) in &ifs.branches {
                        walk(b, check)?;
                    }
                    if let Some(e) = &ifs.else_branch {
                        walk(e, check)?;
                    }
                }
            }
        }
        Ok(())
    }
    walk(&ast.body, &mut check)
}

fn check_condition_vars(ast: &Ast, finite: &BTreeSet<String>) -> Result<()> {
    let mut cond_vars = BTreeSet::new();
    fn walk(stmts: &[Statement], out: &mut BTreeSet<String>) {
        for s in stmts {
            if let Statement::If(ifs) = s {
                for (c, b) in &ifs.branches {
                    c.idents(out);
                    walk(b, out);
                }
                if let Some(e) = &ifs.else_branch {
                    walk(e, out);
                }
            }
        }
    }
    walk(&ast.body, &mut cond_vars);
    for v in cond_vars {
        if ast.vars.contains(&v) && !finite.contains(&v) {
            return Err(Error::NotFinite(format!(
                "condition variable `{}` has no known finite value set",
                v
            )));
        }
    }
    Ok(())
}

/// Dependency edge target -> read variable, with a non-linearity flag.
type Edges = BTreeMap<String, BTreeMap<String, bool>>;

fn add_edge(edges: &mut Edges, from: &str, to: &str, nonlinear: bool) {
    let e = edges
        .entry(from.to_string())
        .or_default()
        .entry(to.to_string())
        .or_insert(false);
    *e = *e || nonlinear;
}

fn dependency_edges(ast: &Ast) -> Result<Edges> {
    let is_param = |s: &str| ast.is_param(s);
    let finite: BTreeSet<String> = variable_supports(ast, &Limits::default())
        .into_iter()
        .filter(|(_, s)| s.is_some())
        .map(|(v, _)| v)
        .collect();
    let mut edges: Edges = BTreeMap::new();
    // edges from one polynomial alternative
    let mut poly_edges = |target: &str, p: &crate::algebra::PPoly, edges: &mut Edges| {
        for (exps, _) in p.terms() {
            let nf_deg: u32 = exps
                .iter()
                .enumerate()
                .filter(|(i, _)| !finite.contains(&p.vars()[*i]))
                .map(|(_, &e)| e)
                .sum();
            for (i, &e) in exps.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let y = &p.vars()[i];
                let nonlinear = nf_deg >= 2 && !finite.contains(y);
                add_edge(edges, target, y, nonlinear);
            }
        }
    };
    fn walk(
        stmts: &[Statement],
        cond_stack: &mut Vec<String>,
        edges: &mut Edges,
        poly_edges: &mut dyn FnMut(&str, &crate::algebra::PPoly, &mut Edges),
        is_param: &dyn Fn(&str) -> bool,
        guarded: bool,
    ) -> Result<()> {
        for s in stmts {
            match s {
                Statement::Assign(a) => {
                    for t in &a.targets {
                        // conditions select between new and old value
                        for c in cond_stack.iter() {
                            add_edge(edges, t, c, false);
                        }
                        if guarded {
                            add_edge(edges, t, t, false);
                        }
                    }
                    match &a.rhs {
                        AssignRhs::Choice(alts) => {
                            for alt in alts {
                                for (ti, e) in alt.exprs.iter().enumerate() {
                                    let p = expr_to_poly(e, is_param)?;
                                    poly_edges(&a.targets[ti], &p, edges);
                                }
                            }
                        }
                        AssignRhs::Draw { shift, .. } => {
                            let p = expr_to_poly(shift, is_param)?;
                            poly_edges(&a.targets[0], &p, edges);
                        }
                    }
                }
                Statement::If(ifs) => {
                    for (c, b) in &ifs.branches {
                        let mut cv = BTreeSet::new();
                        c.idents(&mut cv);
                        let pushed: Vec<String> =
                            cv.into_iter().filter(|v| !is_param(v)).collect();
                        cond_stack.extend(pushed.iter().cloned());
                        walk(b, cond_stack, edges, poly_edges, is_param, true)?;
                        cond_stack.truncate(cond_stack.len() - pushed.len());
                    }
                    if let Some(e) = &ifs.else_branch {
                        walk(e, cond_stack, edges, poly_edges, is_param, true)?;
                    }
                }
            }
        }
        Ok(())
    }
    let mut stack = Vec::new();
    walk(
        &ast.body,
        &mut stack,
        &mut edges,
        &mut poly_edges,
        &is_param,
        false,
    )?;
    Ok(edges)
}

/// Tarjan strongly connected components over variable names.
fn sccs(nodes: &[String], edges: &Edges) -> Vec<Vec<String>> {
    struct State<'a> {
        edges: &'a Edges,
        index: BTreeMap<String, usize>,
        lowlink: BTreeMap<String, usize>,
        on_stack: BTreeSet<String>,
        stack: Vec<String>,
        counter: usize,
        out: Vec<Vec<String>>,
    }
    fn strongconnect(v: &str, st: &mut State) {
        st.index.insert(v.to_string(), st.counter);
        st.lowlink.insert(v.to_string(), st.counter);
        st.counter += 1;
        st.stack.push(v.to_string());
        st.on_stack.insert(v.to_string());
        let succs: Vec<String> = st
            .edges
            .get(v)
            .map(|m| m.keys().cloned().collect())
            .unwrap_or_default();
        for w in succs {
            if !st.index.contains_key(&w) {
                strongconnect(&w, st);
                let lw = st.lowlink[&w];
                let lv = st.lowlink[v];
                st.lowlink.insert(v.to_string(), lv.min(lw));
            } else if st.on_stack.contains(&w) {
                let iw = st.index[&w];
                let lv = st.lowlink[v];
                st.lowlink.insert(v.to_string(), lv.min(iw));
            }
        }
        if st.lowlink[v] == st.index[v] {
            let mut comp = Vec::new();
            while let Some(w) = st.stack.pop() {
                st.on_stack.remove(&w);
                let done = w == v;
                comp.push(w);
                if done {
                    break;
                }
            }
            st.out.push(comp);
        }
    }
    let mut st = State {
        edges,
        index: BTreeMap::new(),
        lowlink: BTreeMap::new(),
        on_stack: BTreeSet::new(),
        stack: Vec::new(),
        counter: 0,
        out: Vec::new(),
    };
    for v in nodes {
        if !st.index.contains_key(v) {
            strongconnect(v, &mut st);
        }
    }
    st.out
}

fn defective_vars(vars: &[String], edges: &Edges, _finite: &BTreeSet<String>) -> BTreeSet<String> {
    let comps = sccs(vars, edges);
    let comp_of: BTreeMap<&String, usize> = comps
        .iter()
        .enumerate()
        .flat_map(|(i, c)| c.iter().map(move |v| (v, i)))
        .collect();
    // a component is bad if a non-linear edge stays inside it
    let mut bad: BTreeSet<String> = BTreeSet::new();
    for (u, succ) in edges {
        for (v, &nonlinear) in succ {
            if nonlinear && comp_of.get(u) == comp_of.get(v) && comp_of.contains_key(u) {
                bad.insert(u.clone());
                bad.insert(v.clone());
            }
        }
    }
    // defective: everything that reaches a bad vertex
    let mut defective: BTreeSet<String> = BTreeSet::new();
    for start in vars {
        let mut seen = BTreeSet::new();
        let mut stack = vec![start.clone()];
        'search: while let Some(v) = stack.pop() {
            if bad.contains(&v) {
                defective.insert(start.clone());
                break 'search;
            }
            if !seen.insert(v.clone()) {
                continue;
            }
            if let Some(succ) = edges.get(&v) {
                stack.extend(succ.keys().cloned());
            }
        }
    }
    defective
}
