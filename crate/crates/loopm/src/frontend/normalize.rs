//! Program normalization ahead of moment extraction.
//!
//! Two rewrites:
//! 1. guard rewrite: `while G: B end` becomes `while true: if G: B end end`,
//!    keeping `G` in `original_guard` so that limits of conditioned runs can
//!    still be asked for;
//! 2. location shift: draws from location-scale families with state-dependent
//!    location are split into a deterministic shift plus a centered draw,
//!    e.g. `g = Normal(y, 1)` becomes `g = y + Normal(0, 1)`.

use super::ast::*;
use super::poly::expr_to_poly;
use crate::error::{Error, Result};

pub fn normalize(mut ast: Ast) -> Result<Ast> {
    if let Some(g) = ast.guard.take() {
        ast.original_guard = Some(g.clone());
        ast.body = vec![Statement::If(IfStmt {
            branches: vec![(g, std::mem::take(&mut ast.body))],
            else_branch: None,
        })];
    }
    let is_param = {
        let params = ast.params.clone();
        move |s: &str| params.contains(s)
    };
    let shift_all = |stmts: &mut Vec<Statement>| -> Result<()> {
        fn walk(stmts: &mut [Statement], is_param: &dyn Fn(&str) -> bool) -> Result<()> {
            for s in stmts {
                match s {
                    Statement::Assign(a) => shift_draw(a, is_param)?,
                    Statement::If(ifs) => {
                        for (_, b) in &mut ifs.branches {
                            walk(b, is_param)?;
                        }
                        if let Some(e) = &mut ifs.else_branch {
                            walk(e, is_param)?;
                        }
                    }
                }
            }
            Ok(())
        }
        walk(stmts, &is_param)
    };
    let mut init = std::mem::take(&mut ast.init);
    for a in &mut init {
        shift_draw(a, &is_param)?;
    }
    ast.init = init;
    let mut body = std::mem::take(&mut ast.body);
    shift_all(&mut body)?;
    ast.body = body;
    Ok(ast)
}

/// Split a state-dependent location off a draw where the family allows it.
fn shift_draw(a: &mut Assignment, is_param: &dyn Fn(&str) -> bool) -> Result<()> {
    let (shift, dist, args) = match &mut a.rhs {
        AssignRhs::Draw { shift, dist, args } => (shift, *dist, args),
        AssignRhs::Choice(_) => return Ok(()),
    };
    let state_dependent = |e: &Expr| -> Result<bool> {
        Ok(!expr_to_poly(e, is_param)?.is_constant())
    };
    match dist {
        DistKind::Normal | DistKind::Laplace => {
            // first argument is the location
            let loc = args[0].clone();
            if state_dependent(&loc)? {
                *shift = add_expr(shift.clone(), loc);
                args[0] = Expr::int(0);
            }
            if state_dependent(&args[1])? {
                return Err(Error::Normalize(format!(
                    "scale of {} depends on program variables",
                    dist.name()
                )));
            }
        }
        DistKind::Uniform => {
            let lo = args[0].clone();
            let hi = args[1].clone();
            if state_dependent(&lo)? || state_dependent(&hi)? {
                // width must be state-independent for the shift to be valid
                let width = Expr::Sub(Box::new(hi.clone()), Box::new(lo.clone()));
                if state_dependent(&width)? {
                    return Err(Error::Normalize(
                        "width of Uniform depends on program variables".into(),
                    ));
                }
                *shift = add_expr(shift.clone(), lo);
                args[0] = Expr::int(0);
                args[1] = width;
            }
        }
        _ => {
            for arg in args.iter() {
                if state_dependent(arg)? {
                    return Err(Error::Normalize(format!(
                        "argument of {} depends on program variables",
                        dist.name()
                    )));
                }
            }
        }
    }
    Ok(())
}

fn add_expr(a: Expr, b: Expr) -> Expr {
    if matches!(&a, Expr::Const(c) if crate::algebra::Field::is_zero(c)) {
        b
    } else {
        Expr::Add(Box::new(a), Box::new(b))
    }
}

/// Shift polynomial of a draw plus the centered residual distribution, for
/// consumers that need both pieces.
pub fn draw_parts<'a>(
    a: &'a Assignment,
    is_param: &dyn Fn(&str) -> bool,
) -> Result<Option<(crate::algebra::PPoly, DistKind, &'a [Expr])>> {
    match &a.rhs {
        AssignRhs::Draw { shift, dist, args } => {
            Ok(Some((expr_to_poly(shift, is_param)?, *dist, args)))
        }
        AssignRhs::Choice(_) => Ok(None),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::parser::parse;

    #[test]
    fn guard_rewrite_keeps_original() {
        let src = "x = 0\nwhile x < 5:\n    x = x + 1\nend\n";
        let ast = normalize(parse(src).unwrap()).unwrap();
        assert!(ast.guard.is_none());
        assert!(ast.original_guard.is_some());
        match &ast.body[0] {
            Statement::If(ifs) => {
                assert_eq!(ifs.branches.len(), 1);
                assert!(ifs.else_branch.is_none());
                assert_eq!(Some(&ifs.branches[0].0), ast.original_guard.as_ref());
            }
            _ => panic!("guard should become a conditional"),
        }
    }

    #[test]
    fn normal_location_shift() {
        let src = "y = 0\ng = 0\nwhile true:\n    g = Normal(y, 1)\nend\n";
        let ast = normalize(parse(src).unwrap()).unwrap();
        match &ast.body[0] {
            Statement::Assign(a) => match &a.rhs {
                AssignRhs::Draw { shift, args, .. } => {
                    assert_eq!(shift, &Expr::Ident("y".into()));
                    assert_eq!(args[0], Expr::int(0));
                }
                _ => panic!(),
            },
            _ => panic!(),
        }
    }

    #[test]
    fn uniform_shift_requires_constant_width() {
        let ok = "y = 0\ng = 0\nwhile true:\n    g = Uniform(y + 1, y + 3)\nend\n";
        let ast = normalize(parse(ok).unwrap()).unwrap();
        match &ast.body[0] {
            Statement::Assign(a) => match &a.rhs {
                AssignRhs::Draw { shift, args, .. } => {
                    assert!(matches!(shift, Expr::Add(..)));
                    let w = crate::frontend::parser::const_eval(&args[1]);
                    // width folds to 2 only after polynomial lowering; the
                    // surface form keeps (y+3) - (y+1)
                    assert!(w.is_none());
                    let p = expr_to_poly(&args[1], &|_| false).unwrap();
                    assert_eq!(p.to_string(), "2");
                }
                _ => panic!(),
            },
            _ => panic!(),
        }
        let bad = "y = 0\ng = 0\nwhile true:\n    g = Uniform(0, y)\nend\n";
        assert!(matches!(
            normalize(parse(bad).unwrap()),
            Err(Error::Normalize(_))
        ));
    }

    #[test]
    fn state_dependent_probability_arg_rejected() {
        let src = "x = 1\nb = 0\nwhile true:\n    b = Bernoulli(x/2)\n    x = x + 1\nend\n";
        assert!(matches!(
            normalize(parse(src).unwrap()),
            Err(Error::Normalize(_))
        ));
    }
}
