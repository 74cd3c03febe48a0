//! Conversion of surface expressions into polynomials over the program
//! variables, with rational functions in the parameters as coefficients.

use super::ast::Expr;
use crate::algebra::{Coeff, Field, MPoly, PPoly};
use crate::error::{Error, Result};

/// Lower an expression to a polynomial in the program variables.
/// Division is only defined for state-independent divisors.
pub fn expr_to_poly(e: &Expr, is_param: &dyn Fn(&str) -> bool) -> Result<PPoly> {
    Ok(match e {
        Expr::Const(c) => MPoly::constant(Coeff::from_rat(c)),
        Expr::Ident(x) => {
            if is_param(x) {
                MPoly::constant(Coeff::param(x))
            } else {
                MPoly::var(x)
            }
        }
        Expr::Add(a, b) => {
            expr_to_poly(a, is_param)?.add(&expr_to_poly(b, is_param)?)
        }
        Expr::Sub(a, b) => {
            expr_to_poly(a, is_param)?.sub(&expr_to_poly(b, is_param)?)
        }
        Expr::Mul(a, b) => {
            expr_to_poly(a, is_param)?.mul(&expr_to_poly(b, is_param)?)
        }
        Expr::Div(a, b) => {
            let num = expr_to_poly(a, is_param)?;
            let den = expr_to_poly(b, is_param)?;
            let den = den.as_constant().ok_or_else(|| {
                Error::Invalid(format!("division by state-dependent expression `{}`", b))
            })?;
            if den.is_zero() {
                return Err(Error::Invalid(format!("division by zero in `{}`", e)));
            }
            num.scale(&den.inv())
        }
        Expr::Neg(a) => expr_to_poly(a, is_param)?.neg(),
        Expr::Pow(a, k) => expr_to_poly(a, is_param)?.pow(*k),
    })
}

/// Lower an expression that must not mention program variables.
pub fn expr_to_coeff(e: &Expr, is_param: &dyn Fn(&str) -> bool) -> Result<Coeff> {
    let p = expr_to_poly(e, is_param)?;
    p.as_constant().ok_or_else(|| {
        Error::R1Violation(format!(
            "expression `{}` must be constant but depends on program variables",
            e
        ))
    })
}

/// Render a polynomial back into surface syntax (used by loop synthesis).
pub fn poly_to_expr(p: &PPoly) -> Expr {
    use num_rational::BigRational;
    let mut acc: Option<Expr> = None;
    let order = crate::algebra::MonomialOrder::lex(&[]);
    for (exps, coeff) in p.sorted_terms(&order) {
        let mut factors: Vec<Expr> = Vec::new();
        let (negate, coeff) = match coeff.neg_for_display() {
            Some(c) => (true, c),
            None => (false, coeff),
        };
        let is_unit = coeff.is_one();
        if !is_unit || exps.iter().all(|&e| e == 0) {
            factors.push(coeff_to_expr(&coeff));
        }
        for (i, &e) in exps.iter().enumerate() {
            let v = Expr::Ident(p.vars()[i].clone());
            if e == 1 {
                factors.push(v);
            } else if e > 1 {
                factors.push(Expr::Pow(Box::new(v), e));
            }
        }
        let mut term = factors
            .into_iter()
            .reduce(|a, b| Expr::Mul(Box::new(a), Box::new(b)))
            .unwrap_or(Expr::Const(BigRational::from_integer(1.into())));
        if negate && acc.is_none() {
            term = Expr::Neg(Box::new(term));
        }
        acc = Some(match acc {
            None => term,
            Some(a) => {
                if negate {
                    Expr::Sub(Box::new(a), Box::new(term))
                } else {
                    Expr::Add(Box::new(a), Box::new(term))
                }
            }
        });
    }
    acc.unwrap_or_else(|| Expr::int(0))
}

fn coeff_to_expr(c: &Coeff) -> Expr {
    if let Some(r) = c.as_rational() {
        return Expr::Const(r);
    }
    let num = qpoly_to_expr(c.numer());
    if c.denom().as_constant().map(|d| d.is_one()).unwrap_or(false) {
        num
    } else {
        Expr::Div(Box::new(num), Box::new(qpoly_to_expr(c.denom())))
    }
}

fn qpoly_to_expr(p: &crate::algebra::QPoly) -> Expr {
    let as_coeff = p.map_coeffs(Coeff::from_rat);
    poly_to_expr(&as_coeff)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::parser::parse;

    fn poly_of(src_expr: &str, params: &[&str]) -> PPoly {
        let src = format!("x = 0\ny = 0\nwhile true:\n    x = {}\nend\n", src_expr);
        let ast = parse(&src).unwrap();
        let a = match &ast.body[0] {
            crate::frontend::ast::Statement::Assign(a) => a,
            _ => unreachable!(),
        };
        let e = match &a.rhs {
            crate::frontend::ast::AssignRhs::Choice(alts) => &alts[0].exprs[0],
            _ => unreachable!(),
        };
        expr_to_poly(e, &|s| params.contains(&s)).unwrap()
    }

    #[test]
    fn lowers_arithmetic() {
        let p = poly_of("(x + y)**2 - x*y/2", &[]);
        assert_eq!(p.to_string(), "x**2 + 3/2*x*y + y**2");
    }

    #[test]
    fn params_live_in_coefficients() {
        let p = poly_of("p*x + p**2", &["p"]);
        assert_eq!(p.vars(), &["x".to_string()]);
        assert_eq!(p.total_degree(), 1);
    }

    #[test]
    fn state_dependent_division_rejected() {
        let src = "x = 1\nwhile true:\n    x = 1/x\nend\n";
        let ast = parse(src).unwrap();
        let a = match &ast.body[0] {
            crate::frontend::ast::Statement::Assign(a) => a.clone(),
            _ => unreachable!(),
        };
        let e = match &a.rhs {
            crate::frontend::ast::AssignRhs::Choice(alts) => alts[0].exprs[0].clone(),
            _ => unreachable!(),
        };
        assert!(expr_to_poly(&e, &|_| false).is_err());
    }

    #[test]
    fn poly_expr_round_trip() {
        for (src, params) in [
            ("x**2 - 2*x + 4", vec![]),
            ("p*x + y - 1/2", vec!["p"]),
            ("-x + 3*y**2", vec![]),
        ] {
            let p = poly_of(src, &params);
            let back = poly_to_expr(&p);
            let again = expr_to_poly(&back, &|s| params.contains(&s)).unwrap();
            assert_eq!(p, again, "round trip failed for {}", src);
        }
    }
}
