//! Recursive-descent parser for the loop language.
//!
//! Shape of a program:
//!
//! ```text
//! x = 0
//! y = 1
//! while x < 10:
//!     d = Bernoulli(1/2)
//!     x = x + 1 {1/2} x - 1
//!     if d == 0:
//!         y = 2*y
//!     end
//! end
//! ```
//!
//! After parsing, every probabilistic choice has an explicit probability on
//! each alternative (the implicit remainder is materialized), identifiers
//! are classified into variables and parameters, and reads of uninitialized
//! variables are rejected.

use super::ast::*;
use crate::algebra::field::rat_from_literal;
use crate::error::{Error, Result};
use super::lexer::{lex, Spanned, Tok};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::collections::BTreeSet;

const KEYWORDS: &[&str] = &["while", "if", "else", "end", "true", "false", "not", "and", "or"];

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek2(&self) -> &Tok {
        &self.toks[(self.pos + 1).min(self.toks.len() - 1)].tok
    }

    fn next(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn err(&self, msg: impl Into<String>) -> Error {
        let s = &self.toks[self.pos];
        Error::Syntax {
            line: s.line,
            col: s.col,
            msg: msg.into(),
        }
    }

    fn expect(&mut self, t: Tok) -> Result<()> {
        if self.peek() == &t {
            self.next();
            Ok(())
        } else {
            Err(self.err(format!(
                "expected {}, found {}",
                t.describe(),
                self.peek().describe()
            )))
        }
    }

    fn at_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn eat_keyword(&mut self, kw: &str) -> bool {
        if self.at_keyword(kw) {
            self.next();
            true
        } else {
            false
        }
    }

    fn skip_newlines(&mut self) {
        while self.peek() == &Tok::Newline {
            self.next();
        }
    }

    fn end_of_statement(&mut self) -> Result<()> {
        match self.peek() {
            Tok::Newline => {
                self.next();
                Ok(())
            }
            Tok::Eof => Ok(()),
            t => Err(self.err(format!("expected end of line, found {}", t.describe()))),
        }
    }

    // --- expressions ------------------------------------------------------

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.next();
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Tok::Minus => {
                    self.next();
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Tok::Star => {
                    self.next();
                    lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
                }
                Tok::Slash => {
                    self.next();
                    lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.peek() == &Tok::Minus {
            self.next();
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if self.peek() == &Tok::DblStar {
            self.next();
            let e = match self.next() {
                Tok::Number(s) if !s.contains('.') => s
                    .parse::<u32>()
                    .map_err(|_| self.err("exponent out of range"))?,
                _ => return Err(self.err("exponent must be a natural number literal")),
            };
            return Ok(Expr::Pow(Box::new(base), e));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.peek().clone() {
            Tok::Number(s) => {
                self.next();
                let r = rat_from_literal(&s)
                    .ok_or_else(|| self.err(format!("malformed number `{}`", s)))?;
                Ok(Expr::Const(r))
            }
            Tok::Ident(name) => {
                if KEYWORDS.contains(&name.as_str()) {
                    return Err(self.err(format!("unexpected keyword `{}` in expression", name)));
                }
                self.next();
                Ok(Expr::Ident(name))
            }
            Tok::LParen => {
                self.next();
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            t => Err(self.err(format!("expected expression, found {}", t.describe()))),
        }
    }

    // --- boolean expressions ---------------------------------------------

    fn bool_expr(&mut self) -> Result<BoolExpr> {
        let mut lhs = self.bool_and()?;
        while self.eat_keyword("or") {
            lhs = BoolExpr::Or(Box::new(lhs), Box::new(self.bool_and()?));
        }
        Ok(lhs)
    }

    fn bool_and(&mut self) -> Result<BoolExpr> {
        let mut lhs = self.bool_atom()?;
        while self.eat_keyword("and") {
            lhs = BoolExpr::And(Box::new(lhs), Box::new(self.bool_atom()?));
        }
        Ok(lhs)
    }

    fn bool_atom(&mut self) -> Result<BoolExpr> {
        if self.eat_keyword("not") {
            return Ok(BoolExpr::Not(Box::new(self.bool_atom()?)));
        }
        if self.eat_keyword("true") {
            return Ok(BoolExpr::True);
        }
        if self.eat_keyword("false") {
            return Ok(BoolExpr::False);
        }
        let lhs = self.expr()?;
        let op = match self.peek() {
            Tok::Eq => CmpOp::Eq,
            Tok::Ne => CmpOp::Ne,
            Tok::Lt => CmpOp::Lt,
            Tok::Le => CmpOp::Le,
            Tok::Gt => CmpOp::Gt,
            Tok::Ge => CmpOp::Ge,
            t => return Err(self.err(format!("expected comparison operator, found {}", t.describe()))),
        };
        self.next();
        let rhs = self.expr()?;
        Ok(BoolExpr::Cmp(lhs, op, rhs))
    }

    // --- statements -------------------------------------------------------

    fn assignment(&mut self) -> Result<Assignment> {
        let mut targets = vec![self.ident()?];
        while self.peek() == &Tok::Comma {
            self.next();
            targets.push(self.ident()?);
        }
        self.expect(Tok::Assign)?;

        // distribution draw: `Dist(args)` with an optional shift handled by
        // normalization, not the parser
        if let (Tok::Ident(name), Tok::LParen) = (self.peek(), self.peek2()) {
            if let Some(dist) = DistKind::from_name(name) {
                self.next();
                self.next();
                let mut args = Vec::new();
                if self.peek() != &Tok::RParen {
                    args.push(self.expr()?);
                    while self.peek() == &Tok::Comma {
                        self.next();
                        args.push(self.expr()?);
                    }
                }
                self.expect(Tok::RParen)?;
                if targets.len() != 1 {
                    return Err(self.err("distribution draw takes a single target"));
                }
                if !dist.arity_ok(args.len()) {
                    return Err(self.err(format!(
                        "{} does not take {} argument(s)",
                        dist.name(),
                        args.len()
                    )));
                }
                self.end_of_statement()?;
                return Ok(Assignment {
                    targets,
                    rhs: AssignRhs::Draw {
                        shift: Expr::int(0),
                        dist,
                        args,
                    },
                });
            }
        }

        let arity = targets.len();
        let mut alts: Vec<ChoiceAlt> = Vec::new();
        loop {
            let mut exprs = vec![self.expr()?];
            while exprs.len() < arity {
                self.expect(Tok::Comma)?;
                exprs.push(self.expr()?);
            }
            let prob = if self.peek() == &Tok::LBrace {
                self.next();
                let p = self.expr()?;
                self.expect(Tok::RBrace)?;
                Some(p)
            } else {
                None
            };
            let more = prob.is_some() && self.peek() != &Tok::Newline && self.peek() != &Tok::Eof;
            alts.push(ChoiceAlt { exprs, prob });
            if !more {
                break;
            }
        }
        self.end_of_statement()?;
        Ok(Assignment { targets, rhs: AssignRhs::Choice(alts) })
    }

    fn ident(&mut self) -> Result<String> {
        match self.peek().clone() {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                self.next();
                Ok(s)
            }
            t => Err(self.err(format!("expected identifier, found {}", t.describe()))),
        }
    }

    /// Statements until one of the given block-closing keywords (not consumed).
    fn statements(&mut self, stop: &[&str]) -> Result<Vec<Statement>> {
        let mut out = Vec::new();
        loop {
            self.skip_newlines();
            if stop.iter().any(|k| self.at_keyword(k)) || self.peek() == &Tok::Eof {
                return Ok(out);
            }
            if self.at_keyword("if") {
                out.push(Statement::If(self.if_statement()?));
            } else {
                out.push(Statement::Assign(self.assignment()?));
            }
        }
    }

    fn if_statement(&mut self) -> Result<IfStmt> {
        assert!(self.eat_keyword("if"));
        let mut branches = Vec::new();
        let mut else_branch = None;
        loop {
            let cond = self.bool_expr()?;
            self.expect(Tok::Colon)?;
            let body = self.statements(&["else", "end"])?;
            branches.push((cond, body));
            if self.eat_keyword("else") {
                if self.eat_keyword("if") {
                    continue;
                }
                self.expect(Tok::Colon)?;
                else_branch = Some(self.statements(&["end"])?);
            }
            if !self.eat_keyword("end") {
                return Err(self.err("expected `end` closing if statement"));
            }
            self.end_of_statement()?;
            return Ok(IfStmt { branches, else_branch });
        }
    }

    fn program(&mut self) -> Result<Ast> {
        let mut init = Vec::new();
        loop {
            self.skip_newlines();
            if self.at_keyword("while") {
                break;
            }
            if self.peek() == &Tok::Eof {
                return Err(self.err("expected `while` loop"));
            }
            init.push(self.assignment()?);
        }
        assert!(self.eat_keyword("while"));
        let guard = if self.at_keyword("true") {
            self.next();
            None
        } else {
            Some(self.bool_expr()?)
        };
        self.expect(Tok::Colon)?;
        let body = self.statements(&["end"])?;
        if !self.eat_keyword("end") {
            return Err(self.err("expected `end` closing while loop"));
        }
        self.skip_newlines();
        if self.peek() != &Tok::Eof {
            return Err(self.err(format!(
                "unexpected {} after end of loop",
                self.peek().describe()
            )));
        }
        let mut ast = Ast {
            init,
            guard,
            body,
            params: BTreeSet::new(),
            vars: Vec::new(),
            original_guard: None,
        };
        ast.reclassify();
        Ok(ast)
    }
}

/// Make implicit choice probabilities explicit and validate numeric ones.
fn normalize_probs(a: &mut Assignment) -> Result<()> {
    let targets = a.targets.clone();
    let alts = match &mut a.rhs {
        AssignRhs::Choice(alts) => alts,
        AssignRhs::Draw { .. } => return Ok(()),
    };
    if alts.len() == 1 && alts[0].prob.is_none() {
        return Ok(()); // deterministic assignment
    }
    let missing = alts.iter().filter(|alt| alt.prob.is_none()).count();
    if missing > 1 {
        return Err(Error::Probability(
            "at most one alternative may omit its probability".into(),
        ));
    }
    // numeric validation where possible; symbolic parameters are trusted
    let mut sum = BigRational::zero();
    let mut all_numeric = true;
    for alt in alts.iter_mut() {
        if let Some(p) = &alt.prob {
            match const_eval(p) {
                Some(v) => {
                    if v.is_negative() || v > BigRational::one() {
                        return Err(Error::Probability(format!(
                            "probability {} outside [0, 1]",
                            p
                        )));
                    }
                    sum += &v;
                    // fold so printing and reparsing is stable
                    alt.prob = Some(Expr::Const(v));
                }
                None => all_numeric = false,
            }
        }
    }
    if all_numeric && sum > BigRational::one() {
        return Err(Error::Probability(format!(
            "probabilities sum to {} > 1",
            crate::algebra::field::rat_str(&sum)
        )));
    }
    // symbolic remainder 1 - sum of the explicit probabilities
    let mut remainder: Expr = Expr::int(1);
    for alt in alts.iter() {
        if let Some(p) = &alt.prob {
            remainder = Expr::Sub(Box::new(remainder), Box::new(p.clone()));
        }
    }
    if let Some(v) = const_eval(&remainder) {
        remainder = Expr::Const(v);
    }
    if missing == 1 {
        for alt in alts.iter_mut() {
            if alt.prob.is_none() {
                alt.prob = Some(remainder.clone());
            }
        }
    } else if !matches!(const_eval(&remainder), Some(v) if v.is_zero()) {
        // all probabilities explicit but short of 1: the remainder keeps the
        // old values
        alts.push(ChoiceAlt {
            exprs: targets.iter().map(|t| Expr::Ident(t.clone())).collect(),
            prob: Some(remainder),
        });
    }
    Ok(())
}

/// Evaluate a parameter-free expression to a rational.
pub fn const_eval(e: &Expr) -> Option<BigRational> {
    Some(match e {
        Expr::Const(c) => c.clone(),
        Expr::Ident(_) => return None,
        Expr::Add(a, b) => const_eval(a)? + const_eval(b)?,
        Expr::Sub(a, b) => const_eval(a)? - const_eval(b)?,
        Expr::Mul(a, b) => const_eval(a)? * const_eval(b)?,
        Expr::Div(a, b) => {
            let d = const_eval(b)?;
            if d.is_zero() {
                return None;
            }
            const_eval(a)? / d
        }
        Expr::Neg(a) => -const_eval(a)?,
        Expr::Pow(a, e) => {
            let base = const_eval(a)?;
            num_traits::pow::pow(base, *e as usize)
        }
    })
}

fn visit_assignments_mut(
    stmts: &mut [Statement],
    f: &mut impl FnMut(&mut Assignment) -> Result<()>,
) -> Result<()> {
    for s in stmts {
        match s {
            Statement::Assign(a) => f(a)?,
            Statement::If(ifs) => {
                for (_, b) in &mut ifs.branches {
                    visit_assignments_mut(b, f)?;
                }
                if let Some(e) = &mut ifs.else_branch {
                    visit_assignments_mut(e, f)?;
                }
            }
        }
    }
    Ok(())
}

/// Reads of loop variables must see a defined value: either an initial value
/// before the loop, or an assignment earlier in the same iteration on every
/// path.
fn check_use_before_def(ast: &Ast) -> Result<()> {
    let vars: BTreeSet<&String> = ast.vars.iter().collect();
    let check_reads = |reads: &BTreeSet<String>, defined: &BTreeSet<String>| -> Result<()> {
        for r in reads {
            if vars.contains(r) && !defined.contains(r) {
                return Err(Error::UseBeforeDef(r.clone()));
            }
        }
        Ok(())
    };
    let mut defined: BTreeSet<String> = BTreeSet::new();
    for a in &ast.init {
        check_reads(&a.reads(), &defined)?;
        defined.extend(a.targets.iter().cloned());
    }
    let init_defined = defined.clone();
    if let Some(g) = ast.original_guard.as_ref().or(ast.guard.as_ref()) {
        let mut reads = BTreeSet::new();
        g.idents(&mut reads);
        check_reads(&reads, &init_defined)?;
    }
    fn walk(
        stmts: &[Statement],
        defined: &mut BTreeSet<String>,
        check: &impl Fn(&BTreeSet<String>, &BTreeSet<String>) -> Result<()>,
    ) -> Result<()> {
        for s in stmts {
            match s {
                Statement::Assign(a) => {
                    check(&a.reads(), defined)?;
                    defined.extend(a.targets.iter().cloned());
                }
                Statement::If(ifs) => {
                    let mut common: Option<BTreeSet<String>> = None;
                    for (c, b) in &ifs.branches {
                        let mut reads = BTreeSet::new();
                        c.idents(&mut reads);
                        check(&reads, defined)?;
                        let mut d = defined.clone();
                        walk(b, &mut d, check)?;
                        common = Some(match common {
                            None => d,
                            Some(prev) => prev.intersection(&d).cloned().collect(),
                        });
                    }
                    if let Some(e) = &ifs.else_branch {
                        let mut d = defined.clone();
                        walk(e, &mut d, check)?;
                        common = Some(match common {
                            None => d,
                            Some(prev) => prev.intersection(&d).cloned().collect(),
                        });
                        // every path assigns; the intersection is definite
                        *defined = common.unwrap();
                    }
                    // without an else branch the statement may be skipped, so
                    // only prior definitions survive
                }
            }
        }
        Ok(())
    }
    let check = |r: &BTreeSet<String>, d: &BTreeSet<String>| check_reads(r, d);
    walk(&ast.body, &mut defined, &check)
}

/// Parse a full program.
pub fn parse(src: &str) -> Result<Ast> {
    let toks = lex(src)?;
    let mut p = Parser { toks, pos: 0 };
    let mut ast = p.program()?;
    for a in &mut ast.init {
        normalize_probs(a)?;
    }
    visit_assignments_mut(&mut ast.body, &mut normalize_probs)?;
    check_use_before_def(&ast)?;
    Ok(ast)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn parses_random_walk() {
        let src = "x = 0\nwhile true:\n    x = x + 2 {1/2} x - 1\nend\n";
        let ast = parse(src).unwrap();
        assert_eq!(ast.vars, vec!["x"]);
        assert!(ast.params.is_empty());
        assert!(ast.guard.is_none());
        match &ast.body[0] {
            Statement::Assign(a) => match &a.rhs {
                AssignRhs::Choice(alts) => {
                    assert_eq!(alts.len(), 2);
                    assert_eq!(alts[0].prob.as_ref().and_then(const_eval), Some(q(1, 2)));
                    assert_eq!(alts[1].prob.as_ref().and_then(const_eval), Some(q(1, 2)));
                }
                _ => panic!(),
            },
            _ => panic!(),
        }
    }

    #[test]
    fn trailing_probability_keeps_old_value() {
        // `x = x + 1 {0.7}` means: with probability 3/10 keep x
        let src = "x = 0\nwhile true:\n    x = x + 1 {0.7}\nend\n";
        let ast = parse(src).unwrap();
        match &ast.body[0] {
            Statement::Assign(a) => match &a.rhs {
                AssignRhs::Choice(alts) => {
                    assert_eq!(alts.len(), 2);
                    assert_eq!(alts[1].exprs, vec![Expr::Ident("x".into())]);
                    assert_eq!(alts[1].prob.as_ref().and_then(const_eval), Some(q(3, 10)));
                }
                _ => panic!(),
            },
            _ => panic!(),
        }
    }

    #[test]
    fn probability_sum_above_one_rejected() {
        let src = "x = 0\nwhile true:\n    x = 1 {0.7} 2 {0.5} 3\nend\n";
        assert!(matches!(parse(src), Err(Error::Probability(_))));
    }

    #[test]
    fn params_are_unassigned_identifiers() {
        let src = "x = 0\nwhile true:\n    x = x + 1 {p} x - 1\nend\n";
        let ast = parse(src).unwrap();
        assert!(ast.params.contains("p"));
        assert_eq!(ast.vars, vec!["x"]);
    }

    #[test]
    fn use_before_def_rejected() {
        let src = "x = y\ny = 0\nwhile true:\n    x = x + 1\nend\n";
        assert_eq!(parse(src), Err(Error::UseBeforeDef("y".into())));
        // variable first assigned mid-body, read earlier in the body
        let src2 = "x = 0\nwhile true:\n    x = x + d\n    d = Bernoulli(1/2)\nend\n";
        assert_eq!(parse(src2), Err(Error::UseBeforeDef("d".into())));
        // same statement order but d is initialized: fine
        let src3 = "x = 0\nd = 0\nwhile true:\n    x = x + d\n    d = Bernoulli(1/2)\nend\n";
        assert!(parse(src3).is_ok());
    }

    #[test]
    fn if_else_and_guard() {
        let src = "\
stop = 0
count = 0
while stop == 0:
    stop = Bernoulli(1/2)
    if stop == 0:
        count = count + 1
    else:
        count = count
    end
end
";
        let ast = parse(src).unwrap();
        assert!(matches!(ast.guard, Some(BoolExpr::Cmp(_, CmpOp::Eq, _))));
        match &ast.body[1] {
            Statement::If(ifs) => {
                assert_eq!(ifs.branches.len(), 1);
                assert!(ifs.else_branch.is_some());
            }
            _ => panic!(),
        }
    }

    #[test]
    fn multi_target_tuple_choice() {
        let src = "x = 0\ny = 0\nwhile true:\n    x, y = x + 1, y - 1 {1/3} x, y + 1\nend\n";
        let ast = parse(src).unwrap();
        match &ast.body[0] {
            Statement::Assign(a) => {
                assert_eq!(a.targets, vec!["x", "y"]);
                match &a.rhs {
                    AssignRhs::Choice(alts) => {
                        assert_eq!(alts.len(), 2);
                        assert_eq!(alts[1].prob.as_ref().and_then(const_eval), Some(q(2, 3)));
                    }
                    _ => panic!(),
                }
            }
            _ => panic!(),
        }
    }

    #[test]
    fn pretty_print_round_trip() {
        let srcs = [
            "x = 0\nwhile true:\n    x = x + 2 {1/2} x - 1\nend\n",
            "x = 1\ng = 0\nwhile x < 10:\n    g = Normal(x, 1)\n    if g > 0:\n        x = x + 1\n    end\nend\n",
            "x = 0\ny = 0\nwhile true:\n    y = y + 1 {1/2} y - 2 {1/3} y\n    x = x + y**2\nend\n",
        ];
        for src in srcs {
            let ast = parse(src).unwrap();
            let printed = ast.to_string();
            let ast2 = parse(&printed).unwrap();
            assert_eq!(ast, ast2, "round trip failed for:\n{}", printed);
        }
    }
}
