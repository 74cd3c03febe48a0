//! Abstract syntax for the input loop language, plus the DSL pretty-printer
//! (whose output reparses to a structurally equal program).

use crate::algebra::field::rat_str;
use num_rational::BigRational;
use std::collections::BTreeSet;
use std::fmt;

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Const(BigRational),
    /// Program variable or symbolic parameter; classified by `Ast::params`.
    Ident(String),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    Pow(Box<Expr>, u32),
}

impl Expr {
    pub fn int(n: i64) -> Expr {
        Expr::Const(BigRational::from_integer(n.into()))
    }

    pub fn idents(&self, out: &mut BTreeSet<String>) {
        match self {
            Expr::Const(_) => {}
            Expr::Ident(x) => {
                out.insert(x.clone());
            }
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.idents(out);
                b.idents(out);
            }
            Expr::Neg(a) => a.idents(out),
            Expr::Pow(a, _) => a.idents(out),
        }
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, prec: u8) -> fmt::Result {
        let my = match self {
            Expr::Add(..) | Expr::Sub(..) => 1,
            Expr::Mul(..) | Expr::Div(..) => 2,
            Expr::Neg(..) => 3,
            Expr::Pow(..) => 4,
            Expr::Const(c) if c.denom() != &num_bigint::BigInt::from(1) => 2,
            _ => 5,
        };
        if my < prec {
            write!(f, "(")?;
        }
        match self {
            Expr::Const(c) => write!(f, "{}", rat_str(c))?,
            Expr::Ident(x) => write!(f, "{}", x)?,
            Expr::Add(a, b) => {
                a.fmt_prec(f, 1)?;
                write!(f, " + ")?;
                b.fmt_prec(f, 2)?;
            }
            Expr::Sub(a, b) => {
                a.fmt_prec(f, 1)?;
                write!(f, " - ")?;
                b.fmt_prec(f, 2)?;
            }
            Expr::Mul(a, b) => {
                a.fmt_prec(f, 2)?;
                write!(f, "*")?;
                b.fmt_prec(f, 3)?;
            }
            Expr::Div(a, b) => {
                a.fmt_prec(f, 2)?;
                write!(f, "/")?;
                b.fmt_prec(f, 4)?;
            }
            Expr::Neg(a) => {
                write!(f, "-")?;
                a.fmt_prec(f, 3)?;
            }
            Expr::Pow(a, e) => {
                a.fmt_prec(f, 5)?;
                write!(f, "**{}", e)?;
            }
        }
        if my < prec {
            write!(f, ")")?;
        }
        Ok(())
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl fmt::Display for CmpOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            CmpOp::Eq => "==",
            CmpOp::Ne => "!=",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        };
        write!(f, "{}", s)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum BoolExpr {
    True,
    False,
    Cmp(Expr, CmpOp, Expr),
    Not(Box<BoolExpr>),
    And(Box<BoolExpr>, Box<BoolExpr>),
    Or(Box<BoolExpr>, Box<BoolExpr>),
}

impl BoolExpr {
    pub fn idents(&self, out: &mut BTreeSet<String>) {
        match self {
            BoolExpr::True | BoolExpr::False => {}
            BoolExpr::Cmp(a, _, b) => {
                a.idents(out);
                b.idents(out);
            }
            BoolExpr::Not(a) => a.idents(out),
            BoolExpr::And(a, b) | BoolExpr::Or(a, b) => {
                a.idents(out);
                b.idents(out);
            }
        }
    }
}

impl fmt::Display for BoolExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoolExpr::True => write!(f, "true"),
            BoolExpr::False => write!(f, "false"),
            BoolExpr::Cmp(a, op, b) => write!(f, "{} {} {}", a, op, b),
            BoolExpr::Not(a) => write!(f, "not {}", a),
            BoolExpr::And(a, b) => write!(f, "{} and {}", a, b),
            BoolExpr::Or(a, b) => write!(f, "{} or {}", a, b),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum DistKind {
    Bernoulli,
    Beta,
    Categorical,
    DiscreteUniform,
    Exponential,
    Gamma,
    Laplace,
    Normal,
    TruncNormal,
    Uniform,
}

impl DistKind {
    pub fn from_name(name: &str) -> Option<DistKind> {
        Some(match name {
            "Bernoulli" => DistKind::Bernoulli,
            "Beta" => DistKind::Beta,
            "Categorical" => DistKind::Categorical,
            "DiscreteUniform" => DistKind::DiscreteUniform,
            "Exponential" => DistKind::Exponential,
            "Gamma" => DistKind::Gamma,
            "Laplace" => DistKind::Laplace,
            "Normal" => DistKind::Normal,
            "TruncNormal" => DistKind::TruncNormal,
            "Uniform" => DistKind::Uniform,
            _ => return None,
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            DistKind::Bernoulli => "Bernoulli",
            DistKind::Beta => "Beta",
            DistKind::Categorical => "Categorical",
            DistKind::DiscreteUniform => "DiscreteUniform",
            DistKind::Exponential => "Exponential",
            DistKind::Gamma => "Gamma",
            DistKind::Laplace => "Laplace",
            DistKind::Normal => "Normal",
            DistKind::TruncNormal => "TruncNormal",
            DistKind::Uniform => "Uniform",
        }
    }

    /// Accepted argument counts.
    pub fn arity_ok(&self, n: usize) -> bool {
        match self {
            DistKind::Bernoulli | DistKind::Exponential => n == 1,
            DistKind::Beta
            | DistKind::DiscreteUniform
            | DistKind::Gamma
            | DistKind::Laplace
            | DistKind::Normal
            | DistKind::Uniform => n == 2,
            DistKind::TruncNormal => n == 4,
            DistKind::Categorical => n >= 1,
        }
    }
}

/// One probabilistic-choice alternative: a value tuple and its probability.
/// `prob = None` marks the implicit-remainder alternative before
/// normalization; `parse` always makes it explicit.
#[derive(Clone, Debug, PartialEq)]
pub struct ChoiceAlt {
    pub exprs: Vec<Expr>,
    pub prob: Option<Expr>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum AssignRhs {
    Choice(Vec<ChoiceAlt>),
    Draw {
        /// State-dependent location part split off by `normalize`;
        /// zero directly after parsing.
        shift: Expr,
        dist: DistKind,
        args: Vec<Expr>,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Assignment {
    pub targets: Vec<String>,
    pub rhs: AssignRhs,
}

impl Assignment {
    pub fn deterministic(target: &str, e: Expr) -> Assignment {
        Assignment {
            targets: vec![target.to_string()],
            rhs: AssignRhs::Choice(vec![ChoiceAlt {
                exprs: vec![e],
                prob: None,
            }]),
        }
    }

    /// Identifiers read on the right-hand side.
    pub fn reads(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        match &self.rhs {
            AssignRhs::Choice(alts) => {
                for alt in alts {
                    for e in &alt.exprs {
                        e.idents(&mut out);
                    }
                    if let Some(p) = &alt.prob {
                        p.idents(&mut out);
                    }
                }
            }
            AssignRhs::Draw { shift, args, .. } => {
                shift.idents(&mut out);
                for a in args {
                    a.idents(&mut out);
                }
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct IfStmt {
    pub branches: Vec<(BoolExpr, Vec<Statement>)>,
    pub else_branch: Option<Vec<Statement>>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Statement {
    Assign(Assignment),
    If(IfStmt),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Ast {
    pub init: Vec<Assignment>,
    /// `None` is the nondeterministic guard `⋆` (equivalently `true`).
    pub guard: Option<BoolExpr>,
    pub body: Vec<Statement>,
    /// Identifiers never assigned: symbolic real constants.
    pub params: BTreeSet<String>,
    /// Program variables in first-assignment order.
    pub vars: Vec<String>,
    /// Original guard retained by the `normalize` guard rewrite
    /// (needed for `after_loop` semantics).
    pub original_guard: Option<BoolExpr>,
}

impl Ast {
    pub fn is_param(&self, name: &str) -> bool {
        self.params.contains(name)
    }

    /// Recompute `vars`/`params` after a structural edit.
    pub fn reclassify(&mut self) {
        let mut assigned: Vec<String> = Vec::new();
        let visit_stmts = |stmts: &[Statement], assigned: &mut Vec<String>| {
            fn walk(stmts: &[Statement], assigned: &mut Vec<String>) {
                for s in stmts {
                    match s {
                        Statement::Assign(a) => {
                            for t in &a.targets {
                                if !assigned.contains(t) {
                                    assigned.push(t.clone());
                                }
                            }
                        }
                        Statement::If(ifs) => {
                            for (_, b) in &ifs.branches {
                                walk(b, assigned);
                            }
                            if let Some(e) = &ifs.else_branch {
                                walk(e, assigned);
                            }
                        }
                    }
                }
            }
            walk(stmts, assigned)
        };
        for a in &self.init {
            for t in &a.targets {
                if !assigned.contains(t) {
                    assigned.push(t.clone());
                }
            }
        }
        visit_stmts(&self.body, &mut assigned);
        let mut read = BTreeSet::new();
        let collect_stmts = |stmts: &[Statement], read: &mut BTreeSet<String>| {
            fn walk(stmts: &[Statement], read: &mut BTreeSet<String>) {
                for s in stmts {
                    match s {
                        Statement::Assign(a) => {
                            read.extend(a.reads());
                        }
                        Statement::If(ifs) => {
                            for (c, b) in &ifs.branches {
                                c.idents(read);
                                walk(b, read);
                            }
                            if let Some(e) = &ifs.else_branch {
                                walk(e, read);
                            }
                        }
                    }
                }
            }
            walk(stmts, read)
        };
        for a in &self.init {
            read.extend(a.reads());
        }
        collect_stmts(&self.body, &mut read);
        if let Some(g) = &self.guard {
            g.idents(&mut read);
        }
        if let Some(g) = &self.original_guard {
            g.idents(&mut read);
        }
        self.params = read
            .into_iter()
            .filter(|x| !assigned.contains(x))
            .collect();
        self.vars = assigned;
    }
}

// --- pretty printing -------------------------------------------------------

fn fmt_assignment(a: &Assignment, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    write!(f, "{} = ", a.targets.join(", "))?;
    match &a.rhs {
        AssignRhs::Choice(alts) => {
            for (i, alt) in alts.iter().enumerate() {
                if i > 0 {
                    write!(f, " ")?;
                }
                let strs: Vec<String> = alt.exprs.iter().map(|e| e.to_string()).collect();
                write!(f, "{}", strs.join(", "))?;
                if let Some(p) = &alt.prob {
                    if i + 1 < alts.len() {
                        write!(f, " {{{}}}", p)?;
                    }
                    // trailing explicit probability on the last alternative is
                    // redundant after normalization; omit it
                }
            }
        }
        AssignRhs::Draw { shift, dist, args } => {
            let args: Vec<String> = args.iter().map(|e| e.to_string()).collect();
            if matches!(shift, Expr::Const(c) if num_traits::Zero::is_zero(c)) {
                write!(f, "{}({})", dist.name(), args.join(", "))?;
            } else {
                write!(f, "{} + {}({})", shift, dist.name(), args.join(", "))?;
            }
        }
    }
    Ok(())
}

fn fmt_statements(stmts: &[Statement], indent: usize, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    let pad = "    ".repeat(indent);
    for s in stmts {
        match s {
            Statement::Assign(a) => {
                write!(f, "{}", pad)?;
                fmt_assignment(a, f)?;
                writeln!(f)?;
            }
            Statement::If(ifs) => {
                for (i, (c, b)) in ifs.branches.iter().enumerate() {
                    if i == 0 {
                        writeln!(f, "{}if {}:", pad, c)?;
                    } else {
                        writeln!(f, "{}else if {}:", pad, c)?;
                    }
                    fmt_statements(b, indent + 1, f)?;
                }
                if let Some(e) = &ifs.else_branch {
                    writeln!(f, "{}else:", pad)?;
                    fmt_statements(e, indent + 1, f)?;
                }
                writeln!(f, "{}end", pad)?;
            }
        }
    }
    Ok(())
}

impl fmt::Display for Ast {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for a in &self.init {
            fmt_assignment(a, f)?;
            writeln!(f)?;
        }
        match &self.guard {
            None => writeln!(f, "while true:")?,
            Some(g) => writeln!(f, "while {}:", g)?,
        }
        fmt_statements(&self.body, 1, f)?;
        writeln!(f, "end")
    }
}
