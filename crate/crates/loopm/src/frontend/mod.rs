//! Frontend: lexing, parsing, normalization, finite-support analysis, and
//! admissibility classification of input programs.

pub mod ast;
pub mod lexer;
pub mod normalize;
pub mod parser;
pub mod poly;
pub mod restrict;
pub mod supports;

pub use ast::{Assignment, AssignRhs, Ast, BoolExpr, ChoiceAlt, CmpOp, DistKind, Expr, IfStmt, Statement};
pub use normalize::normalize;
pub use parser::parse;
pub use poly::{expr_to_coeff, expr_to_poly, poly_to_expr};
pub use restrict::{classify, Classification};
pub use supports::{variable_supports, Support, SupportEnv};
