//! Exact computational-algebra kernel: rationals, multivariate polynomials
//! over a parameter field, Gröbner bases, linear solving, and Hilbert bases
//! of linear Diophantine systems.

pub mod coeff;
pub mod field;
pub mod groebner;
pub mod hilbert;
pub mod linsolve;
pub mod mpoly;
pub mod surd;

pub use coeff::Coeff;
pub use field::Field;
pub use groebner::{eliminate_vars, groebner_basis, in_ideal, normal_form};
pub use hilbert::{hilbert_basis_nat, DioSystem};
pub use linsolve::{nullspace, solve_linear, LinSolve};
pub use mpoly::{MonomialOrder, MPoly, OrderKind, QPoly};
pub use surd::{QuadraticSurd, Surd};

/// Polynomial in program variables (and auxiliary symbols) with
/// rational-function coefficients: the universal currency of the analysis.
pub type PPoly = MPoly<Coeff>;

/// `Coeff` extended by one quadratic surd, used when fitting closed forms.
pub type SurdCoeff = Surd<Coeff>;
