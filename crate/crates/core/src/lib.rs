//! Lie algebroids over chart-described manifolds: cochain complexes,
//! twisted and equivariant differentials, A-connections, and two-sided
//! numerical checks of fixed-point localization and Bott-type residue
//! formulas.

// Tensor code indexes several arrays by the same frame index.
#![allow(clippy::needless_range_loop)]
pub mod algebroid;
pub mod alt;
pub mod bott;
pub mod checks;
pub mod connection;
pub mod equivariant;
pub mod expr;
pub mod geometry;
pub mod linalg;
pub mod localization;
pub mod sampling;
pub mod spec;
pub mod twisted;

use thiserror::Error;

pub use algebroid::{AlgebroidKind, AlgebroidModel};
pub use bott::{BottReport, WeightedPoly};
pub use connection::{AConnectionModel, InvariantPoly};
pub use equivariant::{EquivTwistedCochain, LieAlgebraAction};
pub use expr::{parse_expr, Compiled, EvalError, Expr, ParseError, SymbolTable};
pub use localization::{LocalizationReport, Tolerance};
pub use sampling::{Residual, ResidualReport};
pub use spec::{load_example, Example, BUILTINS};

/// Sign and normalisation conventions every numeric result depends on.
/// Reports carry a hash of this text so that numbers produced under
/// different conventions are never compared by accident.
pub const CONVENTIONS: &str = "\
twisted coefficients: against tau0 = (e_1^...^e_r) (x) (dx^1^...^dx^m)
twisted differential: delta~ = delta + theta^, theta the modular 1-cochain
p sign: (-1)^(j(j-1)/2) with j = r - k; p is the identity in top degree
chain map: p(delta~ psi) = (-1)^k d p(psi)
equivariant differential: delta_g = delta - i_{b(xi)}
de Rham partner under p: d + i_{xi*}
linearization: L = -d(xi*) (the Jacobian of xi* with a minus sign)
sqrt det: Pfaffian in an oriented orthonormal frame, Pf([[0,a],[-a,0]]) = a
curvature: R = delta omega + omega^omega, moment mu = Lambda - omega(b(xi))
equivariant curvature: R^g = R + mu
chern classes: sigma_i = i-th elementary symmetric function of eigenvalues
bott normalisation: Phi_Xi = (-2 pi)^(-m/2) int p(Phi(R) Xi)
";

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("degree error: {0}")]
    Degree(String),
    #[error("invalid model: {0}")]
    Invalid(String),
    #[error("axiom check failed: {0}")]
    Axiom(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("example file: {0}")]
    Spec(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
