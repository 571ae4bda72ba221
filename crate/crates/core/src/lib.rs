//! Symbol calculus for scalar second-order PDEs `F(x, u, Du, D²u) = 0`.
//!
//! The crate decides whether an equation is completely exceptional by
//! checking, at points of its zero locus, that the second symbol is divisible
//! by the principal symbol. The same question is answered independently by
//! fitting `F` against the minors of the Hessian (Monge-Ampère form), and, for
//! two independent variables, by Lax's characteristic-speed condition and by
//! testing whether characteristic rank-one lines stay inside the equation.
//!
//! The crate is `no_std` and only needs `alloc`.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod charvar;
pub mod expr;
pub mod ma;
pub mod symbol;
pub mod tensor;

pub use charvar::{CharRoot, CharSpeeds, CharType, PlanarPde};
pub use expr::{Expr, ExprError, Func, JetPoint, Var};
pub use ma::{MaClassification, MaKind, MinorExpansion};
pub use symbol::{ExceptionalityVerdict, Pde, SampleBox, Verdict};
pub use tensor::{QuadraticForm, QuarticForm, SymMatrix};
