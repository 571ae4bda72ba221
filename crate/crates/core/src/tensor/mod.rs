//! Symmetric forms in covector variables, compound matrices and the
//! Plücker-type embedding of symmetric matrices.

mod forms;
mod matrix;

pub use forms::{
    factor_quartic, monomials, multiply_quadratics, Factorization, Form, QuadraticForm,
    QuarticForm,
};
pub(crate) use forms::pair_exponent;
pub use matrix::{
    adjugate, compound, lie_quadric_residual, minor_basis, pluecker_embed, rank_one_deform,
    subsets, upper_index, upper_len, upper_pairs, Minor, MinorBasis, SymMatrix, MAX_DIM,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TensorError {
    #[error("dimension mismatch: {0} vs {1}")]
    DimMismatch(usize, usize),
    #[error("expected {expected} coordinates, found {found}")]
    Length { expected: usize, found: usize },
    #[error("compound order {k} out of range for n = {n}")]
    CompoundOrder { k: usize, n: usize },
    #[error("unsupported dimension {0} (expected 2..=4)")]
    UnsupportedDim(usize),
    #[error("rank-one direction must be nonzero")]
    ZeroVector,
    #[error("exponent vector does not match the form")]
    BadExponent,
    #[error("least-squares solve failed")]
    Solve,
}
