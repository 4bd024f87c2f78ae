//! Finite-dimensional algebra of symmetric vector-valued bilinear forms and
//! (0,4)-curvature tensors.

mod algebra;
mod form;
mod lemma;
mod quad;

pub use algebra::{
    contract, gauss_curvature, index_of, is_flat, kn_scalar, kn_vector, metric_kn, nullity_space, r1_tensor, sc, scal,
    sharp, UNIT_TOLERANCE,
};
pub(crate) use algebra::index_of_eigenvalues;
pub use form::{symmetrize, BilinearForm, Subspace, SymmetricOperator};
pub use lemma::{lemma_decompose, LemmaDecomposition};
pub use quad::QuadTensor;
