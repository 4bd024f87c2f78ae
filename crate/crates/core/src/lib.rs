//! Numerical toolkit for the Kulkarni–Nomizu algebra of second fundamental
//! forms, pinching functionals on bilinear forms, and total-curvature
//! identities on exact immersions of sphere products.

pub mod constants;
pub mod error;
pub mod geometry;
pub mod morse;
pub mod optim;
pub mod reduce;
pub mod report;
pub mod quadrature;
pub mod tensor;
pub mod topology;

pub use error::{Error, Result};
pub use tensor::{BilinearForm, QuadTensor, Subspace, SymmetricOperator};
