//! Model-space kernels, the `A_φ` formula and its functional-calculus oracle,
//! the intertwiner `Y`, and the `θ(R)` witness for an isometric corner.

pub mod example41;
pub mod model;
pub mod theorem23;

pub use example41::{
    a_phi, a_phi_oracle, construct_y, eigenvector_check, random_instance, EigenvectorReport, Example41Instance,
    IntertwinerReport,
};
pub use model::{build_model_basis, ModelBasis};
pub use theorem23::{geometric_zeros, random_theorem23_data, verify_theorem23, Theorem23Report, DEFAULT_TAIL_TARGET};
