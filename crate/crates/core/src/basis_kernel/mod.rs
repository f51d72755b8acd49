//! Truncated Bergman spaces and kernel derivative tables.

mod basis;
mod closed_form;
mod model;
mod norms;
mod table;

pub use basis::Basis;
pub use closed_form::ClosedFormKernel;
pub use model::{
    build_model, build_model_with, orthonormalize, KernelModel, NormSource, Orthonormalization, DEFAULT_DEGREE,
    DEFAULT_DROP_TOL,
};
pub use norms::{gram_general, monomial_norm_closed};
pub use table::{kernel_derivs, KernelDerivTable, KernelSource};
