//! Numerical laboratory for Bergman geometry on model pseudoconvex domains.
//!
//! The crate builds truncated Bergman spaces (orthonormalized monomial bases
//! in `L²(Ω)`), evaluates the Bergman kernel and its mixed derivatives, and
//! derives from them the Bergman metric, curvature tensor and the
//! bisectional / holomorphic sectional / Ricci curvatures. Bergman's minimum
//! integrals `I⁰`, `I¹`, `I²` are solved independently as least-norm
//! problems, so the classical identities tying them to the kernel and the
//! curvature can be checked at every truncation level.
//!
//! Module map:
//!
//! - [`domains`]: model domains, defining functions, boundary projection,
//!   quadrature, anisotropic polydiscs.
//! - [`basis_kernel`]: monomial bases, Gram matrices, pivoted Cholesky,
//!   kernel derivative tables, closed-form kernels.
//! - [`geometry`]: metric, curvature tensor, `B`, `H`, `Ric`.
//! - [`minint`]: minimum integrals and identity checks.
//! - [`experiments`]: boundary sweeps, localization, polydisc squeeze,
//!   weight checker, the invariant suite.

pub mod basis_kernel;
pub mod domains;
pub mod error;
pub mod experiments;
pub mod geometry;
pub mod integrate;
pub mod linalg;
pub mod minint;
pub mod multi_index;
pub mod partitions;

pub use error::{Error, Result};
pub use multi_index::MultiIndex;

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex<f64>;

/// Shorthand constructor for a complex number.
#[inline]
pub fn c64(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Hermitian inner product `Σ a_j conj(b_j)`.
pub fn cdot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x * y.conj()).sum()
}

/// Euclidean norm of a complex vector.
pub fn cnorm(a: &[C64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}
