//! Rotation coefficients `H_n^{m'm}(beta)` of spherical-harmonic expansions and
//! the closely related Wigner d-matrix, computed for large degrees.
//!
//! The main engine ([`recursion`]) fills one degree at a time from two
//! Legendre-seeded layers with a recurrence that stays inside the subspace, at
//! `O(n^2)` cost per degree. An independent FFT-based engine ([`fft`]), a
//! direct Wigner sum and an axis-flip reconstruction ([`oracle`]) exist to
//! cross-check it, and [`analysis`] hosts the bounds, error metrics and
//! stability experiments.

pub mod analysis;
pub mod error;
pub mod fft;
pub mod oracle;
pub mod recursion;
pub mod rotation;
pub mod special;

mod engine;

pub use engine::{compute, compute_any_beta, reduce_beta, Algorithm, BetaReduction};
pub use error::{Error, Result};
pub use recursion::{compute_all, compute_subspace, full_matrix, CoeffTriangle, DenseMatrix};
