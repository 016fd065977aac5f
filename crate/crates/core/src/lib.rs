//! Multiple orthogonal polynomials of mixed type, their Christoffel-Darboux
//! kernels, the Riemann-Hilbert matrices built from them, and the Gaussian
//! random matrix ensemble with external source.

pub mod error;
pub mod export;
pub mod kernel;
pub mod linalg;
pub mod mop;
pub mod multi_index;
pub mod poly;
pub mod quadrature;
pub mod recurrence;
pub mod report;
pub mod rh;
pub mod rmt;
pub mod scalar;
pub mod suite;
pub mod weights;

pub use error::{Error, Result};
pub use mop::{h_coeff, type1, type2, MopSystem, SolveInfo, TypeII, TypeISolution};
pub use multi_index::{canonical_path, extend_path, MultiIndex, Path, PathOrder};
pub use poly::Poly;
pub use scalar::{Dd, Rational, Scalar};
pub use weights::{MeasureSpec, Precision, ScalarMode, WeightSystem};
