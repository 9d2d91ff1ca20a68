//! Reconstruction of the surface temperature `v(x, t) = u(x, 0, t)` of a conducting strip
//! `0 < y < 2` from the temperature histories on the interior lines `y = 1` and `y = 2`.
//!
//! The data satisfy the convolution equation
//! `S * v = 2 R * f - S * g + 4 pi f`, which is inverted by dividing by the symbol of `S`
//! on a bounded frequency window whose size is tied to the noise level. The regularized
//! solution is band-limited and can be stored as a two-dimensional Sinc series.

pub mod error;
pub mod fields;
pub mod harness;
pub mod kernels;
pub(crate) mod quad;
pub mod regularizer;
pub mod sinc;
pub mod transform;

pub use error::{Error, Result};
pub use fields::{ComplexField, GridSpec, RealField};
pub use kernels::{KernelSpec, ProblemId, TestProblem};
pub use regularizer::{BoundReport, CutoffRegion, Mode, RegParams};
pub use sinc::{IndexSet, SincExpansion};
pub use transform::SpectralWindow;
