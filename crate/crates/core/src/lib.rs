//! Signature SDEs as affine and polynomial processes on the truncated tensor
//! algebra.
//!
//! The crate computes Fourier–Laplace transforms and expected signatures by
//! solving tensor-valued Riccati, transport and linear ODEs, and ships the
//! Monte-Carlo and quadrature oracles used to validate them.

pub mod error;
pub mod expm;
pub mod montecarlo;
pub mod ode;
pub mod operators;
pub mod powerseries;
pub mod quadrature;
pub mod schemes;
pub mod signature;
pub mod tensor;

pub use num_complex::Complex64;

pub use error::{Error, Result};
pub use montecarlo::{McEstimate, SimConfig, SimScheme};
pub use operators::SdeSpec;
pub use powerseries::{Model1D, Seq};
pub use schemes::{SchemeConfig, Solver, Status, Trajectory};
pub use signature::{GroupLike, PiecewisePath};
pub use tensor::{Partition, Tensor, Word};

/// A flat complex coefficient vector, index 0 holding the empty-word
/// (constant) coefficient. Implemented by [`Tensor`] and [`Seq`] so that the
/// ODE and transport kernels work on both.
pub trait Coefficients: Clone + Send + Sync {
    fn coeffs(&self) -> &[Complex64];
    fn coeffs_mut(&mut self) -> &mut [Complex64];

    fn constant(&self) -> Complex64 {
        self.coeffs()[0]
    }

    fn max_abs(&self) -> f64 {
        self.coeffs().iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    fn is_finite(&self) -> bool {
        self.coeffs().iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    /// `self += alpha * other`.
    fn axpy(&mut self, alpha: f64, other: &Self) {
        for (a, b) in self.coeffs_mut().iter_mut().zip(other.coeffs()) {
            *a += b * alpha;
        }
    }
}
