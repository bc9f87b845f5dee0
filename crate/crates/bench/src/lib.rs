//! Fixtures shared by the benchmarks.

use sigcalc::powerseries::Seq;
use sigcalc::tensor::{tensor_size, Tensor};
use sigcalc::Complex64 as C;

/// Dense tensor with deterministic, slowly decaying coefficients.
pub fn dense_tensor(dim: usize, depth: usize) -> Tensor {
    let coeffs = (0..tensor_size(dim, depth))
        .map(|i| C::new(1.0 / (1.0 + i as f64), 0.5 / (2.0 + i as f64)))
        .collect();
    Tensor::from_coeffs(dim, depth, coeffs).expect("sizes agree")
}

/// Quartic initial datum `-x⁴/4!` in the power basis.
pub fn quartic(k: usize) -> Seq {
    let mut v = vec![C::new(0.0, 0.0); k.max(4) + 1];
    v[4] = C::new(-1.0 / 24.0, 0.0);
    Seq::new(v).expect("non-empty")
}
