//! Matrix exponential by scaling and squaring with a diagonal Padé(6,6)
//! approximant.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

type C64 = Complex64;

fn norm1(m: &DMatrix<C64>) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|x| x.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// `exp(t G)`, with the number of squarings chosen so that
/// `‖tG‖₁ / 2^s ≤ 0.5`.
pub fn matrix_exp(g: &DMatrix<C64>, t: f64) -> Result<DMatrix<C64>> {
    if !g.is_square() {
        return Err(Error::ShapeMismatch(g.nrows(), g.ncols(), g.ncols(), g.ncols()));
    }
    if !t.is_finite() || g.iter().any(|x| !x.re.is_finite() || !x.im.is_finite()) {
        return Err(Error::NonFinite("matrix exponential input"));
    }
    let n = g.nrows();
    let a = g * C64::new(t, 0.0);
    let norm = norm1(&a);
    let s = if norm > 0.5 {
        (norm / 0.5).log2().ceil().max(0.0) as i32
    } else {
        0
    };
    let a = a * C64::new(0.5f64.powi(s), 0.0);

    // Padé(6,6) coefficients c_k = (12-k)! 6! / (12! k! (6-k)!)
    let mut c = [0.0f64; 7];
    c[0] = 1.0;
    for k in 1..=6 {
        c[k] = c[k - 1] * (6 - k + 1) as f64 / (k as f64 * (12 - k + 1) as f64);
    }
    let id = DMatrix::<C64>::identity(n, n);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let cc = |k: usize| C64::new(c[k], 0.0);
    let even = &id * cc(0) + &a2 * cc(2) + &a4 * cc(4) + &a6 * cc(6);
    let odd = &a * (&id * cc(1) + &a2 * cc(3) + &a4 * cc(5));
    let p = &even + &odd;
    let q = &even - &odd;
    let mut r = q
        .lu()
        .solve(&p)
        .ok_or(Error::NonFinite("singular Padé denominator"))?;
    for _ in 0..s {
        r = &r * &r;
    }
    if r.iter().any(|x| !x.re.is_finite() || !x.im.is_finite()) {
        return Err(Error::NonFinite("matrix exponential"));
    }
    Ok(r)
}
