//! Affine operator `R`, polynomial operator `L` and their conversions.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::{shift1, shift2, shuffle, shuffle_log, tensor_size, Tensor, Word};
use crate::Coefficients;

type C64 = Complex64;

/// Drift and diffusion characteristics of a signature SDE together with its
/// initial point. Coefficient functions are `b_i(x) = <ℓ_b^i, x>` and
/// `a_ij(x) = <ℓ_a^{ij}, x>`.
#[derive(Clone, Debug, PartialEq)]
pub struct SdeSpec {
    pub x0: Vec<f64>,
    pub b: Vec<Tensor>,
    pub a: Vec<Vec<Tensor>>,
}

#[derive(Serialize, Deserialize)]
struct SdeSpecJson {
    d: usize,
    x0: Vec<f64>,
    b: Vec<String>,
    a: Vec<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    depth: Option<usize>,
}

impl SdeSpec {
    /// Validates shapes and symmetry of `a`; characteristics are brought to a
    /// common depth (the largest one given).
    pub fn new(x0: Vec<f64>, b: Vec<Tensor>, a: Vec<Vec<Tensor>>) -> Result<Self> {
        let d = x0.len();
        if d == 0 {
            return Err(Error::InvalidParameter("state dimension must be positive".into()));
        }
        if b.len() != d || a.len() != d || a.iter().any(|r| r.len() != d) {
            return Err(Error::InvalidParameter(format!(
                "characteristics must be a {d}-vector and a {d}x{d} array"
            )));
        }
        if let Some(t) = b.iter().chain(a.iter().flatten()).find(|t| t.dim() != d) {
            return Err(Error::ShapeMismatch(t.dim(), t.depth(), d, t.depth()));
        }
        let depth = b
            .iter()
            .chain(a.iter().flatten())
            .map(Tensor::depth)
            .max()
            .unwrap_or(0);
        let b: Vec<Tensor> = b.iter().map(|t| t.resized(depth)).collect();
        let a: Vec<Vec<Tensor>> = a
            .iter()
            .map(|r| r.iter().map(|t| t.resized(depth)).collect())
            .collect();
        for i in 0..d {
            for j in 0..i {
                let diff = (&a[i][j] - &a[j][i]).max_abs();
                if diff > 1e-12 {
                    return Err(Error::InvalidParameter(format!(
                        "diffusion characteristic not symmetric at ({}, {}): {diff:e}",
                        i + 1,
                        j + 1
                    )));
                }
            }
        }
        Ok(SdeSpec { x0, b, a })
    }

    pub fn dim(&self) -> usize {
        self.x0.len()
    }

    /// Common truncation depth of the characteristics.
    pub fn depth(&self) -> usize {
        self.b[0].depth()
    }

    /// `d`-dimensional standard Brownian motion started at zero.
    pub fn brownian(d: usize, depth: usize) -> Self {
        let b = vec![Tensor::zeros(d, depth); d];
        let a = (0..d)
            .map(|i| {
                (0..d)
                    .map(|j| {
                        if i == j {
                            Tensor::unit(d, depth)
                        } else {
                            Tensor::zeros(d, depth)
                        }
                    })
                    .collect()
            })
            .collect();
        SdeSpec {
            x0: vec![0.0; d],
            b,
            a,
        }
    }

    /// Adds time as letter 1: `b_time = e_∅`, no diffusion in the time
    /// direction. State characteristics are given over the extended alphabet.
    pub fn time_extended(
        x0_state: Vec<f64>,
        b_state: Vec<Tensor>,
        a_state: Vec<Vec<Tensor>>,
    ) -> Result<Self> {
        let d = x0_state.len() + 1;
        let depth = b_state
            .iter()
            .chain(a_state.iter().flatten())
            .map(Tensor::depth)
            .max()
            .unwrap_or(0);
        let zero = Tensor::zeros(d, depth);
        let mut b = vec![Tensor::unit(d, depth)];
        b.extend(b_state);
        let mut a = vec![vec![zero.clone(); d]];
        for row in a_state {
            let mut r = vec![zero.clone()];
            r.extend(row);
            a.push(r);
        }
        let mut x0 = vec![0.0];
        x0.extend(x0_state);
        SdeSpec::new(x0, b, a)
    }

    /// Time-extended Black–Scholes model `dS = σ S dW`, letter 1 time and
    /// letter 2 the price, so that `a_22 = σ²(2 e_22 + 2 S0 e_2 + S0² e_∅)`.
    pub fn black_scholes(sigma: f64, s0: f64) -> Result<Self> {
        if !(sigma >= 0.0) || !s0.is_finite() {
            return Err(Error::InvalidParameter("need σ ≥ 0 and finite S0".into()));
        }
        let s2 = sigma * sigma;
        let c = |x: f64| C64::new(x, 0.0);
        let a22 = Tensor::from_words(
            2,
            2,
            [
                (Word::new(vec![2, 2]), c(2.0 * s2)),
                (Word::new(vec![2]), c(2.0 * s0 * s2)),
                (Word::empty(), c(s0 * s0 * s2)),
            ],
        )?;
        SdeSpec::time_extended(vec![s0], vec![Tensor::zeros(2, 2)], vec![vec![a22]])
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: SdeSpecJson = serde_json::from_str(text)?;
        if raw.x0.len() != raw.d {
            return Err(Error::LengthMismatch(raw.x0.len(), raw.d));
        }
        let parse = |s: &String| Tensor::parse_text(s, Some(raw.d), raw.depth);
        let b = raw.b.iter().map(parse).collect::<Result<Vec<_>>>()?;
        let a = raw
            .a
            .iter()
            .map(|r| r.iter().map(parse).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        SdeSpec::new(raw.x0, b, a)
    }

    pub fn to_json(&self) -> String {
        let raw = SdeSpecJson {
            d: self.dim(),
            x0: self.x0.clone(),
            b: self.b.iter().map(Tensor::to_text_body).collect(),
            a: self
                .a
                .iter()
                .map(|r| r.iter().map(Tensor::to_text_body).collect())
                .collect(),
            depth: Some(self.depth()),
        };
        serde_json::to_string_pretty(&raw).expect("plain data serializes")
    }

    fn check(&self, u: &Tensor) -> Result<()> {
        if u.dim() != self.dim() {
            return Err(Error::ShapeMismatch(
                u.dim(),
                u.depth(),
                self.dim(),
                self.depth(),
            ));
        }
        Ok(())
    }
}

fn is_zero(t: &Tensor) -> bool {
    t.coeffs().iter().all(|c| *c == C64::new(0.0, 0.0))
}

fn shifts_at_depth(u: &Tensor) -> (Vec<Tensor>, Vec<Vec<Tensor>>) {
    let n = u.depth();
    let s1 = shift1(u).into_iter().map(|t| t.resized(n)).collect();
    let s2 = shift2(u)
        .into_iter()
        .map(|r| r.into_iter().map(|t| t.resized(n)).collect())
        .collect();
    (s1, s2)
}

fn drift_part(u1: &[Tensor], spec: &SdeSpec, n: usize) -> Result<Tensor> {
    let mut out = Tensor::zeros(spec.dim(), n);
    for (b, s) in spec.b.iter().zip(u1) {
        let b = b.resized(n);
        if !is_zero(&b) && !is_zero(s) {
            out += &shuffle(&b, s)?;
        }
    }
    Ok(out)
}

/// Affine operator `R(u) = b^T ⧢ u^(1) + ½ tr(a ⧢ (u^(2) + u^(1) ⧢ u^(1)^T))`
/// truncated at the depth of `u`.
pub fn r_op(u: &Tensor, spec: &SdeSpec) -> Result<Tensor> {
    spec.check(u)?;
    let (d, n) = (u.dim(), u.depth());
    let (u1, u2) = shifts_at_depth(u);
    let mut out = drift_part(&u1, spec, n)?;
    for i in 0..d {
        for j in 0..d {
            let a = spec.a[i][j].resized(n);
            if is_zero(&a) {
                continue;
            }
            let m = &u2[j][i] + &shuffle(&u1[j], &u1[i])?;
            out.add_scaled(C64::new(0.5, 0.0), &shuffle(&a, &m)?);
        }
    }
    Ok(out)
}

/// Polynomial operator `L(u) = b^T ⧢ u^(1) + ½ tr(a ⧢ u^(2))` truncated at
/// the depth of `u`.
pub fn l_op(u: &Tensor, spec: &SdeSpec) -> Result<Tensor> {
    spec.check(u)?;
    let (d, n) = (u.dim(), u.depth());
    let (u1, u2) = shifts_at_depth(u);
    let mut out = drift_part(&u1, spec, n)?;
    for i in 0..d {
        for j in 0..d {
            let a = spec.a[i][j].resized(n);
            if is_zero(&a) || is_zero(&u2[j][i]) {
                continue;
            }
            out.add_scaled(C64::new(0.5, 0.0), &shuffle(&a, &u2[j][i])?);
        }
    }
    Ok(out)
}

/// Recovers `L(u)` from two evaluations of `R`:
/// `λ/(λ-1) R(u) - R(λu)/(λ(λ-1))`.
pub fn l_from_r(u: &Tensor, spec: &SdeSpec, lambda: f64) -> Result<Tensor> {
    if lambda == 0.0 || lambda == 1.0 || !lambda.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "mixing parameter must avoid 0 and 1, got {lambda}"
        )));
    }
    let r1 = r_op(u, spec)?;
    let r2 = r_op(&u.scale_real(lambda), spec)?;
    let mut out = r1.scale_real(lambda / (lambda - 1.0));
    out.add_scaled(C64::new(-1.0 / (lambda * (lambda - 1.0)), 0.0), &r2);
    Ok(out)
}

/// Converts a solution `c(t)` of the linear equation `∂c = L(c)` with
/// `c(0) = exp⧢(u0)` into the Riccati solution `ψ(t)`, using
/// `ψ_∅ = u0_∅ + ∫ (Lc)_∅ / c_∅` (trapezoid rule on `times`) and
/// `ψ - ψ_∅ = log⧢(c / c_∅)`.
pub fn linear_to_riccati(
    times: &[f64],
    c_traj: &[Tensor],
    u0: &Tensor,
    spec: &SdeSpec,
) -> Result<Vec<Tensor>> {
    if times.len() != c_traj.len() {
        return Err(Error::LengthMismatch(times.len(), c_traj.len()));
    }
    let mut out = Vec::with_capacity(c_traj.len());
    let mut integral = u0.constant();
    let mut prev_rate: Option<C64> = None;
    for (k, (c, &t)) in c_traj.iter().zip(times).enumerate() {
        let c0 = c.constant();
        if c0.norm() <= 1e-14 * c.max_abs().max(f64::MIN_POSITIVE) || c0.norm() == 0.0 {
            return Err(Error::VanishingConstant { time: t });
        }
        let rate = l_op(c, spec)?.constant() / c0;
        if let Some(p) = prev_rate {
            integral += (p + rate) * (0.5 * (t - times[k - 1]));
        }
        prev_rate = Some(rate);
        let mut psi = shuffle_log(&c.scale(c0.inv()))?;
        psi.coeffs_mut()[0] = integral;
        out.push(psi);
    }
    Ok(out)
}

/// Matrix of `L` restricted to `T^N`: column `k` holds the coefficients of
/// `L(e_k)` in level-major word order. Requires `b_i` to ignore words of
/// length ≥ 2 and `a_ij` to ignore words of length ≥ 3.
pub fn linear_matrix(spec: &SdeSpec, depth: usize) -> Result<DMatrix<C64>> {
    let d = spec.dim();
    for (i, b) in spec.b.iter().enumerate() {
        if let Some((w, _)) = b.nonzero_words().find(|(w, _)| w.len() >= 2) {
            return Err(Error::NotInvariant {
                role: format!("b_{}", i + 1),
                word: w.to_string(),
            });
        }
    }
    for (i, row) in spec.a.iter().enumerate() {
        for (j, a) in row.iter().enumerate() {
            if let Some((w, _)) = a.nonzero_words().find(|(w, _)| w.len() >= 3) {
                return Err(Error::NotInvariant {
                    role: format!("a_{}{}", i + 1, j + 1),
                    word: w.to_string(),
                });
            }
        }
    }
    let size = tensor_size(d, depth);
    let mut g = DMatrix::<C64>::zeros(size, size);
    let mut e = Tensor::zeros(d, depth);
    for k in 0..size {
        e.coeffs_mut()[k] = C64::new(1.0, 0.0);
        let col = l_op(&e, spec)?;
        e.coeffs_mut()[k] = C64::new(0.0, 0.0);
        for (r, v) in col.coeffs().iter().enumerate() {
            g[(r, k)] = *v;
        }
    }
    Ok(g)
}
