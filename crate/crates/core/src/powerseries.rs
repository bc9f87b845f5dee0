//! One-dimensional calculus on truncated coefficient sequences.
//!
//! A [`Seq`] `(u_0, ..., u_K)` stands for the power series
//! `h_u(x) = Σ u_k x^k` ("power basis"). The same object read against the
//! signature `(1, x, x²/2!, ...)` of a scalar path is the "factorial basis",
//! related by `u^sig_k = k! u^pow_k`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::Coefficients;

type C64 = Complex64;

const ZERO: C64 = C64::new(0.0, 0.0);

/// Truncated complex coefficient sequence of length `K + 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct Seq {
    coeffs: Vec<C64>,
}

impl Seq {
    pub fn zeros(k: usize) -> Self {
        Seq {
            coeffs: vec![ZERO; k + 1],
        }
    }

    /// `δ_n` truncated at `k` (zero when `n > k`).
    pub fn delta(n: usize, k: usize) -> Self {
        let mut s = Self::zeros(k);
        if n <= k {
            s.coeffs[n] = C64::new(1.0, 0.0);
        }
        s
    }

    pub fn new(coeffs: Vec<C64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidParameter("sequence needs at least one coefficient".into()));
        }
        Ok(Seq { coeffs })
    }

    pub fn from_real(values: &[f64]) -> Result<Self> {
        Self::new(values.iter().map(|&v| C64::new(v, 0.0)).collect())
    }

    /// Truncation level `K`.
    pub fn k(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn get(&self, n: usize) -> C64 {
        self.coeffs.get(n).copied().unwrap_or(ZERO)
    }

    /// Same sequence truncated or zero-padded to level `k`.
    pub fn resized(&self, k: usize) -> Seq {
        let mut s = Seq::zeros(k);
        let n = s.coeffs.len().min(self.coeffs.len());
        s.coeffs[..n].copy_from_slice(&self.coeffs[..n]);
        s
    }

    pub fn scale(&self, c: C64) -> Seq {
        Seq {
            coeffs: self.coeffs.iter().map(|x| x * c).collect(),
        }
    }

    pub fn add(&self, other: &Seq) -> Result<Seq> {
        check(self, other)?;
        Ok(Seq {
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn sub(&self, other: &Seq) -> Result<Seq> {
        check(self, other)?;
        Ok(Seq {
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a - b).collect(),
        })
    }

    /// `h_u(x) = Σ u_k x^k` by Horner's rule.
    pub fn eval(&self, x: f64) -> C64 {
        self.coeffs.iter().rev().fold(ZERO, |acc, &c| acc * x + c)
    }

    /// Power to factorial basis: `u_k -> k! u_k`.
    pub fn to_factorial(&self) -> Seq {
        let mut f = 1.0;
        Seq {
            coeffs: self
                .coeffs
                .iter()
                .enumerate()
                .map(|(k, &c)| {
                    if k > 0 {
                        f *= k as f64;
                    }
                    c * f
                })
                .collect(),
        }
    }

    /// Factorial to power basis: `u_k -> u_k / k!`.
    pub fn to_power(&self) -> Seq {
        let mut f = 1.0;
        Seq {
            coeffs: self
                .coeffs
                .iter()
                .enumerate()
                .map(|(k, &c)| {
                    if k > 0 {
                        f *= k as f64;
                    }
                    c / f
                })
                .collect(),
        }
    }
}

impl Coefficients for Seq {
    fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    fn coeffs_mut(&mut self) -> &mut [C64] {
        &mut self.coeffs
    }
}

fn check(u: &Seq, v: &Seq) -> Result<()> {
    if u.k() == v.k() {
        Ok(())
    } else {
        Err(Error::LengthMismatch(u.coeffs.len(), v.coeffs.len()))
    }
}

/// Truncated Cauchy product `(u ⋆ v)_n = Σ_{i+j=n} u_i v_j`.
pub fn conv(u: &Seq, v: &Seq) -> Result<Seq> {
    check(u, v)?;
    Ok(conv_unchecked(u, v))
}

fn conv_unchecked(u: &Seq, v: &Seq) -> Seq {
    let k = u.k();
    let mut out = vec![ZERO; k + 1];
    let vlen = v.support_len();
    for (i, &ui) in u.coeffs.iter().enumerate() {
        if ui == ZERO {
            continue;
        }
        for j in 0..vlen.min(k + 1 - i) {
            out[i + j] += ui * v.coeffs[j];
        }
    }
    Seq { coeffs: out }
}

impl Seq {
    fn support_len(&self) -> usize {
        self.coeffs.iter().rposition(|c| *c != ZERO).map_or(0, |p| p + 1)
    }
}

/// `u^[1]_k = (k+1) u_{k+1}`, the coefficients of `h_u'`.
pub fn bracket1(u: &Seq) -> Seq {
    let k = u.k();
    let mut out = Seq::zeros(k);
    for n in 0..k {
        out.coeffs[n] = u.coeffs[n + 1] * (n + 1) as f64;
    }
    out
}

/// `u^[2]_k = (k+1)(k+2) u_{k+2}`, the coefficients of `h_u''`.
pub fn bracket2(u: &Seq) -> Seq {
    let k = u.k();
    let mut out = Seq::zeros(k);
    for n in 0..k.saturating_sub(1) {
        out.coeffs[n] = u.coeffs[n + 2] * ((n + 1) * (n + 2)) as f64;
    }
    out
}

/// Scalar diffusion `dX = b(X)dt + sqrt(a(X)) dB` with power-series
/// coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct Model1D {
    pub name: String,
    pub b: Seq,
    pub a: Seq,
    pub x0: f64,
    /// State interval on which `a ≥ 0` has been checked, if bounded.
    pub interval: Option<(f64, f64)>,
}

#[derive(Deserialize)]
struct Model1DJson {
    b: Vec<f64>,
    a: Vec<f64>,
    x0: f64,
    #[serde(rename = "K")]
    k: Option<usize>,
    #[serde(default)]
    name: Option<String>,
    #[serde(default)]
    interval: Option<(f64, f64)>,
}

impl Model1D {
    pub fn new(
        name: &str,
        b: Seq,
        a: Seq,
        x0: f64,
        interval: Option<(f64, f64)>,
    ) -> Result<Self> {
        if !x0.is_finite() || !b.is_finite() || !a.is_finite() {
            return Err(Error::NonFinite("model coefficients"));
        }
        if let Some((lo, hi)) = interval {
            if !(lo < hi) {
                return Err(Error::InvalidParameter(format!("empty interval [{lo}, {hi}]")));
            }
            for i in 0..=200 {
                let x = lo + (hi - lo) * i as f64 / 200.0;
                let v = a.eval(x).re;
                if v < -1e-12 {
                    return Err(Error::InvalidParameter(format!(
                        "diffusion coefficient negative at x = {x}: {v}"
                    )));
                }
            }
        }
        Ok(Model1D {
            name: name.to_string(),
            b,
            a,
            x0,
            interval,
        })
    }

    /// Parses `{"b":[..],"a":[..],"x0":..,"K":..}` and returns the model with
    /// the optional truncation level.
    pub fn from_json(text: &str) -> Result<(Self, Option<usize>)> {
        let raw: Model1DJson = serde_json::from_str(text)?;
        let m = Model1D::new(
            raw.name.as_deref().unwrap_or("custom"),
            Seq::from_real(&raw.b)?,
            Seq::from_real(&raw.a)?,
            raw.x0,
            raw.interval,
        )?;
        Ok((m, raw.k))
    }

    pub fn drift(&self, x: f64) -> f64 {
        self.b.eval(x).re
    }

    pub fn diffusion(&self, x: f64) -> f64 {
        self.a.eval(x).re
    }

    /// Derivative of the diffusion coefficient, used by the Milstein step.
    pub fn diffusion_slope(&self, x: f64) -> f64 {
        bracket1(&self.a).eval(x).re
    }
}

/// Standard Brownian motion from zero.
pub fn bm() -> Model1D {
    Model1D::new("bm", Seq::zeros(0), Seq::delta(0, 0), 0.0, None).expect("valid")
}

/// Power-basis coefficients of `log f` for `f(x) = exp(-c Y0 e^x)`:
/// `u_k = -c Y0 / k!`.
pub fn gbm_initial(c: f64, y0: f64, k: usize) -> Result<Seq> {
    if !(c > 0.0 && y0 > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "need c > 0 and Y0 > 0, got c = {c}, Y0 = {y0}"
        )));
    }
    Ok(Seq::from_real(&vec![-c * y0; k + 1])?.to_power())
}

/// Jacobi diffusion on `[0, 1]`: `b = 0`, `a(x) = x - x²`, started at ½.
pub fn jacobi() -> Model1D {
    Model1D::new(
        "jacobi",
        Seq::zeros(0),
        Seq::from_real(&[0.0, 1.0, -1.0]).expect("nonempty"),
        0.5,
        Some((0.0, 1.0)),
    )
    .expect("valid")
}

/// Jacobi diffusion shifted by `-1`, living on `[-1, 0]`:
/// `a(y) = -y - y²`.
pub fn reflected_jacobi() -> Model1D {
    Model1D::new(
        "reflected_jacobi",
        Seq::zeros(0),
        Seq::from_real(&[0.0, -1.0, -1.0]).expect("nonempty"),
        -0.5,
        Some((-1.0, 0.0)),
    )
    .expect("valid")
}

/// `b = 0`, `a(x) = x(1-x)(1-x/2)` on `[0, 1]`.
pub fn interval_cubic() -> Model1D {
    Model1D::new(
        "interval_cubic",
        Seq::zeros(0),
        Seq::from_real(&[0.0, 1.0, -1.5, 0.5]).expect("nonempty"),
        0.5,
        Some((0.0, 1.0)),
    )
    .expect("valid")
}

/// Drift `Σ_{n≥1} rates[n-1] (x^n - x^{n+1})` and `a(x) = x - x²`, so that
/// the drift coefficients are `b̃_n = b_n - b_{n-1}` with `b_0 = 0`.
pub fn fleming_viot(rates: &[f64], x0: f64) -> Result<Model1D> {
    if rates.iter().any(|r| !r.is_finite()) {
        return Err(Error::NonFinite("Fleming-Viot rates"));
    }
    let mut b = vec![0.0; rates.len() + 2];
    for (n, &r) in rates.iter().enumerate() {
        b[n + 1] += r;
        b[n + 2] -= r;
    }
    Model1D::new(
        "fleming_viot",
        Seq::from_real(&b)?,
        Seq::from_real(&[0.0, 1.0, -1.0])?,
        x0,
        None,
    )
}

fn model_at(m: &Model1D, k: usize) -> (Seq, Seq) {
    (m.b.resized(k), m.a.resized(k))
}

/// `R(u) = b ⋆ u^[1] + ½ a ⋆ (u^[2] + u^[1] ⋆ u^[1])` in the power basis.
pub fn r_pow(u: &Seq, m: &Model1D) -> Seq {
    let (b, a) = model_at(m, u.k());
    let u1 = bracket1(u);
    let u2 = bracket2(u);
    let mut inner = conv_unchecked(&u1, &u1);
    for (x, y) in inner.coeffs.iter_mut().zip(&u2.coeffs) {
        *x += y;
    }
    let mut out = conv_unchecked(&a, &inner).scale(C64::new(0.5, 0.0));
    out.axpy(1.0, &conv_unchecked(&b, &u1));
    out
}

/// `L(u) = b ⋆ u^[1] + ½ a ⋆ u^[2]` in the power basis.
pub fn l_pow(u: &Seq, m: &Model1D) -> Seq {
    let (b, a) = model_at(m, u.k());
    let mut out = conv_unchecked(&a, &bracket2(u)).scale(C64::new(0.5, 0.0));
    out.axpy(1.0, &conv_unchecked(&b, &bracket1(u)));
    out
}

/// `R` acting on factorial-basis coefficients.
pub fn r_sig(u: &Seq, m: &Model1D) -> Seq {
    r_pow(&u.to_power(), m).to_factorial()
}

/// `L` acting on factorial-basis coefficients.
pub fn l_sig(u: &Seq, m: &Model1D) -> Seq {
    l_pow(&u.to_power(), m).to_factorial()
}

/// Brownian `R` in the factorial basis written directly:
/// `R(u)_k = ½(u_{k+2} + Σ_{i+j=k} C(k,i) u_{i+1} u_{j+1})`.
pub fn r_sig_brownian(u: &Seq) -> Seq {
    let k = u.k();
    let mut out = Seq::zeros(k);
    let mut binom = vec![1.0; k + 1];
    for n in 0..=k {
        if n > 0 {
            for i in (1..n).rev() {
                binom[i] += binom[i - 1];
            }
        }
        let mut acc = u.get(n + 2);
        for i in 0..=n {
            acc += u.get(i + 1) * u.get(n - i + 1) * binom[i];
        }
        out.coeffs[n] = acc * 0.5;
    }
    out
}

/// Brownian `L` in the factorial basis: `L(u)_k = ½ u_{k+2}`.
pub fn l_sig_brownian(u: &Seq) -> Seq {
    let k = u.k();
    let mut out = Seq::zeros(k);
    for n in 0..=k {
        out.coeffs[n] = u.get(n + 2) * 0.5;
    }
    out
}

/// Coefficients of `exp(h_u)`, via `k c_k = Σ_j j u_j c_{k-j}`.
pub fn exp_star(u: &Seq) -> Seq {
    let k = u.k();
    let mut c = vec![ZERO; k + 1];
    c[0] = u.coeffs[0].exp();
    for n in 1..=k {
        let mut acc = ZERO;
        for j in 1..=n {
            acc += u.coeffs[j] * c[n - j] * j as f64;
        }
        c[n] = acc / n as f64;
    }
    Seq { coeffs: c }
}

/// Coefficients of `log(h_c)`; inverse of [`exp_star`]. The constant term
/// uses the principal branch.
pub fn log_star(c: &Seq) -> Result<Seq> {
    let c0 = c.coeffs[0];
    if c0 == ZERO {
        return Err(Error::VanishingConstant { time: f64::NAN });
    }
    let k = c.k();
    let mut u = vec![ZERO; k + 1];
    u[0] = c0.ln();
    for n in 1..=k {
        let mut acc = c.coeffs[n] * n as f64;
        for j in 1..n {
            acc -= u[j] * c.coeffs[n - j] * j as f64;
        }
        u[n] = acc / (c0 * n as f64);
    }
    Ok(Seq { coeffs: u })
}

/// Finite section of the matrix of `L` in the power basis:
/// `G_ij = j b_{i-j+1} + j(j-1)/2 a_{i-j+2}`.
pub fn linear_matrix_1d(m: &Model1D, k: usize) -> DMatrix<C64> {
    let mut g = DMatrix::<C64>::zeros(k + 1, k + 1);
    for j in 0..=k {
        for i in 0..=k {
            let mut v = ZERO;
            if j >= 1 && i + 1 >= j {
                v += m.b.get(i + 1 - j) * j as f64;
            }
            if j >= 2 && i + 2 >= j {
                v += m.a.get(i + 2 - j) * (j * (j - 1)) as f64 / 2.0;
            }
            g[(i, j)] = v;
        }
    }
    g
}
