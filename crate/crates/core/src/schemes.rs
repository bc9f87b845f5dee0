//! Riccati (scheme 1), transport (scheme 2) and linear (scheme 3) solvers.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::expm::matrix_exp;
use crate::ode::ode_integrate;
use crate::Coefficients;

type C64 = Complex64;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum Solver {
    Rk4,
    Adaptive { rel_tol: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SchemeConfig {
    /// Truncation level.
    pub k: usize,
    /// Transport time steps.
    pub n: usize,
    /// Transport direction resolution.
    pub m: usize,
    /// Horizon.
    pub horizon: f64,
    /// Riccati steps on `[0, horizon]`.
    pub steps: usize,
    pub explosion_threshold: f64,
    pub solver: Solver,
}

impl Default for SchemeConfig {
    fn default() -> Self {
        SchemeConfig {
            k: 20,
            n: 80,
            m: 80,
            horizon: 1.0,
            steps: 1000,
            explosion_threshold: 1e10,
            solver: Solver::Rk4,
        }
    }
}

impl SchemeConfig {
    /// Mixture probability `λ = M T / N` of the transport scheme.
    pub fn lambda(&self) -> f64 {
        self.m as f64 * self.horizon / self.n as f64
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum Status {
    Completed,
    Exploded { time: f64 },
}

impl Status {
    pub fn explosion_time(&self) -> Option<f64> {
        match self {
            Status::Completed => None,
            Status::Exploded { time } => Some(*time),
        }
    }

    pub fn label(&self) -> String {
        match self {
            Status::Completed => "completed".into(),
            Status::Exploded { time } => format!("exploded@{time}"),
        }
    }
}

/// States on a time grid, reported up to (not through) an explosion.
#[derive(Clone, Debug)]
pub struct Trajectory<Y> {
    pub times: Vec<f64>,
    pub states: Vec<Y>,
    pub status: Status,
}

/// Output of [`scheme1_riccati`]: the Riccati trajectory and
/// `exp(ψ_∅(t))` on its grid.
#[derive(Clone, Debug)]
pub struct RiccatiRun<Y> {
    pub trajectory: Trajectory<Y>,
    pub values: Vec<C64>,
}

/// Integrates `∂ψ = R(ψ)` from `u0` on `[0, cfg.horizon]` and returns
/// `exp(ψ_∅(t))` on the surviving grid.
pub fn scheme1_riccati<Y, F>(r: F, u0: &Y, cfg: &SchemeConfig) -> Result<RiccatiRun<Y>>
where
    Y: Coefficients,
    F: Fn(&Y) -> Result<Y>,
{
    let trajectory = ode_integrate(r, u0, cfg.horizon, cfg)?;
    let values = trajectory.states.iter().map(|s| s.constant().exp()).collect();
    Ok(RiccatiRun { trajectory, values })
}

/// Output of [`scheme2_transport`] on the grid `t_n = T n / N`.
#[derive(Clone, Debug, Serialize)]
pub struct TransportRun {
    pub times: Vec<f64>,
    pub values: Vec<C64>,
    pub status: Status,
    pub lambda: f64,
    /// Number of finite compositions `(A_M)^{∘m}(u0)` that were available.
    pub compositions: usize,
}

fn ln_binomial(n: usize, k: usize) -> f64 {
    ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)
}

fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// Compensated (Neumaier) sum of terms ordered by increasing magnitude.
fn stable_sum(mut terms: Vec<C64>) -> C64 {
    terms.sort_by(|a, b| a.norm().total_cmp(&b.norm()));
    let (mut re, mut im) = ((0.0f64, 0.0f64), (0.0f64, 0.0f64));
    for t in terms {
        re = neumaier(re, t.re);
        im = neumaier(im, t.im);
    }
    C64::new(re.0 + re.1, im.0 + im.1)
}

fn neumaier((sum, comp): (f64, f64), x: f64) -> (f64, f64) {
    let t = sum + x;
    let comp = if sum.abs() >= x.abs() {
        comp + ((sum - t) + x)
    } else {
        comp + ((x - t) + sum)
    };
    (t, comp)
}

/// Binomial weights `C(n,m) (1-λ)^{n-m} λ^m` for `m = 0..=n`, evaluated in
/// log space; signs are kept when `λ > 1`.
pub fn mixture_weights(n: usize, lambda: f64) -> Vec<f64> {
    if lambda == 0.0 {
        let mut w = vec![0.0; n + 1];
        w[0] = 1.0;
        return w;
    }
    if lambda == 1.0 {
        let mut w = vec![0.0; n + 1];
        w[n] = 1.0;
        return w;
    }
    let q = 1.0 - lambda;
    (0..=n)
        .map(|m| {
            let lw = ln_binomial(n, m) + (n - m) as f64 * q.abs().ln() + m as f64 * lambda.abs().ln();
            let sign = if q < 0.0 && (n - m) % 2 == 1 { -1.0 } else { 1.0 }
                * if lambda < 0.0 && m % 2 == 1 { -1.0 } else { 1.0 };
            sign * lw.exp()
        })
        .collect()
}

/// Transport scheme: `v(Tn/N) ≈ Σ_m C(n,m)(1-λ)^{n-m} λ^m exp((A_M)^{∘m}(u0)_∅)`
/// with `A_M(u) = u + R(u)/M` and `λ = MT/N`.
///
/// The compositions are computed once. A composition whose largest
/// coefficient exceeds the explosion threshold, or which is non-finite, ends
/// the sequence; the run is then reported as exploded at the first `n` whose
/// mixture needs it.
pub fn scheme2_transport<Y, F>(r: F, u0: &Y, cfg: &SchemeConfig) -> Result<TransportRun>
where
    Y: Coefficients,
    F: Fn(&Y) -> Result<Y>,
{
    if cfg.n == 0 || cfg.m == 0 {
        return Err(Error::InvalidParameter("N and M must be positive".into()));
    }
    let lambda = cfg.lambda();
    let n_max = cfg.n;
    let inv_m = 1.0 / cfg.m as f64;
    let mut exps = Vec::with_capacity(n_max + 1);
    let mut u = u0.clone();
    for m in 0..=n_max {
        if m > 0 {
            let ru = r(&u)?;
            u.axpy(inv_m, &ru);
        }
        if !u.is_finite() || u.max_abs() > cfg.explosion_threshold {
            break;
        }
        let e = u.constant().exp();
        if !(e.re.is_finite() && e.im.is_finite()) {
            break;
        }
        exps.push(e);
    }
    let available = exps.len();
    let limit = n_max.min(available.saturating_sub(1));
    let times: Vec<f64> = (0..=n_max).map(|n| cfg.horizon * n as f64 / n_max as f64).collect();
    let values: Vec<C64> = (0..=limit)
        .into_par_iter()
        .map(|n| {
            let w = mixture_weights(n, lambda);
            stable_sum(w.iter().zip(&exps).filter(|(w, _)| **w != 0.0).map(|(w, e)| e * *w).collect())
        })
        .collect();
    let end = values
        .iter()
        .position(|v| !(v.re.is_finite() && v.im.is_finite()))
        .unwrap_or(values.len());
    let status = if end == n_max + 1 {
        Status::Completed
    } else {
        Status::Exploded { time: times[end] }
    };
    Ok(TransportRun {
        times: times[..end].to_vec(),
        values: values[..end].to_vec(),
        status,
        lambda,
        compositions: available,
    })
}

/// Linear scheme: `c(T) = exp(T G) u0`.
pub fn scheme3_linear(g: &DMatrix<C64>, u0: &[C64], horizon: f64) -> Result<Vec<C64>> {
    if g.nrows() != u0.len() {
        return Err(Error::LengthMismatch(g.nrows(), u0.len()));
    }
    let e = matrix_exp(g, horizon)?;
    let c = e * DVector::from_column_slice(u0);
    Ok(c.iter().copied().collect())
}

/// `Σ_n c_n x0^n`, the value of a power-basis solution at the start point.
pub fn eval_power(c: &[C64], x0: f64) -> C64 {
    c.iter().rev().fold(C64::new(0.0, 0.0), |acc, &v| acc * x0 + v)
}

/// `c` on `steps + 1` equally spaced times, by repeated multiplication with
/// `exp(h G)`.
pub fn scheme3_trajectory(
    g: &DMatrix<C64>,
    u0: &[C64],
    horizon: f64,
    steps: usize,
) -> Result<(Vec<f64>, Vec<Vec<C64>>)> {
    if g.nrows() != u0.len() {
        return Err(Error::LengthMismatch(g.nrows(), u0.len()));
    }
    let steps = steps.max(1);
    let h = horizon / steps as f64;
    let step = matrix_exp(g, h)?;
    let mut c = DVector::from_column_slice(u0);
    let mut times = vec![0.0];
    let mut states = vec![u0.to_vec()];
    for s in 1..=steps {
        c = &step * c;
        times.push(s as f64 * h);
        states.push(c.iter().copied().collect());
    }
    Ok((times, states))
}
