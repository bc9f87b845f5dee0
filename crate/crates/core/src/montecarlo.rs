//! Monte-Carlo oracles: Euler/Milstein simulation of scalar diffusions and
//! signature SDEs, empirical signature moments and summary statistics.
//!
//! Every path draws from its own ChaCha8 stream (`seed`, stream = path
//! index), and reductions run in a fixed pairwise order, so results do not
//! depend on the number of worker threads.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::operators::SdeSpec;
use crate::powerseries::Model1D;
use crate::signature::{chen_update, real_to_tensor, ChenScratch};
use crate::tensor::{tensor_size, Tensor};

type C64 = Complex64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum SimScheme {
    Euler,
    /// Milstein correction for scalar models.
    Milstein,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimConfig {
    pub n_paths: usize,
    pub dt: f64,
    pub seed: u64,
    pub scheme: SimScheme,
}

impl SimConfig {
    pub fn new(n_paths: usize, dt: f64, seed: u64) -> Self {
        SimConfig {
            n_paths,
            dt,
            seed,
            scheme: SimScheme::Euler,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n_paths == 0 {
            return Err(Error::InvalidParameter("n_paths must be ≥ 1".into()));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidParameter(format!("dt must be > 0, got {}", self.dt)));
        }
        Ok(())
    }

    /// Number of steps covering `[0, horizon]` with steps no larger than `dt`.
    pub fn steps(&self, horizon: f64) -> usize {
        ((horizon / self.dt) - 1e-9).ceil().max(1.0) as usize
    }
}

/// Sample mean with its standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct McEstimate {
    pub mean: C64,
    pub std_error: f64,
    pub n_paths: usize,
}

impl McEstimate {
    /// Whether `value` lies within `k` standard errors of the mean; a zero
    /// standard error falls back to an absolute `1e-12` band.
    pub fn within(&self, value: C64, k: f64) -> bool {
        (self.mean - value).norm() <= k * self.std_error + 1e-12
    }

    /// Distance to `value` in standard errors.
    pub fn z_score(&self, value: C64) -> f64 {
        let d = (self.mean - value).norm();
        if self.std_error == 0.0 {
            if d == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            d / self.std_error
        }
    }
}

/// Deterministic random stream for one path.
pub fn path_rng(seed: u64, path: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(path as u64);
    rng
}

/// Pairwise summation in a fixed tree order.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= 16 {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// Mean and standard error of complex samples; real and imaginary variances
/// add up in the error.
pub fn estimate(samples: &[C64]) -> McEstimate {
    let n = samples.len();
    let re: Vec<f64> = samples.iter().map(|c| c.re).collect();
    let im: Vec<f64> = samples.iter().map(|c| c.im).collect();
    let mean = C64::new(pairwise_sum(&re) / n as f64, pairwise_sum(&im) / n as f64);
    let var = if n > 1 {
        let dev: Vec<f64> = samples.iter().map(|c| (c - mean).norm_sqr()).collect();
        pairwise_sum(&dev) / (n - 1) as f64
    } else {
        0.0
    };
    McEstimate {
        mean,
        std_error: (var / n as f64).sqrt(),
        n_paths: n,
    }
}

pub fn estimate_real(samples: &[f64]) -> McEstimate {
    let c: Vec<C64> = samples.iter().map(|&x| C64::new(x, 0.0)).collect();
    estimate(&c)
}

/// Scalar path ensemble recorded on `times`.
#[derive(Clone, Debug)]
pub struct Ensemble1D {
    pub times: Vec<f64>,
    /// `paths[p][k]` is the state of path `p` at `times[k]`.
    pub paths: Vec<Vec<f64>>,
    /// Number of steps where the diffusion coefficient was clamped to zero.
    pub clamps: u64,
    pub steps: usize,
}

impl Ensemble1D {
    pub fn terminal(&self) -> Vec<f64> {
        self.paths.iter().map(|p| *p.last().expect("nonempty path")).collect()
    }

    /// Share of steps that needed clamping.
    pub fn clamp_rate(&self) -> f64 {
        self.clamps as f64 / (self.steps * self.paths.len()).max(1) as f64
    }
}

fn simulate_1d_path(m: &Model1D, cfg: &SimConfig, steps: usize, h: f64, stride: usize, p: usize) -> (Vec<f64>, u64) {
    let mut rng = path_rng(cfg.seed, p);
    let sq = h.sqrt();
    let mut x = m.x0;
    let mut clamps = 0u64;
    let mut rec = Vec::with_capacity(steps / stride + 1);
    rec.push(x);
    for s in 1..=steps {
        let z: f64 = StandardNormal.sample(&mut rng);
        let dw = sq * z;
        let mut a = m.diffusion(x);
        if a < 0.0 {
            a = 0.0;
            clamps += 1;
        }
        let mut next = x + m.drift(x) * h + a.sqrt() * dw;
        if cfg.scheme == SimScheme::Milstein && a > 0.0 {
            next += 0.25 * m.diffusion_slope(x) * (dw * dw - h);
        }
        x = next;
        if s % stride == 0 {
            rec.push(x);
        }
    }
    (rec, clamps)
}

/// Euler (or Milstein) paths of `dX = b(X)dt + sqrt(a(X)) dB` on
/// `[0, horizon]`, recorded at `records + 1` equally spaced times. Negative
/// values of `a` are clamped to zero and counted.
pub fn simulate_1d(m: &Model1D, cfg: &SimConfig, horizon: f64, records: usize) -> Result<Ensemble1D> {
    cfg.validate()?;
    let records = records.max(1);
    let per = (cfg.steps(horizon) + records - 1) / records;
    let steps = per * records;
    let h = horizon / steps as f64;
    let out: Vec<(Vec<f64>, u64)> = (0..cfg.n_paths)
        .into_par_iter()
        .map(|p| simulate_1d_path(m, cfg, steps, h, per, p))
        .collect();
    let clamps = out.iter().map(|o| o.1).sum();
    Ok(Ensemble1D {
        times: (0..=records).map(|k| horizon * k as f64 / records as f64).collect(),
        paths: out.into_iter().map(|o| o.0).collect(),
        clamps,
        steps,
    })
}

/// Lower-triangular `L` with `L Lᵀ = a` for symmetric positive semidefinite
/// `a`; non-positive pivots give zero columns. Returns whether any pivot was
/// clamped.
pub fn psd_cholesky(a: &[f64], d: usize, l: &mut [f64]) -> bool {
    l.iter_mut().for_each(|x| *x = 0.0);
    let mut clamped = false;
    for j in 0..d {
        let mut s = a[j * d + j];
        for k in 0..j {
            s -= l[j * d + k] * l[j * d + k];
        }
        if s <= 1e-300 {
            if s < -1e-12 {
                clamped = true;
            }
            continue;
        }
        let pivot = s.sqrt();
        l[j * d + j] = pivot;
        for i in j + 1..d {
            let mut t = a[i * d + j];
            for k in 0..j {
                t -= l[i * d + k] * l[j * d + k];
            }
            l[i * d + j] = t / pivot;
        }
    }
    clamped
}

/// Terminal data of one simulated signature-SDE path.
#[derive(Clone, Debug)]
pub struct SigPath {
    pub state: Vec<f64>,
    /// Flat real signature of the state path, level-major.
    pub signature: Vec<f64>,
    /// `∫_0^T <ℓ_k, X_s> ds` for each requested integrand (trapezoid rule).
    pub integrals: Vec<f64>,
    pub clamps: u64,
}

fn real_pairing(l: &[f64], sig: &[f64]) -> f64 {
    l.iter().zip(sig).map(|(a, b)| a * b).sum()
}

fn real_parts(t: &Tensor, len: usize) -> Vec<f64> {
    use crate::Coefficients;
    t.coeffs().iter().take(len).map(|c| c.re).collect()
}

/// Simulates the signature SDE with an Euler step on the state and a Chen
/// update of the running signature (truncated at `depth`) per step; the
/// characteristics are paired with the signature up to `depth`. Each path is
/// passed to `f` and only its output is kept.
pub fn simulate_sigsde_map<T, F>(
    spec: &SdeSpec,
    cfg: &SimConfig,
    horizon: f64,
    depth: usize,
    integrands: &[Tensor],
    f: F,
) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(SigPath) -> T + Sync,
{
    cfg.validate()?;
    let d = spec.dim();
    let size = tensor_size(d, depth);
    let b: Vec<Vec<f64>> = spec.b.iter().map(|t| real_parts(t, size)).collect();
    let a: Vec<Vec<f64>> = spec
        .a
        .iter()
        .flatten()
        .map(|t| real_parts(t, size))
        .collect();
    for t in integrands {
        if t.dim() != d {
            return Err(Error::ShapeMismatch(t.dim(), t.depth(), d, depth));
        }
    }
    let ints: Vec<Vec<f64>> = integrands.iter().map(|t| real_parts(t, size)).collect();
    let steps = cfg.steps(horizon);
    let h = horizon / steps as f64;
    let sq = h.sqrt();
    Ok((0..cfg.n_paths)
        .into_par_iter()
        .map(|p| {
            let mut rng = path_rng(cfg.seed, p);
            let mut x = spec.x0.clone();
            let mut sig = vec![0.0; size];
            sig[0] = 1.0;
            let mut scratch = ChenScratch::default();
            let mut amat = vec![0.0; d * d];
            let mut chol = vec![0.0; d * d];
            let mut inc = vec![0.0; d];
            let mut z = vec![0.0; d];
            let mut clamps = 0u64;
            let mut integrals = vec![0.0; ints.len()];
            let mut prev: Vec<f64> = ints.iter().map(|l| real_pairing(l, &sig)).collect();
            for _ in 0..steps {
                for (k, ak) in a.iter().enumerate() {
                    amat[k] = real_pairing(ak, &sig);
                }
                if psd_cholesky(&amat, d, &mut chol) {
                    clamps += 1;
                }
                for zi in z.iter_mut() {
                    *zi = StandardNormal.sample(&mut rng);
                }
                for i in 0..d {
                    let mut v = real_pairing(&b[i], &sig) * h;
                    for k in 0..=i {
                        v += chol[i * d + k] * z[k] * sq;
                    }
                    inc[i] = v;
                }
                for i in 0..d {
                    x[i] += inc[i];
                }
                chen_update(&mut sig, d, depth, &inc, &mut scratch);
                for (k, l) in ints.iter().enumerate() {
                    let now = real_pairing(l, &sig);
                    integrals[k] += 0.5 * h * (prev[k] + now);
                    prev[k] = now;
                }
            }
            f(SigPath {
                state: x,
                signature: sig,
                integrals,
                clamps,
            })
        })
        .collect())
}

/// Flat real signatures of simulated paths.
#[derive(Clone, Debug)]
pub struct SignatureEnsemble {
    pub dim: usize,
    pub depth: usize,
    pub signatures: Vec<Vec<f64>>,
    pub clamps: u64,
}

impl SignatureEnsemble {
    /// Ensemble of signatures of given deterministic or sampled paths.
    pub fn from_paths(paths: &[crate::signature::PiecewisePath], depth: usize) -> Result<Self> {
        let first = paths.first().ok_or(Error::InvalidParameter("empty ensemble".into()))?;
        let dim = first.dim();
        let signatures = paths
            .par_iter()
            .map(|p| {
                let mut sig = vec![0.0; tensor_size(dim, depth)];
                sig[0] = 1.0;
                let mut scratch = ChenScratch::default();
                for inc in p.increments() {
                    chen_update(&mut sig, dim, depth, &inc, &mut scratch);
                }
                sig
            })
            .collect();
        Ok(SignatureEnsemble {
            dim,
            depth,
            signatures,
            clamps: 0,
        })
    }
}

/// Simulates `cfg.n_paths` paths and keeps their signatures up to `depth`.
pub fn simulate_sigsde(spec: &SdeSpec, cfg: &SimConfig, horizon: f64, depth: usize) -> Result<SignatureEnsemble> {
    let out = simulate_sigsde_map(spec, cfg, horizon, depth, &[], |p| (p.signature, p.clamps))?;
    let clamps = out.iter().map(|o| o.1).sum();
    Ok(SignatureEnsemble {
        dim: spec.dim(),
        depth,
        signatures: out.into_iter().map(|o| o.0).collect(),
        clamps,
    })
}

/// Empirical expected signature up to level `depth` with per-word standard
/// errors (level-major order).
pub fn expected_signature_mc(ens: &SignatureEnsemble, depth: usize) -> Result<(Tensor, Vec<f64>)> {
    if depth > ens.depth {
        return Err(Error::InvalidParameter(format!(
            "requested level {depth} above simulated level {}",
            ens.depth
        )));
    }
    let size = tensor_size(ens.dim, depth);
    let mut means = vec![0.0; size];
    let mut ses = vec![0.0; size];
    for w in 0..size {
        let col: Vec<f64> = ens.signatures.iter().map(|s| s[w]).collect();
        let e = estimate_real(&col);
        means[w] = e.mean.re;
        ses[w] = e.std_error;
    }
    Ok((real_to_tensor(ens.dim, depth, &means), ses))
}

/// Terminal Brownian values and Lévy areas `½∫(W² dW¹ - W¹ dW²)` of
/// piecewise-linear interpolations of planar Brownian paths.
pub fn simulate_levy_area(cfg: &SimConfig, horizon: f64) -> Result<Vec<[f64; 3]>> {
    cfg.validate()?;
    let steps = cfg.steps(horizon);
    let sq = (horizon / steps as f64).sqrt();
    Ok((0..cfg.n_paths)
        .into_par_iter()
        .map(|p| {
            let mut rng = path_rng(cfg.seed, p);
            let (mut w1, mut w2, mut area) = (0.0f64, 0.0f64, 0.0f64);
            for _ in 0..steps {
                let z1: f64 = StandardNormal.sample(&mut rng);
                let z2: f64 = StandardNormal.sample(&mut rng);
                let (d1, d2) = (sq * z1, sq * z2);
                area += 0.5 * (w2 * d1 - w1 * d2);
                w1 += d1;
                w2 += d2;
            }
            [w1, w2, area]
        })
        .collect())
}

/// `E[exp(i(λ A_T + γ₁ W¹_T + γ₂ W²_T))]` from simulated Lévy-area samples.
pub fn levy_characteristic(samples: &[[f64; 3]], lambda: f64, gamma: (f64, f64)) -> McEstimate {
    let vals: Vec<C64> = samples
        .iter()
        .map(|s| C64::new(0.0, lambda * s[2] + gamma.0 * s[0] + gamma.1 * s[1]).exp())
        .collect();
    estimate(&vals)
}
