//! Gauss–Hermite quadrature for expectations of functions of a centred
//! Gaussian.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Error, Result};

/// Initial node count of [`gauss_quadrature`].
pub const BASE_NODES: usize = 200;
const MAX_DOUBLINGS: u32 = 4;
const TOL: f64 = 1e-10;

/// Nodes and weights for `E[f(Z)]`, `Z ~ N(0, 1)`; weights sum to one.
pub struct GaussHermite {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

/// Golub–Welsch on the probabilists' Hermite Jacobi matrix (zero diagonal,
/// off-diagonal `sqrt(k)`). Implicit QL iterations track only the first
/// component of each eigenvector, which is all the weights need.
fn golub_welsch(n: usize) -> GaussHermite {
    let mut d = vec![0.0f64; n];
    let mut e: Vec<f64> = (1..n).map(|k| (k as f64).sqrt()).collect();
    e.push(0.0);
    let mut z = vec![0.0f64; n];
    z[0] = 1.0;
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            assert!(iter < 60, "QL iteration failed to converge");
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut i = m;
            let mut deflated = false;
            while i > l {
                i -= 1;
                let mut f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                f = z[i + 1];
                z[i + 1] = s * z[i] + c * f;
                z[i] = c * z[i] - s * f;
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    let mut pairs: Vec<(f64, f64)> = d.into_iter().zip(z.into_iter().map(|v| v * v)).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let total: f64 = pairs.iter().map(|p| p.1).sum();
    GaussHermite {
        nodes: pairs.iter().map(|p| p.0).collect(),
        weights: pairs.iter().map(|p| p.1 / total).collect(),
    }
}

/// Cached rule with `n` nodes.
pub fn gauss_hermite(n: usize) -> Arc<GaussHermite> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<GaussHermite>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(r) = cache.lock().expect("quadrature cache poisoned").get(&n) {
        return r.clone();
    }
    let rule = Arc::new(golub_welsch(n));
    cache
        .lock()
        .expect("quadrature cache poisoned")
        .entry(n)
        .or_insert(rule)
        .clone()
}

fn apply<F: Fn(f64) -> f64>(rule: &GaussHermite, f: &F, scale: f64) -> f64 {
    rule.nodes
        .iter()
        .zip(&rule.weights)
        .filter(|(_, w)| **w > 0.0)
        .map(|(&x, &w)| w * f(scale * x))
        .sum()
}

/// `E[f(sqrt(t) Z)]` for standard normal `Z`, doubling the node count from
/// 200 until successive values agree to 1e-10.
pub fn gauss_quadrature<F: Fn(f64) -> f64>(f: F, t: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::InvalidParameter(format!("variance must be ≥ 0, got {t}")));
    }
    if t == 0.0 {
        let v = f(0.0);
        return if v.is_finite() { Ok(v) } else { Err(Error::NonFinite("quadrature integrand")) };
    }
    let scale = t.sqrt();
    let mut n = BASE_NODES;
    let mut prev = apply(&gauss_hermite(n), &f, scale);
    if !prev.is_finite() {
        return Err(Error::NonFinite("quadrature integrand"));
    }
    let mut delta = f64::INFINITY;
    for _ in 0..MAX_DOUBLINGS {
        n *= 2;
        let next = apply(&gauss_hermite(n), &f, scale);
        if !next.is_finite() {
            return Err(Error::NonFinite("quadrature integrand"));
        }
        delta = (next - prev).abs();
        if delta < TOL {
            return Ok(next);
        }
        prev = next;
    }
    Err(Error::NoConvergence(delta))
}
