//! Signatures of piecewise-linear paths via Chen's identity.

use std::ops::Deref;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::tensor::{concat, level_offset, shuffle_defect, tensor_size, Tensor};

/// A path sampled at strictly increasing times and interpolated linearly.
#[derive(Clone, Debug, PartialEq)]
pub struct PiecewisePath {
    times: Vec<f64>,
    points: Vec<Vec<f64>>,
    time_extended: bool,
}

impl PiecewisePath {
    pub fn new(times: Vec<f64>, points: Vec<Vec<f64>>) -> Result<Self> {
        if times.len() < 2 {
            return Err(Error::InvalidPath("need at least two samples".into()));
        }
        if times.len() != points.len() {
            return Err(Error::InvalidPath(format!(
                "{} times but {} points",
                times.len(),
                points.len()
            )));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidPath("times must be strictly increasing".into()));
        }
        let dim = points[0].len();
        if dim == 0 || points.iter().any(|p| p.len() != dim) {
            return Err(Error::InvalidPath("points must share a positive dimension".into()));
        }
        if points.iter().flatten().chain(&times).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("path"));
        }
        Ok(PiecewisePath {
            times,
            points,
            time_extended: false,
        })
    }

    /// Reads the CSV layout `t,x1,...,xd` with a header row.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines.next().ok_or(Error::InvalidPath("empty CSV".into()))?;
        let cols: Vec<&str> = header.split(',').map(str::trim).collect();
        if cols.len() < 2 || cols[0] != "t" {
            return Err(Error::Parse {
                line: 1,
                msg: "header must be t,x1,...,xd".into(),
            });
        }
        let mut times = Vec::new();
        let mut points = Vec::new();
        for (idx, line) in lines {
            let vals = line
                .split(',')
                .map(|s| {
                    s.trim().parse::<f64>().map_err(|e| Error::Parse {
                        line: idx + 1,
                        msg: format!("{e}"),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            if vals.len() != cols.len() {
                return Err(Error::Parse {
                    line: idx + 1,
                    msg: format!("expected {} columns, got {}", cols.len(), vals.len()),
                });
            }
            times.push(vals[0]);
            points.push(vals[1..].to_vec());
        }
        Self::new(times, points)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("t");
        for k in 1..=self.dim() {
            out.push_str(&format!(",x{k}"));
        }
        out.push('\n');
        for (t, p) in self.times.iter().zip(&self.points) {
            out.push_str(&t.to_string());
            for v in p {
                out.push_str(&format!(",{v}"));
            }
            out.push('\n');
        }
        out
    }

    pub fn dim(&self) -> usize {
        self.points[0].len()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn is_time_extended(&self) -> bool {
        self.time_extended
    }

    /// Increments `X_{t_{k+1}} - X_{t_k}` of every segment.
    pub fn increments(&self) -> impl Iterator<Item = Vec<f64>> + '_ {
        self.points
            .windows(2)
            .map(|w| w[1].iter().zip(&w[0]).map(|(b, a)| b - a).collect())
    }
}

/// Prepends time as the first coordinate (letter 1); rejects a path that is
/// already time extended.
pub fn time_extend(path: &PiecewisePath) -> Result<PiecewisePath> {
    if path.time_extended {
        return Err(Error::InvalidPath("path is already time extended".into()));
    }
    let points = path
        .times
        .iter()
        .zip(&path.points)
        .map(|(&t, p)| std::iter::once(t).chain(p.iter().copied()).collect())
        .collect();
    Ok(PiecewisePath {
        times: path.times.clone(),
        points,
        time_extended: true,
    })
}

/// A tensor with unit constant term satisfying the shuffle relations.
#[derive(Clone, Debug, PartialEq)]
pub struct GroupLike(Tensor);

impl GroupLike {
    /// Wraps `x` after checking the shuffle relations to `tol`.
    pub fn new(x: Tensor, tol: f64) -> Result<Self> {
        let (ok, violation) = is_grouplike(&x, tol);
        if ok {
            Ok(GroupLike(x))
        } else {
            Err(Error::InvalidParameter(format!(
                "not group-like: violation {violation:e}"
            )))
        }
    }

    pub fn into_tensor(self) -> Tensor {
        self.0
    }
}

impl Deref for GroupLike {
    type Target = Tensor;
    fn deref(&self) -> &Tensor {
        &self.0
    }
}

/// Returns whether `x` is group-like to `tol` and the worst violation found.
pub fn is_grouplike(x: &Tensor, tol: f64) -> (bool, f64) {
    let v = shuffle_defect(x);
    (v <= tol, v)
}

/// Reusable buffers for [`chen_update`].
#[derive(Clone, Debug, Default)]
pub struct ChenScratch {
    acc: Vec<f64>,
    next: Vec<f64>,
}

/// Chen update `sig <- sig ⊗ exp(v)` of a real level-major signature buffer,
/// in place and from the top level down (Horner form).
pub fn chen_update(sig: &mut [f64], dim: usize, depth: usize, v: &[f64], scratch: &mut ChenScratch) {
    debug_assert_eq!(sig.len(), tensor_size(dim, depth));
    debug_assert_eq!(v.len(), dim);
    let ChenScratch { acc, next } = scratch;
    for n in (1..=depth).rev() {
        acc.clear();
        acc.push(sig[0]);
        for k in 1..=n {
            let inv = 1.0 / (n - k + 1) as f64;
            next.clear();
            next.reserve(acc.len() * dim);
            for &a in acc.iter() {
                let a = a * inv;
                next.extend(v.iter().map(|&vi| a * vi));
            }
            let (off, len) = (level_offset(dim, k), next.len());
            for (x, s) in next.iter_mut().zip(&sig[off..off + len]) {
                *x += s;
            }
            std::mem::swap(acc, next);
        }
        let off = level_offset(dim, n);
        sig[off..off + acc.len()].copy_from_slice(acc);
    }
}

/// Truncated signature `Σ_{k≤N} v^{⊗k}/k!` of a single linear segment.
pub fn segment_signature(increment: &[f64], depth: usize) -> GroupLike {
    let dim = increment.len();
    let mut sig = vec![0.0; tensor_size(dim, depth)];
    sig[0] = 1.0;
    chen_update(&mut sig, dim, depth, increment, &mut ChenScratch::default());
    GroupLike(real_to_tensor(dim, depth, &sig))
}

/// Signature of the piecewise-linear path truncated at `depth`.
pub fn path_signature(path: &PiecewisePath, depth: usize) -> GroupLike {
    let dim = path.dim();
    let mut sig = vec![0.0; tensor_size(dim, depth)];
    sig[0] = 1.0;
    let mut scratch = ChenScratch::default();
    for inc in path.increments() {
        chen_update(&mut sig, dim, depth, &inc, &mut scratch);
    }
    GroupLike(real_to_tensor(dim, depth, &sig))
}

/// Signature obtained by explicitly concatenating segment signatures; slower
/// than [`path_signature`] and kept as a reference route.
pub fn path_signature_concat(path: &PiecewisePath, depth: usize) -> Tensor {
    let dim = path.dim();
    path.increments().fold(Tensor::unit(dim, depth), |acc, inc| {
        concat(&acc, &segment_signature(&inc, depth)).expect("same shape")
    })
}

pub(crate) fn real_to_tensor(dim: usize, depth: usize, sig: &[f64]) -> Tensor {
    Tensor::from_coeffs(
        dim,
        depth,
        sig.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
    )
    .expect("buffer has tensor size")
}
