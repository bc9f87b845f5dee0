//! Classical RK4 with optional step-halving error control and explosion
//! detection.

use crate::error::Result;
use crate::schemes::{SchemeConfig, Solver, Status, Trajectory};
use crate::Coefficients;

const MAX_HALVINGS: u32 = 30;

fn rk4_step<Y, F>(f: &F, y: &Y, h: f64) -> Result<Y>
where
    Y: Coefficients,
    F: Fn(&Y) -> Result<Y>,
{
    let k1 = f(y)?;
    let mut tmp = y.clone();
    tmp.axpy(h / 2.0, &k1);
    let k2 = f(&tmp)?;
    let mut tmp = y.clone();
    tmp.axpy(h / 2.0, &k2);
    let k3 = f(&tmp)?;
    let mut tmp = y.clone();
    tmp.axpy(h, &k3);
    let k4 = f(&tmp)?;
    let mut out = y.clone();
    out.axpy(h / 6.0, &k1);
    out.axpy(h / 3.0, &k2);
    out.axpy(h / 3.0, &k3);
    out.axpy(h / 6.0, &k4);
    Ok(out)
}

fn exploded<Y: Coefficients>(y: &Y, threshold: f64) -> bool {
    !y.is_finite() || y.max_abs() > threshold
}

fn rel_diff<Y: Coefficients>(a: &Y, b: &Y) -> f64 {
    let scale = a.max_abs().max(1.0);
    a.coeffs()
        .iter()
        .zip(b.coeffs())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
        / scale
}

/// Advances over `[t, t + h]` with step halving until two half steps agree
/// with one full step to `tol`. Returns `None` when the step underflows or
/// the state leaves the finite region.
fn adaptive_step<Y, F>(f: &F, y: &Y, h: f64, tol: f64, threshold: f64, depth: u32) -> Result<Option<Y>>
where
    Y: Coefficients,
    F: Fn(&Y) -> Result<Y>,
{
    let full = rk4_step(f, y, h)?;
    let half = rk4_step(f, y, h / 2.0)?;
    if exploded(&half, threshold) && depth >= MAX_HALVINGS {
        return Ok(None);
    }
    let two = if exploded(&half, threshold) {
        None
    } else {
        Some(rk4_step(f, &half, h / 2.0)?)
    };
    if let Some(two) = &two {
        if !exploded(two, threshold) && !exploded(&full, threshold) && rel_diff(two, &full) <= tol {
            return Ok(Some(two.clone()));
        }
    }
    if depth >= MAX_HALVINGS {
        return Ok(None);
    }
    let mid = match adaptive_step(f, y, h / 2.0, tol, threshold, depth + 1)? {
        Some(m) => m,
        None => return Ok(None),
    };
    if exploded(&mid, threshold) {
        return Ok(None);
    }
    adaptive_step(f, &mid, h / 2.0, tol, threshold, depth + 1)
}

/// Integrates `y' = f(y)` on `[0, horizon]` over `cfg.steps` equal steps.
/// The state at every step is recorded; integration stops before the first
/// state whose largest coefficient exceeds `cfg.explosion_threshold` or is
/// non-finite, and the trajectory is marked as exploded at that time.
pub fn ode_integrate<Y, F>(f: F, y0: &Y, horizon: f64, cfg: &SchemeConfig) -> Result<Trajectory<Y>>
where
    Y: Coefficients,
    F: Fn(&Y) -> Result<Y>,
{
    let steps = cfg.steps.max(1);
    let h = horizon / steps as f64;
    let mut times = vec![0.0];
    let mut states = vec![y0.clone()];
    let mut y = y0.clone();
    for s in 0..steps {
        let t_next = (s + 1) as f64 * h;
        let next = match cfg.solver {
            Solver::Rk4 => Some(rk4_step(&f, &y, h)?),
            Solver::Adaptive { rel_tol } => {
                adaptive_step(&f, &y, h, rel_tol, cfg.explosion_threshold, 0)?
            }
        };
        match next {
            Some(n) if !exploded(&n, cfg.explosion_threshold) => {
                y = n;
                times.push(t_next);
                states.push(y.clone());
            }
            _ => {
                return Ok(Trajectory {
                    times,
                    states,
                    status: Status::Exploded { time: t_next },
                });
            }
        }
    }
    Ok(Trajectory {
        times,
        states,
        status: Status::Completed,
    })
}
