//! Subcommand implementations.

use std::error::Error as StdError;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Subcommand};
use serde::Serialize;
use sigcalc::expm::matrix_exp;
use sigcalc::montecarlo::{
    estimate_real, expected_signature_mc, levy_characteristic, simulate_1d, simulate_levy_area,
    simulate_sigsde, SimConfig,
};
use sigcalc::operators::{linear_matrix, r_op, SdeSpec};
use sigcalc::powerseries::{
    bm, gbm_initial, jacobi, linear_matrix_1d, r_pow, r_sig_brownian, Model1D, Seq,
};
use sigcalc::quadrature::gauss_quadrature;
use sigcalc::schemes::{
    eval_power, scheme1_riccati, scheme2_transport, scheme3_linear, SchemeConfig, Solver,
};
use sigcalc::signature::{path_signature, time_extend, PiecewisePath};
use sigcalc::tensor::{index_word, shuffle, shuffle_exp, shuffle_log, tensor_size, Tensor, Word};
use sigcalc::{Coefficients, Complex64 as C};

use crate::output::{to_csv, write_outputs, Comparison, Report, Row};
use crate::Common;

pub type CmdResult<T> = Result<T, Box<dyn StdError>>;

fn c(x: f64) -> C {
    C::new(x, 0.0)
}

fn solver(adaptive: bool) -> Solver {
    if adaptive {
        Solver::Adaptive { rel_tol: 1e-8 }
    } else {
        Solver::Rk4
    }
}

/// Writes the outputs, prints a summary and reports whether `--check` passed.
fn finish(
    mut report: Report,
    common: &Common,
    default_prefix: &str,
    csv_text: String,
    x_label: &str,
    title: &str,
    start: Instant,
) -> CmdResult<bool> {
    report.seconds = start.elapsed().as_secs_f64();
    let passed = report.all_passed();
    if !passed {
        report.status = "check-failed".into();
    }
    let prefix = common.out.clone().unwrap_or_else(|| PathBuf::from(default_prefix));
    let files = write_outputs(&prefix, &csv_text, x_label, title, &report)?;
    for ch in &report.checks {
        println!("{} {}: {}", if ch.passed { "ok  " } else { "FAIL" }, ch.name, ch.detail);
    }
    for n in &report.notes {
        println!("note: {n}");
    }
    let names: Vec<String> = files.iter().map(|f| f.display().to_string()).collect();
    println!("wrote {} ({:.2}s)", names.join(", "), report.seconds);
    Ok(!common.check || passed)
}

fn config_json<T: Serialize>(args: &T) -> serde_json::Value {
    serde_json::to_value(args).unwrap_or(serde_json::Value::Null)
}

// ---------------------------------------------------------------------------

#[derive(Args, Debug, Serialize)]
pub struct GbmArgs {
    #[arg(long, default_value_t = 1.0)]
    pub c: f64,
    #[arg(long, default_value_t = 1.0)]
    pub y0: f64,
    #[arg(long = "T", default_value_t = 1.0)]
    pub horizon: f64,
    #[arg(long = "K", default_value_t = 20)]
    pub k: usize,
    #[arg(long, default_value_t = 1000)]
    pub steps: usize,
    /// Grid points reported on [0, T].
    #[arg(long, default_value_t = 21)]
    pub points: usize,
    #[arg(long)]
    pub adaptive: bool,
    #[command(flatten)]
    #[serde(skip)]
    pub common: Common,
}

pub fn gbm_laplace(a: &GbmArgs) -> CmdResult<bool> {
    let start = Instant::now();
    let mut report = Report::new("gbm-laplace", config_json(a));
    let cfg = SchemeConfig {
        k: a.k,
        horizon: a.horizon,
        steps: a.steps,
        solver: solver(a.adaptive),
        ..Default::default()
    };
    let m = bm();
    let u0 = gbm_initial(a.c, a.y0, a.k)?;
    let pow = scheme1_riccati(|u: &Seq| Ok(r_pow(u, &m)), &u0, &cfg)?;
    let sig = scheme1_riccati(|u: &Seq| Ok(r_sig_brownian(u)), &u0.to_factorial(), &cfg)?;
    let h = a.horizon / a.steps as f64;
    let (cc, y0) = (a.c, a.y0);
    let mut worst: f64 = 0.0;
    let mut basis_gap: f64 = 0.0;
    let points = a.points.max(2);
    for j in 0..points {
        let t = a.horizon * j as f64 / (points - 1) as f64;
        let idx = (t / h).round() as usize;
        let q = gauss_quadrature(|x| (-cc * y0 * x.exp()).exp(), t)?;
        report.rows.push(Row::new("quadrature", t, c(q), "exact"));
        if let Some(v) = pow.values.get(idx) {
            report.rows.push(Row::new("scheme1-pow", t, *v, &pow.trajectory.status.label()));
            report.comparisons.push(Comparison::new(t, "scheme1-pow", *v, "quadrature", c(q)));
            worst = worst.max((v - c(q)).norm());
        }
        if let Some(v) = sig.values.get(idx) {
            report.rows.push(Row::new("scheme1-sig", t, *v, &sig.trajectory.status.label()));
            if let Some(p) = pow.values.get(idx) {
                basis_gap = basis_gap.max((v - p).norm());
            }
        }
    }
    let survived = pow.trajectory.status.explosion_time().is_none();
    report.check(
        "scheme1 vs quadrature",
        survived && worst <= 1e-3,
        format!("max |difference| = {worst:.3e} (tolerance 1e-3), status {}", pow.trajectory.status.label()),
    );
    report.check("power vs factorial basis", basis_gap <= 1e-8, format!("max gap {basis_gap:.3e} (tolerance 1e-8)"));
    let csv = to_csv("t", &report.rows);
    finish(report, &a.common, "gbm_laplace", csv, "t", "GBM Laplace transform", start)
}

// ---------------------------------------------------------------------------

#[derive(Args, Debug, Serialize)]
pub struct QuarticArgs {
    /// Horizon of the transport scheme.
    #[arg(long = "T", default_value_t = 0.25)]
    pub horizon: f64,
    /// Truncation level of the transport scheme (defaults to 2N).
    #[arg(long = "K")]
    pub k: Option<usize>,
    #[arg(long = "N", default_value_t = 80)]
    pub n: usize,
    /// Direction resolutions, comma separated.
    #[arg(long = "M", value_delimiter = ',', default_values_t = vec![80, 160, 320])]
    pub m: Vec<usize>,
    /// Riccati truncation levels, comma separated.
    #[arg(long = "riccati-K", value_delimiter = ',', default_values_t = vec![10, 20, 40])]
    pub riccati_k: Vec<usize>,
    /// Horizon of the Riccati runs.
    #[arg(long = "riccati-T", default_value_t = 1.0)]
    pub riccati_t: f64,
    #[arg(long, default_value_t = 1000)]
    pub steps: usize,
    /// Riccati basis: factorial (sig) or power (pow).
    #[arg(long, default_value = "sig")]
    pub basis: String,
    #[arg(long, default_value_t = 1e10)]
    pub threshold: f64,
    #[arg(long)]
    pub adaptive: bool,
    #[command(flatten)]
    #[serde(skip)]
    pub common: Common,
}

fn quartic_oracle(t: f64) -> CmdResult<f64> {
    Ok(gauss_quadrature(|x| (-x.powi(4) / 24.0).exp(), t)?)
}

pub fn bm_quartic(a: &QuarticArgs) -> CmdResult<bool> {
    let start = Instant::now();
    let mut report = Report::new("bm-quartic", config_json(a));
    let m = bm();
    let k = a.k.unwrap_or(2 * a.n);
    let mut u0 = Seq::zeros(k.max(4));
    u0.coeffs_mut()[4] = c(-1.0 / 24.0);
    let mut explosions = Vec::new();
    let mut worst_all: f64 = 0.0;
    for &mm in &a.m {
        let cfg = SchemeConfig {
            k: k.max(4),
            n: a.n,
            m: mm,
            horizon: a.horizon,
            explosion_threshold: a.threshold,
            ..Default::default()
        };
        if cfg.lambda() > 1.0 {
            report.notes.push(format!(
                "M={mm}: λ = MT/N = {} > 1, mixture weights are signed",
                cfg.lambda()
            ));
        }
        let run = scheme2_transport(|u: &Seq| Ok(r_pow(u, &m)), &u0, &cfg)?;
        let src = format!("scheme2-M{mm}");
        let label = run.status.label();
        let mut worst: f64 = 0.0;
        for (t, v) in run.times.iter().zip(&run.values) {
            let q = quartic_oracle(*t)?;
            report.rows.push(Row::new(&src, *t, *v, &label));
            report.comparisons.push(Comparison::new(*t, &src, *v, "quadrature", c(q)));
            worst = worst.max((v - c(q)).norm() / q);
        }
        worst_all = worst_all.max(worst);
        let ex = run.status.explosion_time();
        explosions.push(ex.unwrap_or(f64::INFINITY));
        report.notes.push(format!(
            "{src}: λ = {:.4}, {} compositions, {label}, max relative error {worst:.2e}",
            run.lambda, run.compositions
        ));
    }
    for j in 0..=a.n {
        let t = a.horizon * j as f64 / a.n as f64;
        report.rows.push(Row::new("quadrature", t, c(quartic_oracle(t)?), "exact"));
    }
    report.check("scheme2 vs quadrature", worst_all <= 0.02, format!("max relative error {worst_all:.3e} (tolerance 2%)"));
    let monotone = explosions.windows(2).all(|w| w[0] <= w[1]);
    report.check("scheme2 explosion times non-decreasing in M", monotone, format!("{explosions:?}"));

    let stride = (a.steps / 200).max(1);
    for &kk in &a.riccati_k {
        let cfg = SchemeConfig {
            k: kk.max(4),
            horizon: a.riccati_t,
            steps: a.steps,
            explosion_threshold: a.threshold,
            solver: solver(a.adaptive),
            ..Default::default()
        };
        let run = match a.basis.as_str() {
            "sig" => {
                let mut u = Seq::zeros(kk.max(4));
                u.coeffs_mut()[4] = c(-1.0);
                scheme1_riccati(|x: &Seq| Ok(r_sig_brownian(x)), &u, &cfg)?
            }
            "pow" => scheme1_riccati(|x: &Seq| Ok(r_pow(x, &m)), &u0.resized(kk.max(4)), &cfg)?,
            other => return Err(format!("unknown basis {other:?}; use sig or pow").into()),
        };
        let src = format!("scheme1-K{kk}");
        let label = run.trajectory.status.label();
        for (i, (t, v)) in run.trajectory.times.iter().zip(&run.values).enumerate() {
            if i % stride == 0 {
                report.rows.push(Row::new(&src, *t, *v, &label));
            }
        }
        report.notes.push(match run.trajectory.status.explosion_time() {
            Some(t) => format!("{src} ({} basis): explodes at t = {t}", a.basis),
            None => format!("{src} ({} basis): no explosion before t = {}", a.basis, a.riccati_t),
        });
    }
    let csv = to_csv("t", &report.rows);
    finish(report, &a.common, "bm_quartic", csv, "t", "E[exp(-X^4/24)] for Brownian motion", start)
}

// ---------------------------------------------------------------------------

#[derive(Args, Debug, Serialize)]
pub struct JacobiArgs {
    #[arg(long = "T", default_value_t = 1000.0)]
    pub horizon: f64,
    #[arg(long = "K", default_value_t = 40)]
    pub k: usize,
    #[arg(long, default_value_t = 0.5)]
    pub x0: f64,
    #[arg(long, default_value_t = -3.0, allow_hyphen_values = true)]
    pub cmin: f64,
    #[arg(long, default_value_t = 3.0, allow_hyphen_values = true)]
    pub cmax: f64,
    #[arg(long, default_value_t = 61)]
    pub points: usize,
    /// Diagonal preconditioning: basis element k is scaled by weight^k.
    #[arg(long, default_value_t = 1.0)]
    pub weight: f64,
    /// Model JSON `{"b":[...],"a":[...],"x0":..,"K":..}`; defaults to Jacobi.
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Monte-Carlo paths for an oracle at the same horizon (0 disables).
    #[arg(long, default_value_t = 0)]
    pub mc_paths: usize,
    #[arg(long, default_value_t = 1e-3)]
    pub dt: f64,
    #[arg(long, default_value_t = 2024)]
    pub seed: u64,
    #[command(flatten)]
    #[serde(skip)]
    pub common: Common,
}

pub fn jacobi_mgf(a: &JacobiArgs) -> CmdResult<bool> {
    let start = Instant::now();
    let mut report = Report::new("jacobi-mgf", config_json(a));
    let (model, k) = match &a.model {
        Some(p) => {
            let (m, k) = Model1D::from_json(&fs::read_to_string(p)?)?;
            (m, k.unwrap_or(a.k))
        }
        None => (jacobi(), a.k),
    };
    if !(a.weight > 0.0) {
        return Err("weight must be positive".into());
    }
    let mut g = linear_matrix_1d(&model, k);
    let w = |i: usize| a.weight.powi(i as i32);
    for i in 0..=k {
        for j in 0..=k {
            g[(i, j)] *= w(i) / w(j);
        }
    }
    let is_jacobi = a.model.is_none();
    let points = a.points.max(2);
    let grid: Vec<f64> = (0..points).map(|j| a.cmin + (a.cmax - a.cmin) * j as f64 / (points - 1) as f64).collect();
    let ens = if a.mc_paths > 0 {
        Some(simulate_1d(&model, &SimConfig::new(a.mc_paths, a.dt, a.seed), a.horizon, 1)?)
    } else {
        None
    };
    let mut worst: f64 = 0.0;
    let mut zmax: f64 = 0.0;
    let mut norm_gap: f64 = 0.0;
    for &cc in &grid {
        let mut u0 = vec![c(1.0); k + 1];
        for j in 1..=k {
            u0[j] = u0[j - 1] * (cc / j as f64);
        }
        let scaled: Vec<C> = u0.iter().enumerate().map(|(i, v)| v * w(i)).collect();
        let ct = scheme3_linear(&g, &scaled, a.horizon)?;
        let unscaled: Vec<C> = ct.iter().enumerate().map(|(i, v)| v / w(i)).collect();
        let v = eval_power(&unscaled, a.x0);
        report.rows.push(Row::new("scheme3", cc, v, "completed"));
        if cc == 0.0 {
            norm_gap = (v - c(1.0)).norm();
        }
        if is_jacobi && a.horizon >= 100.0 {
            let lim = c((1.0 + cc.exp()) / 2.0);
            report.rows.push(Row::new("stationary", cc, lim, "exact"));
            report.comparisons.push(Comparison::new(cc, "scheme3", v, "stationary", lim));
            worst = worst.max((v - lim).norm());
        }
        if let Some(ens) = &ens {
            let est = estimate_real(&ens.terminal().iter().map(|x| (cc * x).exp()).collect::<Vec<_>>());
            report.rows.push(Row::new("mc", cc, est.mean, &format!("se={}", est.std_error)));
            report.comparisons.push(Comparison::new(cc, "scheme3", v, "mc", est.mean));
            zmax = zmax.max(est.z_score(v));
        }
    }
    if grid.iter().any(|&x| x == 0.0) {
        report.check("normalization at c = 0", norm_gap <= 1e-12, format!("|mgf(0) - 1| = {norm_gap:.2e}"));
    }
    if is_jacobi && a.horizon >= 100.0 {
        report.check("stationary limit (1+e^c)/2", worst <= 5e-3, format!("max |difference| = {worst:.3e} (tolerance 5e-3)"));
    }
    if let Some(ens) = &ens {
        report.check("scheme3 vs Monte Carlo", zmax <= 3.0, format!("max z-score {zmax:.2} (tolerance 3)"));
        report.notes.push(format!("Monte Carlo clamp rate {:.2e}", ens.clamp_rate()));
    }
    let csv = to_csv("c", &report.rows);
    finish(report, &a.common, "jacobi_mgf", csv, "c", "Jacobi moment generating function", start)
}

// ---------------------------------------------------------------------------

#[derive(Args, Debug, Serialize)]
pub struct LevyArgs {
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub lambda: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub gamma1: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub gamma2: f64,
    #[arg(long = "T", default_value_t = 1.0)]
    pub horizon: f64,
    #[arg(long, default_value_t = 1000)]
    pub steps: usize,
    /// Monte-Carlo paths for an oracle at the horizon (0 disables).
    #[arg(long, default_value_t = 0)]
    pub mc_paths: usize,
    #[arg(long, default_value_t = 1e-3)]
    pub dt: f64,
    #[arg(long, default_value_t = 99)]
    pub seed: u64,
    #[command(flatten)]
    #[serde(skip)]
    pub common: Common,
}

/// `E[exp(i(λA_t + γ·W_t))] = exp(-|γ|² tanh(λt/2)/λ) / cosh(λt/2)`.
pub fn levy_closed_form(lambda: f64, g1: f64, g2: f64, t: f64) -> f64 {
    let g2sum = g1 * g1 + g2 * g2;
    let x = 0.5 * lambda * t;
    let decay = if x.abs() < 1e-8 { g2sum * t / 2.0 } else { g2sum * x.tanh() / lambda };
    (-decay).exp() / x.cosh()
}

/// Initial Riccati datum `i(λ/2)(e_21 - e_12) + iγ₁e_1 + iγ₂e_2` on `T^2(R^2)`.
pub fn levy_initial(lambda: f64, g1: f64, g2: f64) -> Tensor {
    let half = 0.5 * lambda;
    Tensor::from_words(
        2,
        2,
        [
            (Word::new(vec![2, 1]), C::new(0.0, half)),
            (Word::new(vec![1, 2]), C::new(0.0, -half)),
            (Word::new(vec![1]), C::new(0.0, g1)),
            (Word::new(vec![2]), C::new(0.0, g2)),
        ],
    )
    .expect("valid words")
}

pub fn levy_area(a: &LevyArgs) -> CmdResult<bool> {
    let start = Instant::now();
    let mut report = Report::new("levy-area", config_json(a));
    let spec = SdeSpec::brownian(2, 2);
    let cfg = SchemeConfig { k: 2, horizon: a.horizon, steps: a.steps, ..Default::default() };
    let run = scheme1_riccati(|u: &Tensor| r_op(u, &spec), &levy_initial(a.lambda, a.gamma1, a.gamma2), &cfg)?;
    let label = run.trajectory.status.label();
    let stride = (a.steps / 200).max(1);
    let mut worst: f64 = 0.0;
    for (i, (t, v)) in run.trajectory.times.iter().zip(&run.values).enumerate() {
        let exact = c(levy_closed_form(a.lambda, a.gamma1, a.gamma2, *t));
        worst = worst.max((v - exact).norm());
        if i % stride == 0 || i + 1 == run.values.len() {
            report.rows.push(Row::new("scheme1", *t, *v, &label));
            report.rows.push(Row::new("exact", *t, exact, "exact"));
            report.comparisons.push(Comparison::new(*t, "scheme1", *v, "exact", exact));
        }
    }
    report.check("scheme1 vs closed form", worst <= 1e-6, format!("max |difference| = {worst:.3e} (tolerance 1e-6)"));
    if a.mc_paths > 0 {
        let samples = simulate_levy_area(&SimConfig::new(a.mc_paths, a.dt, a.seed), a.horizon)?;
        let est = levy_characteristic(&samples, a.lambda, (a.gamma1, a.gamma2));
        let v = *run.values.last().ok_or("empty trajectory")?;
        report.rows.push(Row::new("mc", a.horizon, est.mean, &format!("se={}", est.std_error)));
        report.comparisons.push(Comparison::new(a.horizon, "scheme1", v, "mc", est.mean));
        let z = est.z_score(v);
        report.check("scheme1 vs Monte Carlo", z <= 3.0, format!("z-score {z:.2} (tolerance 3)"));
    }
    let csv = to_csv("t", &report.rows);
    finish(report, &a.common, "levy_area", csv, "t", "Lévy area characteristic function", start)
}

// ---------------------------------------------------------------------------

#[derive(Args, Debug, Serialize)]
pub struct ExpSigArgs {
    #[arg(long, default_value_t = 0.2)]
    pub sigma: f64,
    #[arg(long, default_value_t = 1.0)]
    pub s0: f64,
    #[arg(long, default_value_t = 3)]
    pub level: usize,
    #[arg(long = "T", default_value_t = 1.0)]
    pub horizon: f64,
    /// Monte-Carlo paths for an oracle (0 disables).
    #[arg(long, default_value_t = 0)]
    pub mc_paths: usize,
    #[arg(long, default_value_t = 1e-3)]
    pub dt: f64,
    #[arg(long, default_value_t = 17)]
    pub seed: u64,
    #[command(flatten)]
    #[serde(skip)]
    pub common: Common,
}

pub fn expected_sig(a: &ExpSigArgs) -> CmdResult<bool> {
    let start = Instant::now();
    let mut report = Report::new("expected-sig", config_json(a));
    let base = SdeSpec::black_scholes(a.sigma, a.s0)?;
    let n = a.level;
    let spec = SdeSpec::new(
        base.x0.clone(),
        base.b.iter().map(|b| b.resized(n)).collect(),
        base.a.iter().map(|r| r.iter().map(|x| x.resized(n)).collect()).collect(),
    )?;
    let g = linear_matrix(&spec, n)?;
    let e = matrix_exp(&g, a.horizon)?;
    let size = tensor_size(2, n);
    let exact: Vec<C> = (0..size).map(|j| e[(0, j)]).collect();
    let mc = if a.mc_paths > 0 {
        let ens = simulate_sigsde(&spec, &SimConfig::new(a.mc_paths, a.dt, a.seed), a.horizon, n)?;
        Some(expected_signature_mc(&ens, n)?)
    } else {
        None
    };
    let mut csv = String::from("source,word,value_re,value_im,std_error,status\n");
    let mut time_err: f64 = 0.0;
    let mut mc_ok = true;
    let mut zmax: f64 = 0.0;
    for idx in 0..size {
        let w = index_word(idx, 2);
        csv.push_str(&format!("scheme3,\"{}\",{},{},0,completed\n", w.to_text(), exact[idx].re, exact[idx].im));
        report.rows.push(Row::new("scheme3", idx as f64, exact[idx], &w.to_string()));
        if w.letters().iter().all(|&l| l == 1) {
            let f: f64 = (1..=w.len()).map(|k| k as f64).product();
            time_err = time_err.max((exact[idx] - c(a.horizon.powi(w.len() as i32) / f)).norm());
        }
        if let Some((mean, se)) = &mc {
            let m = mean.coeffs()[idx];
            csv.push_str(&format!("mc,\"{}\",{},{},{},estimate\n", w.to_text(), m.re, m.im, se[idx]));
            report.rows.push(Row::new("mc", idx as f64, m, &w.to_string()));
            report.comparisons.push(Comparison::new(idx as f64, "scheme3", exact[idx], "mc", m));
            let d = (m - exact[idx]).norm();
            mc_ok &= d <= 3.0 * se[idx] + 1e-12;
            if d > 1e-12 {
                zmax = zmax.max(d / se[idx]);
            }
        }
    }
    report.check("pure-time words T^m/m!", time_err <= 1e-10, format!("max error {time_err:.2e} (tolerance 1e-10)"));
    if mc.is_some() {
        report.check("scheme3 vs Monte Carlo", mc_ok, format!("max z-score {zmax:.2} over {size} words (tolerance 3)"));
    }
    finish(report, &a.common, "expected_sig", csv, "word index", "Black–Scholes expected signature", start)
}

// ---------------------------------------------------------------------------

#[derive(Subcommand, Debug)]
pub enum AlgebraCmd {
    /// Shuffle product of two tensor files.
    Shuffle {
        a: PathBuf,
        b: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Shuffle exponential of a tensor file.
    Exp {
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Shuffle logarithm of a tensor file (empty-word coefficient must be 1).
    Log {
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Truncated signature of a piecewise-linear path given as CSV `t,x1,...`.
    Sig {
        path: PathBuf,
        #[arg(long)]
        depth: usize,
        /// Add time as the first coordinate.
        #[arg(long)]
        time_extend: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn read_tensor(p: &Path) -> CmdResult<Tensor> {
    Ok(Tensor::parse_text(&fs::read_to_string(p)?, None, None)?)
}

fn emit(t: &Tensor, out: &Option<PathBuf>) -> CmdResult<()> {
    match out {
        Some(p) => fs::write(p, t.to_text())?,
        None => print!("{}", t.to_text()),
    }
    Ok(())
}

pub fn algebra(cmd: &AlgebraCmd) -> CmdResult<()> {
    match cmd {
        AlgebraCmd::Shuffle { a, b, out } => {
            let (x, y) = (read_tensor(a)?, read_tensor(b)?);
            let depth = x.depth().max(y.depth());
            emit(&shuffle(&x.resized(depth), &y.resized(depth))?, out)
        }
        AlgebraCmd::Exp { input, out } => emit(&shuffle_exp(&read_tensor(input)?), out),
        AlgebraCmd::Log { input, out } => emit(&shuffle_log(&read_tensor(input)?)?, out),
        AlgebraCmd::Sig { path, depth, time_extend: te, out } => {
            let mut p = PiecewisePath::from_csv(&fs::read_to_string(path)?)?;
            if *te {
                p = time_extend(&p)?;
            }
            emit(&path_signature(&p, *depth).into_tensor(), out)
        }
    }
}
