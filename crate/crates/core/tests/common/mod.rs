//! Seeded property checks shared by the proptest suite and the acceptance
//! runner. Each check draws its inputs from a ChaCha stream keyed by `seed`
//! and returns a description of the first violation.

#![allow(dead_code)]

use std::collections::HashMap;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sigcalc::expm::matrix_exp;
use sigcalc::operators::{l_from_r, l_op, linear_matrix, r_op, SdeSpec};
use sigcalc::powerseries::{
    bracket1, bracket2, bm, conv, exp_star, l_pow, linear_matrix_1d, log_star, r_pow,
    r_sig_brownian, Model1D, Seq,
};
use sigcalc::schemes::mixture_weights;
use sigcalc::signature::{is_grouplike, path_signature, time_extend, PiecewisePath};
use sigcalc::tensor::{
    concat, dilate, index_word, l1_norm, pair, seminorm, shift1, shift2, shuffle, shuffle_exp,
    shuffle_log, shuffle_words, tensor_size, Partition, Tensor, Word,
};
use sigcalc::{Coefficients, Complex64 as C};

pub type Check = fn(u64) -> Result<(), String>;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn c(x: f64) -> C {
    C::new(x, 0.0)
}

pub fn rand_c(r: &mut ChaCha8Rng) -> C {
    C::new(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0))
}

/// Random complex tensor supported on levels `<= support` (and `>= from`).
pub fn rand_tensor(r: &mut ChaCha8Rng, d: usize, n: usize, from: usize, support: usize) -> Tensor {
    let mut t = Tensor::zeros(d, n);
    for lvl in from..=support.min(n) {
        for x in t.level_mut(lvl) {
            *x = rand_c(r);
        }
    }
    t
}

pub fn rand_shape(r: &mut ChaCha8Rng) -> (usize, usize) {
    (r.random_range(1..=3usize), r.random_range(1..=5usize))
}

pub fn rand_path(r: &mut ChaCha8Rng, d: usize, samples: usize) -> PiecewisePath {
    let mut t = 0.0;
    let mut times = Vec::new();
    let mut pts = Vec::new();
    let mut x: Vec<f64> = (0..d).map(|_| r.random_range(-1.0..1.0)).collect();
    for _ in 0..samples {
        times.push(t);
        pts.push(x.clone());
        t += r.random_range(0.05..0.5);
        for xi in x.iter_mut() {
            *xi += r.random_range(-0.7..0.7);
        }
    }
    PiecewisePath::new(times, pts).unwrap()
}

fn max_diff(a: &Tensor, b: &Tensor) -> f64 {
    (a - b).max_abs()
}

fn max_diff_upto(a: &Tensor, b: &Tensor, level: usize) -> f64 {
    let n = tensor_size(a.dim(), level);
    a.coeffs()[..n]
        .iter()
        .zip(&b.coeffs()[..n])
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

fn scale_of(ts: &[&Tensor]) -> f64 {
    ts.iter().map(|t| t.max_abs()).fold(1.0, f64::max)
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

// ---------------------------------------------------------------------------
// Brute-force shuffle oracle: all order-preserving interleavings.

pub fn brute_shuffle(i: &[usize], j: &[usize]) -> HashMap<Vec<usize>, f64> {
    let n = i.len() + j.len();
    let mut out = HashMap::new();
    for mask in 0u32..(1 << n) {
        if mask.count_ones() as usize != i.len() {
            continue;
        }
        let (mut a, mut b) = (0, 0);
        let mut w = Vec::with_capacity(n);
        for pos in 0..n {
            if mask & (1 << pos) != 0 {
                w.push(i[a]);
                a += 1;
            } else {
                w.push(j[b]);
                b += 1;
            }
        }
        *out.entry(w).or_insert(0.0) += 1.0;
    }
    out
}

fn rand_word(r: &mut ChaCha8Rng, d: usize, len: usize) -> Word {
    Word::new((0..len).map(|_| r.random_range(1..=d)).collect::<Vec<_>>())
}

// ---------------------------------------------------------------------------
// Tensor algebra

pub fn shuffle_commutative(seed: u64) -> Result<(), String> {
    let r = &mut rng(seed);
    let (d, n) = rand_shape(r);
    let a = rand_tensor(r, d, n, 0, n);
    let b = rand_tensor(r, d, n, 0, n);
    let ab = shuffle(&a, &b).unwrap();
    let ba = shuffle(&b, &a).unwrap();
    let e = max_diff(&ab, &ba);
    ensure(e <= 1e-12 * scale_of(&[&ab]), || format!("d={d} N={n}: |a⧢b - b⧢a| = {e:e}"))
}

pub fn shuffle_associative(seed: u64) -> Result<(), String> {
    let r = &mut rng(seed);
    let (d, n) = rand_shape(r);
    let a = rand_tensor(r, d, n, 0, n);
    let b = rand_tensor(r, d, n, 0, n);
    let cc = rand_tensor(r, d, n, 0, n);
    let left = shuffle(&shuffle(&a, &b).unwrap(), &cc).unwrap();
    let right = shuffle(&a, &shuffle(&b, &cc).unwrap()).unwrap();
    let e = max_diff(&left, &right);
    ensure(e <= 1e-12 * scale_of(&[&left]), || format!("d={d} N={n}: associativity defect {e:e}"))
}

pub fn concat_laws(seed: u64) -> Result<(), String> {
    let r = &mut rng(seed);
    let (d, n) = rand_shape(r);
    let a = rand_tensor(r, d, n, 0, n);
    let b = rand_tensor(r, d, n, 0, n);
    let cc = rand_tensor(r, d, n, 0, n);
    let left = concat(&concat(&a, &b).unwrap(), &cc).unwrap();
    let right = concat(&a, &concat(&b, &cc).unwrap()).unwrap();
    let e = max_diff(&left, &right);
    ensure(e <= 1e-12 * scale_of(&[&left]), || format!("associativity defect {e:e}"))?;
    let unit = Tensor::unit(d, n);
    ensure(concat(&a, &unit).unwrap() == a && concat(&unit, &a).unwrap() == a, || {
        "unit law".into()
    })
}

pub fn shuffle_words_bruteforce(seed: u64) -> Result<(), String> {
    let r = &mut rng(seed);
    let d = r.random_range(1..=3usize);
    let p = r.random_range(0..=3usize);
    let q = r.random_range(0..=3usize);
    let n = p + q + r.random_range(0..=1usize);
    let i = rand_word(r, d, p);
    let j = rand_word(r, d, q);
    let got = shuffle_words(&i, &j, d, n).unwrap();
    let oracle = brute_shuffle(i.letters(), j.letters());
    for (w, coeff) in got.nonzero_words() {
        ensure(w.len() == p + q, || format!("{i}⧢{j} has support on {w}"))?;
        let want = oracle.get(w.letters()).copied().unwrap_or(0.0);
        ensure((coeff - c(want)).norm() < 1e-12, || format!("{i}⧢{j} at {w}: {coeff} vs {want}"))?;
    }
    let total: f64 = oracle.values().sum();
    let got_total: f64 = got.nonzero_words().map(|(_, v)| v.re).sum();
    ensure((total - got_total).abs() < 1e-12, || format!("{i}⧢{j}: mass {got_total} vs {total}"))
}

/// `Σ_{J^ord = I^ord} e_J = (1/I!) e_{i_1} ⧢ ... ⧢ e_{i_n}`.
pub fn symmetrization(seed: u64) -> Result<(), String> {
    let r = &mut rng(seed);
    let d = r.random_range(1..=3usize);
    let len = r.random_range(1..=4usize);
    let word = rand_word(r, d, len);
    let n = len;
    let mut prod = Tensor::unit(d, n);
    for &l in word.letters() {
        prod = shuffle(&prod, &Tensor::basis(&Word::new(vec![l]), d, n).unwrap()).unwrap();
    }
    let prod = prod.scale_real(1.0 / word.multiplicity_factorial());
    let key = word.sorted();
    let mut lhs = Tensor::zeros(d, n);
    for idx in 0..tensor_size(d, n) {
        let w = index_word(idx, d);
        if w.len() == len && w.sorted() == key {
            lhs.coeffs_mut()[idx] = c(1.0);
        }
    }
    let e = max_diff(&lhs, &prod);
    ensure(e < 1e-12, || format!("{word}: symmetrization defect {e:e}"))
}

pub fn exp_log_round_trip(seed: u64) -> Result<(), String> {
    let r = &mut rng(seed);
    let (d, n) = rand_shape(r);
    let u = rand_tensor(r, d, n, 1, n).scale_real(0.5);
    let back = shuffle_log(&shuffle_exp(&u)).unwrap();
    let e = max_diff(&back, &u);
    ensure(e < 1e-10, || format!("d={d} N={n}: log(exp(u)) defect {e:e}"))?;
    let mut v = rand_tensor(r, d, n, 1, n).scale_real(0.5);
    v.coeffs_mut()[0] = c(1.0);
    let again = shuffle_exp(&shuffle_log(&v).unwrap());
    let e = max_diff(&again, &v);
    ensure(e < 1e-10, || format!("d={d} N={n}: exp(log(v)) defect {e:e}"))
}

pub fn exp_homomorphism(seed: u64) -> Result<(), String> {
    let r = &mut rng(seed);
    let (d, n) = rand_shape(r);
    let u = rand_tensor(r, d, n, 0, n).scale_real(0.5);
    let v = rand_tensor(r, d, n, 0, n).scale_real(0.5);
    let lhs = shuffle(&shuffle_exp(&u), &shuffle_exp(&v)).unwrap();
    let rhs = shuffle_exp(&(&u + &v));
    let e = max_diff(&lhs, &rhs);
    ensure(e <= 1e-10 * scale_of(&[&lhs]), || format!("exp homomorphism defect {e:e}"))
}

/// `exp⧢(u)^(1) = exp⧢(u) ⧢ u^(1)`, `exp⧢(u)^(2) = exp⧢(u) ⧢ (u^(2) + u^(1) u^(1)ᵀ)`
/// on levels `<= N - 2`.
pub fn shift_identities(seed: u64) -> Result<(), String> {
    let r = &mut rng(seed);
    let d = r.random_range(1..=3usize);
    let n = r.random_range(2..=5usize);
    let u = rand_tensor(r, d, n, 0, n).scale_real(0.5);
    let e = shuffle_exp(&u);
    let lift = |t: Tensor| t.resized(n);
    let e1 = shift1(&e);
    let u1 = shift1(&u);
    let e2 = shift2(&e);
    let u2 = shift2(&u);
    for i in 0..d {
        let rhs = shuffle(&e, &lift(u1[i].clone())).unwrap();
        let err = max_diff_upto(&lift(e1[i].clone()), &rhs, n - 2);
        ensure(err <= 1e-10 * scale_of(&[&rhs]), || format!("first shift {i}: {err:e}"))?;
        for j in 0..d {
            let inner = &lift(u2[i][j].clone()) + &shuffle(&lift(u1[i].clone()), &lift(u1[j].clone())).unwrap();
            let rhs = shuffle(&e, &inner).unwrap();
            let err = max_diff_upto(&lift(e2[i][j].clone()), &rhs, n - 2);
            ensure(err <= 1e-10 * scale_of(&[&rhs]), || format!("second shift {i}{j}: {err:e}"))?;
        }
    }
    Ok(())
}

pub fn dilation_homomorphism(seed: u64) -> Result<(), String> {
    let r = &mut rng(seed);
    let (d, n) = rand_shape(r);
    let a = rand_tensor(r, d, n, 0, n);
    let b = rand_tensor(r, d, n, 0, n);
    let lam = r.random_range(-2.0..2.0);
    let lhs = dilate(&shuffle(&a, &b).unwrap(), lam);
    let rhs = shuffle(&dilate(&a, lam), &dilate(&b, lam)).unwrap();
    let e = max_diff(&lhs, &rhs);
    ensure(e <= 1e-12 * scale_of(&[&lhs]), || format!("dilation defect {e:e}"))?;
    let g = path_signature(&rand_path(r, d, 4), n);
    let (ok, v) = is_grouplike(&dilate(&g, 0.5), 1e-9);
    ensure(ok, || format!("dilated signature not group-like: {v:e}"))
}

pub fn pairing_multiplicative(seed: u64) -> Result<(), String> {
    let r = &mut rng(seed);
    let (d, n) = rand_shape(r);
    let p = r.random_range(0..=n);
    let q = n - p;
    let u = rand_tensor(r, d, n, 0, p);
    let v = rand_tensor(r, d, n, 0, q);
    let g = path_signature(&rand_path(r, d, 5), n);
    let lhs = pair(&shuffle(&u, &v).unwrap(), &g);
    let rhs = pair(&u, &g) * pair(&v, &g);
    ensure((lhs - rhs).norm() <= 1e-10 * rhs.norm().max(1.0), || {
        format!("<u⧢v,g> = {lhs} but <u,g><v,g> = {rhs}")
    })
}

pub fn seminorm_submultiplicative(seed: u64) -> Result<(), String> {
    let r = &mut rng(seed);
    let (d, n) = rand_shape(r);
    let p = r.random_range(0..=n);
    let q = n - p;
    let u = rand_tensor(r, d, n, 0, p);
    let v = rand_tensor(r, d, n, 0, q);
    let g = path_signature(&rand_path(r, d, 4), n);
    for part in [Partition::Ordered, Partition::ByLevel] {
        let lhs = seminorm(&shuffle(&u, &v).unwrap(), &g, part);
        let rhs = seminorm(&u, &g, part) * seminorm(&v, &g, part);
        ensure(lhs <= rhs * (1.0 + 1e-12) + 1e-12, || format!("{part:?}: {lhs} > {rhs}"))?;
    }
    if d == 1 {
        let a = seminorm(&u, &g, Partition::Singleton);
        let b = seminorm(&u, &g, Partition::ByLevel);
        ensure((a - b).abs() <= 1e-12 * a.max(1.0), || format!("d=1 partitions differ: {a} vs {b}"))?;
    }
    Ok(())
}

pub fn l1_bounds(seed: u64) -> Result<(), String> {
    let r = &mut rng(seed);
    let (d, n) = rand_shape(r);
    let g = path_signature(&rand_path(r, d, 4), n);
    let lin: f64 = (1..=d).map(|i| g.get(&Word::new(vec![i])).norm()).sum();
    for part in [Partition::Singleton, Partition::Ordered, Partition::ByLevel] {
        if !part.is_shuffle_compatible() && d > 1 {
            continue;
        }
        let l1 = l1_norm(&g, part, false);
        ensure(l1 <= lin.exp() * (1.0 + 1e-12), || format!("{part:?}: {l1} > exp({lin})"))?;
    }
    // one-dimensional segment: partial sums of e^{|v|} - 1
    let v: f64 = r.random_range(-2.0..2.0);
    let p = PiecewisePath::new(vec![0.0, 1.0], vec![vec![0.0], vec![v]]).unwrap();
    let s = path_signature(&p, n);
    let mut f = 1.0;
    let mut partial = 0.0;
    for k in 1..=n {
        f *= k as f64;
        partial += v.abs().powi(k as i32) / f;
    }
    let got = l1_norm(&s, Partition::ByLevel, false);
    ensure((got - partial).abs() < 1e-12, || format!("segment l1 {got} vs {partial}"))
}

// ---------------------------------------------------------------------------
// Signatures

pub fn signature_shuffle_property(seed: u64) -> Result<(), String> {
    let r = &mut rng(seed);
    let (d, n) = rand_shape(r);
    let len = r.random_range(2..=6);
    let g = path_signature(&rand_path(r, d, len), n);
    let (ok, v) = is_grouplike(&g, 1e-9);
    ensure(ok, || format!("shuffle relations violated by {v:e}"))
}

pub fn chen_identity(seed: u64) -> Result<(), String> {
    let r = &mut rng(seed);
    let (d, n) = rand_shape(r);
    let samples = r.random_range(3..=7usize);
    let p = rand_path(r, d, samples);
    let cut = r.random_range(1..samples - 1);
    let left = PiecewisePath::new(p.times()[..=cut].to_vec(), p.points()[..=cut].to_vec()).unwrap();
    let right = PiecewisePath::new(p.times()[cut..].to_vec(), p.points()[cut..].to_vec()).unwrap();
    let whole = path_signature(&p, n);
    let joined = concat(&path_signature(&left, n), &path_signature(&right, n)).unwrap();
    let e = max_diff(&whole, &joined);
    ensure(e <= 1e-12 * scale_of(&[&whole]), || format!("Chen defect {e:e}"))
}

pub fn translation_and_refinement(seed: u64) -> Result<(), String> {
    let r = &mut rng(seed);
    let (d, n) = rand_shape(r);
    let p = rand_path(r, d, 4);
    let shift: Vec<f64> = (0..d).map(|_| r.random_range(-5.0..5.0)).collect();
    let moved = PiecewisePath::new(
        p.times().to_vec(),
        p.points().iter().map(|x| x.iter().zip(&shift).map(|(a, b)| a + b).collect()).collect(),
    )
    .unwrap();
    let s = path_signature(&p, n);
    let e = max_diff(&s, &path_signature(&moved, n));
    ensure(e <= 1e-12 * scale_of(&[&s]), || format!("translation defect {e:e}"))?;
    // insert a point on each segment
    let mut times = Vec::new();
    let mut pts: Vec<Vec<f64>> = Vec::new();
    for k in 0..p.times().len() - 1 {
        let a = r.random_range(0.1..0.9);
        times.push(p.times()[k]);
        pts.push(p.points()[k].clone());
        times.push(p.times()[k] + a * (p.times()[k + 1] - p.times()[k]));
        pts.push(p.points()[k].iter().zip(&p.points()[k + 1]).map(|(x, y)| x + a * (y - x)).collect());
    }
    times.push(*p.times().last().unwrap());
    pts.push(p.points().last().unwrap().clone());
    let fine = PiecewisePath::new(times, pts).unwrap();
    let e = max_diff(&s, &path_signature(&fine, n));
    ensure(e <= 1e-12 * scale_of(&[&s]), || format!("refinement defect {e:e}"))
}

/// With time as letter 1: `<e_{(1,..,1,k)}, sig> = (1/m!) ∫ s^m dX^k` for `m`
/// leading time letters, integrated exactly on each linear piece.
pub fn time_extension_formula(seed: u64) -> Result<(), String> {
    let r = &mut rng(seed);
    let d = r.random_range(1..=2usize);
    let m = r.random_range(0..=3usize);
    let len = r.random_range(2..=5);
    let p = rand_path(r, d, len);
    let e = time_extend(&p).unwrap();
    let s = path_signature(&e, m + 1);
    let t0 = p.times()[0];
    let mf: f64 = (1..=m).map(|k| k as f64).product();
    for k in 0..d {
        let mut integral = 0.0;
        for w in 0..p.times().len() - 1 {
            let (ta, tb) = (p.times()[w] - t0, p.times()[w + 1] - t0);
            let slope = (p.points()[w + 1][k] - p.points()[w][k]) / (tb - ta);
            integral += slope * (tb.powi(m as i32 + 1) - ta.powi(m as i32 + 1)) / (m + 1) as f64;
        }
        let mut letters = vec![1; m];
        letters.push(k + 2);
        let got = s.get(&Word::new(letters)).re;
        let want = integral / mf;
        ensure((got - want).abs() <= 1e-10 * want.abs().max(1.0), || {
            format!("m={m} k={k}: {got} vs {want}")
        })?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Operators

/// Random spec with symmetric diffusion characteristics on levels `<= depth`.
pub fn rand_spec(r: &mut ChaCha8Rng, d: usize, depth: usize) -> SdeSpec {
    let b = (0..d).map(|_| rand_tensor(r, d, depth, 0, depth).scale_real(0.5)).collect();
    let mut a = vec![vec![Tensor::zeros(d, depth); d]; d];
    for i in 0..d {
        for j in 0..=i {
            let t = rand_tensor(r, d, depth, 0, depth).scale_real(0.5);
            a[i][j] = t.clone();
            a[j][i] = t;
        }
    }
    SdeSpec::new(vec![0.0; d], b, a).unwrap()
}

pub fn affine_polynomial_identity(seed: u64) -> Result<(), String> {
    let r = &mut rng(seed);
    let d = r.random_range(1..=3usize);
    let n = r.random_range(2..=4usize);
    let cd = r.random_range(0..=n);
    let spec = rand_spec(r, d, cd);
    let u = rand_tensor(r, d, n, 0, n);
    let l = |x: &Tensor| l_op(x, &spec).unwrap();
    let uu = shuffle(&u, &u).unwrap();
    let lu = l(&u);
    let mut lhs = lu.clone();
    lhs.add_scaled(c(0.5), &l(&uu));
    lhs -= &shuffle(&u, &lu).unwrap();
    let rhs = r_op(&u, &spec).unwrap();
    let e = max_diff_upto(&lhs, &rhs, n - 2);
    ensure(e <= 1e-12 * scale_of(&[&rhs, &lhs]), || format!("d={d} N={n}: L/R identity defect {e:e}"))
}

pub fn l_linear(seed: u64) -> Result<(), String> {
    let r = &mut rng(seed);
    let (d, n) = rand_shape(r);
    let cd = r.random_range(0..=n);
    let spec = rand_spec(r, d, cd);
    let u = rand_tensor(r, d, n, 0, n);
    let v = rand_tensor(r, d, n, 0, n);
    let (al, be) = (rand_c(r), rand_c(r));
    let lhs = l_op(&(&(&u * al) + &(&v * be)), &spec).unwrap();
    let rhs = &(&l_op(&u, &spec).unwrap() * al) + &(&l_op(&v, &spec).unwrap() * be);
    let e = max_diff(&lhs, &rhs);
    ensure(e <= 1e-12 * scale_of(&[&lhs]), || format!("linearity defect {e:e}"))
}

pub fn lambda_mixing(seed: u64) -> Result<(), String> {
    let r = &mut rng(seed);
    let (d, n) = rand_shape(r);
    let cd = r.random_range(0..=n);
    let spec = rand_spec(r, d, cd);
    let u = rand_tensor(r, d, n, 0, n);
    let mut lam = r.random_range(-3.0..3.0);
    if (lam as f64).abs() < 0.2 || (lam - 1.0f64).abs() < 0.2 {
        lam = 2.0;
    }
    let lhs = l_from_r(&u, &spec, lam).unwrap();
    let rhs = l_op(&u, &spec).unwrap();
    let e = max_diff(&lhs, &rhs);
    ensure(e <= 1e-11 * scale_of(&[&rhs, &r_op(&u, &spec).unwrap()]), || {
        format!("λ={lam}: mixing defect {e:e}")
    })
}

pub fn exp_generator_relation(seed: u64) -> Result<(), String> {
    let r = &mut rng(seed);
    let d = r.random_range(1..=3usize);
    let n = r.random_range(2..=4usize);
    let cd = r.random_range(0..=n);
    let spec = rand_spec(r, d, cd);
    let u = rand_tensor(r, d, n, 0, n).scale_real(0.5);
    let e = shuffle_exp(&u);
    let lhs = l_op(&e, &spec).unwrap();
    let rhs = shuffle(&e, &r_op(&u, &spec).unwrap()).unwrap();
    let err = max_diff_upto(&lhs, &rhs, n - 2);
    ensure(err <= 1e-10 * scale_of(&[&lhs, &rhs]), || format!("L(exp u) defect {err:e}"))
}

/// Constant characteristics keep `T^2` invariant under `R`.
pub fn level_two_invariance(seed: u64) -> Result<(), String> {
    let r = &mut rng(seed);
    let d = r.random_range(1..=3usize);
    let n = r.random_range(3..=5usize);
    let spec = rand_spec(r, d, 0);
    let u = rand_tensor(r, d, n, 0, 2);
    let out = r_op(&u, &spec).unwrap();
    let above: f64 = (3..=n).flat_map(|l| out.level(l).iter().map(|x| x.norm())).fold(0.0, f64::max);
    ensure(above == 0.0, || format!("R leaves T^2: {above:e}"))
}

pub fn linear_matrix_columns(seed: u64) -> Result<(), String> {
    let r = &mut rng(seed);
    let d = r.random_range(1..=2usize);
    let n = r.random_range(1..=4usize);
    let mut spec = rand_spec(r, d, 2);
    for b in spec.b.iter_mut() {
        *b = b.truncated(1);
    }
    let g = linear_matrix(&spec, n).unwrap();
    let u = rand_tensor(r, d, n, 0, n);
    let gu = &g * nalgebra::DVector::from_column_slice(u.coeffs());
    let lu = l_op(&u, &spec).unwrap();
    let e = gu.iter().zip(lu.coeffs()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    ensure(e <= 1e-12 * lu.max_abs().max(1.0), || format!("G u vs L u: {e:e}"))
}

// ---------------------------------------------------------------------------
// Power series

fn rand_seq(r: &mut ChaCha8Rng, k: usize) -> Seq {
    Seq::new((0..=k).map(|_| rand_c(r)).collect()).unwrap()
}

fn rand_model(r: &mut ChaCha8Rng) -> Model1D {
    let kb = r.random_range(0..=4usize);
    let b = rand_seq(r, kb);
    let ka = r.random_range(0..=4usize);
    let a = rand_seq(r, ka);
    Model1D::new("random", b, a, 0.0, None).unwrap()
}

fn seq_diff(a: &Seq, b: &Seq) -> f64 {
    a.coeffs().iter().zip(b.coeffs()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

pub fn conv_polynomial_oracle(seed: u64) -> Result<(), String> {
    let r = &mut rng(seed);
    let k = r.random_range(0..=20usize);
    let u = rand_seq(r, k);
    let v = rand_seq(r, k);
    let w = conv(&u, &v).unwrap();
    // full product by schoolbook multiplication, then cut
    let mut full = vec![c(0.0); 2 * k + 1];
    for i in 0..=k {
        for j in 0..=k {
            full[i + j] += u.get(i) * v.get(j);
        }
    }
    let e = (0..=k).map(|n| (w.get(n) - full[n]).norm()).fold(0.0, f64::max);
    ensure(e < 1e-12, || format!("K={k}: convolution defect {e:e}"))
}

pub fn brackets_finite_difference(seed: u64) -> Result<(), String> {
    let r = &mut rng(seed);
    let k = r.random_range(2..=10usize);
    let u = rand_seq(r, k);
    let h = 1e-4;
    for _ in 0..5 {
        let x: f64 = r.random_range(-0.8..0.8);
        let d1 = (u.eval(x + h) - u.eval(x - h)) / (2.0 * h);
        let d2 = (u.eval(x + h) - u.eval(x) * 2.0 + u.eval(x - h)) / (h * h);
        let e1 = (bracket1(&u).eval(x) - d1).norm();
        let e2 = (bracket2(&u).eval(x) - d2).norm();
        let sc = d2.norm().max(1.0);
        ensure(e1 < 1e-6 * sc && e2 < 1e-5 * sc * 10.0, || format!("x={x}: {e1:e}, {e2:e}"))?;
    }
    Ok(())
}

pub fn factorial_duality(seed: u64) -> Result<(), String> {
    let r = &mut rng(seed);
    let k = r.random_range(0..=20usize);
    let u = rand_seq(r, k).to_power();
    let lhs = r_pow(&u, &bm()).to_factorial();
    let rhs = r_sig_brownian(&u.to_factorial());
    let e = seq_diff(&lhs, &rhs);
    ensure(e <= 1e-12 * rhs.max_abs().max(1.0), || format!("K={k}: basis change defect {e:e}"))
}

pub fn exp_star_oracle(seed: u64) -> Result<(), String> {
    let r = &mut rng(seed);
    let k = r.random_range(0..=20usize);
    let u = rand_seq(r, k).scale(c(0.5));
    let mut bar = u.clone();
    bar.coeffs_mut()[0] = c(0.0);
    let mut term = Seq::delta(0, k);
    let mut oracle = term.clone();
    for j in 1..=k {
        term = conv(&term, &bar).unwrap().scale(c(1.0 / j as f64));
        oracle = oracle.add(&term).unwrap();
    }
    let oracle = oracle.scale(u.get(0).exp());
    let got = exp_star(&u);
    let e = seq_diff(&got, &oracle);
    ensure(e <= 1e-12 * oracle.max_abs().max(1.0), || format!("K={k}: exp⋆ defect {e:e}"))?;
    let back = log_star(&got).unwrap();
    let e = seq_diff(&back, &u);
    ensure(e <= 1e-10, || format!("K={k}: log⋆ defect {e:e}"))
}

pub fn star_affine_polynomial_identity(seed: u64) -> Result<(), String> {
    let r = &mut rng(seed);
    let k = r.random_range(2..=20usize);
    let m = rand_model(r);
    let u = rand_seq(r, k).scale(c(0.3));
    let lu = l_pow(&u, &m);
    let lhs = lu
        .add(&l_pow(&conv(&u, &u).unwrap(), &m).scale(c(0.5)))
        .unwrap()
        .sub(&conv(&u, &lu).unwrap())
        .unwrap();
    let rhs = r_pow(&u, &m);
    let e = (0..=k - 2).map(|n| (lhs.get(n) - rhs.get(n)).norm()).fold(0.0, f64::max);
    ensure(e <= 1e-12 * rhs.max_abs().max(lhs.max_abs()).max(1.0), || format!("K={k}: ⋆ identity defect {e:e}"))
}

pub fn matrix_1d_columns(seed: u64) -> Result<(), String> {
    let r = &mut rng(seed);
    let m = rand_model(r);
    let k = 10;
    let g = linear_matrix_1d(&m, k);
    for j in 0..=k {
        let col = l_pow(&Seq::delta(j, k), &m);
        for i in 0..=k {
            ensure((g[(i, j)] - col.get(i)).norm() < 1e-12, || format!("G[{i},{j}]"))?;
        }
    }
    Ok(())
}

pub fn truncation_identity(seed: u64) -> Result<(), String> {
    let r = &mut rng(seed);
    let k = r.random_range(1..=20usize);
    let m = rand_model(r);
    let u = rand_seq(r, k);
    let small = r_pow(&u, &m);
    let big = r_pow(&u.resized(k + 5), &m).resized(k);
    let e = seq_diff(&small, &big);
    ensure(e <= 1e-12 * small.max_abs().max(1.0), || format!("K={k}: truncation defect {e:e}"))
}

// ---------------------------------------------------------------------------
// Schemes

pub fn mixture_weights_sum(seed: u64) -> Result<(), String> {
    let r = &mut rng(seed);
    let n = r.random_range(0..=200usize);
    let lam = r.random_range(0.0..=1.0);
    let s: f64 = mixture_weights(n, lam).iter().sum();
    ensure((s - 1.0).abs() < 1e-12, || format!("n={n} λ={lam}: Σ = {s}"))
}

pub fn matrix_exp_inverse(seed: u64) -> Result<(), String> {
    let r = &mut rng(seed);
    let g = DMatrix::from_fn(8, 8, |_, _| rand_c(r));
    let e = matrix_exp(&g, 1.0).unwrap();
    let f = matrix_exp(&g, -1.0).unwrap();
    let id = DMatrix::<C>::identity(8, 8);
    let err = (&e * &f - id).iter().map(|x| x.norm()).fold(0.0, f64::max);
    ensure(err < 1e-10, || format!("exp(G)exp(-G) - I = {err:e}"))
}

/// Every property with its name, for table-driven runners.
pub fn all_checks() -> Vec<(&'static str, Check)> {
    vec![
        ("shuffle commutativity", shuffle_commutative),
        ("shuffle associativity", shuffle_associative),
        ("concatenation laws", concat_laws),
        ("word shuffle vs interleavings", shuffle_words_bruteforce),
        ("symmetrization identity", symmetrization),
        ("shuffle exp/log round trip", exp_log_round_trip),
        ("shuffle exp homomorphism", exp_homomorphism),
        ("shift identities", shift_identities),
        ("dilation homomorphism", dilation_homomorphism),
        ("pairing multiplicativity", pairing_multiplicative),
        ("seminorm submultiplicativity", seminorm_submultiplicative),
        ("l1 bounds", l1_bounds),
        ("signature shuffle property", signature_shuffle_property),
        ("Chen identity", chen_identity),
        ("translation and refinement", translation_and_refinement),
        ("time-extension formula", time_extension_formula),
        ("affine/polynomial operator identity", affine_polynomial_identity),
        ("L linearity", l_linear),
        ("λ-mixing recovers L", lambda_mixing),
        ("L(exp u) = exp u ⧢ R(u)", exp_generator_relation),
        ("level-two invariance", level_two_invariance),
        ("linear matrix columns", linear_matrix_columns),
        ("convolution vs polynomial product", conv_polynomial_oracle),
        ("brackets vs finite differences", brackets_finite_difference),
        ("factorial basis duality", factorial_duality),
        ("exp⋆ and log⋆", exp_star_oracle),
        ("⋆ affine/polynomial identity", star_affine_polynomial_identity),
        ("1-d matrix columns", matrix_1d_columns),
        ("truncation identity", truncation_identity),
        ("mixture weights", mixture_weights_sum),
        ("matrix exponential inverse", matrix_exp_inverse),
    ]
}
