//! Truncated tensor algebra over `R^d` with complex coefficients.
//!
//! Elements are stored densely in level-major order: the empty word first,
//! then the `d` letters, then the `d^2` words of length two, and so on. Inside
//! a level, words are ranked lexicographically with the last letter varying
//! fastest, so appending letter `k` to a word of local rank `r` gives local
//! rank `r * d + (k - 1)`.
//!
//! All products silently drop levels above the truncation depth.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::Coefficients;

type C64 = Complex64;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Number of words of length at most `depth` over `dim` letters.
pub fn tensor_size(dim: usize, depth: usize) -> usize {
    level_offset(dim, depth + 1)
}

/// Rank of the first word of length `level`.
pub fn level_offset(dim: usize, level: usize) -> usize {
    if dim == 1 {
        return level;
    }
    (dim.pow(level as u32) - 1) / (dim - 1)
}

fn level_len(dim: usize, level: usize) -> usize {
    dim.pow(level as u32)
}

/// A word (multi-index) over the alphabet `{1..d}`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word(Vec<usize>);

impl Word {
    pub fn new(letters: impl Into<Vec<usize>>) -> Self {
        Word(letters.into())
    }

    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn letters(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn last(&self) -> Option<usize> {
        self.0.last().copied()
    }

    /// The word with its last letter removed (`I'`).
    pub fn prefix(&self) -> Word {
        let mut v = self.0.clone();
        v.pop();
        Word(v)
    }

    /// The word with its letters sorted (`I^ord`).
    pub fn sorted(&self) -> Word {
        let mut v = self.0.clone();
        v.sort_unstable();
        Word(v)
    }

    /// Product of the factorials of the letter multiplicities (`I!`).
    pub fn multiplicity_factorial(&self) -> f64 {
        let mut counts: HashMap<usize, usize> = HashMap::new();
        for &l in &self.0 {
            *counts.entry(l).or_default() += 1;
        }
        counts
            .values()
            .map(|&c| (1..=c).map(|k| k as f64).product::<f64>())
            .product()
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Word(v)
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        match self.0.iter().find(|&&l| l == 0 || l > dim) {
            Some(&letter) => Err(Error::LetterOutOfRange { letter, dim }),
            None => Ok(()),
        }
    }

    /// Comma separated letters; the empty word is the empty string.
    pub fn to_text(&self) -> String {
        self.0
            .iter()
            .map(|l| l.to_string())
            .collect::<Vec<_>>()
            .join(",")
    }

    pub fn parse(text: &str) -> Result<Word> {
        let text = text.trim();
        if text.is_empty() || text == "∅" {
            return Ok(Word::empty());
        }
        text.split(',')
            .map(|s| {
                s.trim().parse::<usize>().map_err(|e| Error::Parse {
                    line: 0,
                    msg: format!("bad letter {s:?}: {e}"),
                })
            })
            .collect::<Result<Vec<_>>>()
            .map(Word)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            write!(f, "∅")
        } else {
            write!(f, "({})", self.to_text())
        }
    }
}

impl From<&[usize]> for Word {
    fn from(v: &[usize]) -> Self {
        Word(v.to_vec())
    }
}

/// Level-major rank of `word` over an alphabet of size `dim`.
pub fn word_index(word: &Word, dim: usize) -> Result<usize> {
    word.validate(dim)?;
    let local = word.0.iter().fold(0usize, |acc, &l| acc * dim + (l - 1));
    Ok(level_offset(dim, word.len()) + local)
}

/// Inverse of [`word_index`].
pub fn index_word(index: usize, dim: usize) -> Word {
    let mut level = 0;
    while level_offset(dim, level + 1) <= index {
        level += 1;
    }
    let mut local = index - level_offset(dim, level);
    let mut letters = vec![0; level];
    for slot in letters.iter_mut().rev() {
        *slot = local % dim + 1;
        local /= dim;
    }
    Word(letters)
}

/// Partition of the words used by the semi-norms `|u|_x`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Partition {
    /// Every word is its own block.
    Singleton,
    /// Words are grouped by their sorted version.
    Ordered,
    /// Words are grouped by length.
    ByLevel,
}

impl Partition {
    pub fn is_shuffle_compatible(self) -> bool {
        !matches!(self, Partition::Singleton)
    }
}

/// A truncated element of the complexified tensor algebra `T^(N)(R^d)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Tensor {
    dim: usize,
    depth: usize,
    coeffs: Vec<C64>,
}

impl Tensor {
    pub fn zeros(dim: usize, depth: usize) -> Self {
        assert!(dim >= 1, "alphabet must have at least one letter");
        Tensor {
            dim,
            depth,
            coeffs: vec![ZERO; tensor_size(dim, depth)],
        }
    }

    /// The unit `e_∅`.
    pub fn unit(dim: usize, depth: usize) -> Self {
        Self::constant_term(ONE, dim, depth)
    }

    pub fn constant_term(c: C64, dim: usize, depth: usize) -> Self {
        let mut t = Self::zeros(dim, depth);
        t.coeffs[0] = c;
        t
    }

    /// The basis element `e_I`; zero when `|I| > depth`.
    pub fn basis(word: &Word, dim: usize, depth: usize) -> Result<Self> {
        let mut t = Self::zeros(dim, depth);
        t.set(word, ONE)?;
        Ok(t)
    }

    pub fn from_coeffs(dim: usize, depth: usize, coeffs: Vec<C64>) -> Result<Self> {
        let expected = tensor_size(dim, depth);
        if coeffs.len() != expected {
            return Err(Error::LengthMismatch(coeffs.len(), expected));
        }
        Ok(Tensor { dim, depth, coeffs })
    }

    pub fn from_words<I>(dim: usize, depth: usize, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Word, C64)>,
    {
        let mut t = Self::zeros(dim, depth);
        for (w, c) in entries {
            let idx = word_index(&w, dim)?;
            if w.len() <= depth {
                t.coeffs[idx] += c;
            }
        }
        Ok(t)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn same_shape(&self, other: &Tensor) -> bool {
        self.dim == other.dim && self.depth == other.depth
    }

    fn check_shape(&self, other: &Tensor) -> Result<()> {
        if self.same_shape(other) {
            Ok(())
        } else {
            Err(Error::ShapeMismatch(
                self.dim,
                self.depth,
                other.dim,
                other.depth,
            ))
        }
    }

    /// Coefficient of `word`; zero above the truncation.
    pub fn get(&self, word: &Word) -> C64 {
        if word.len() > self.depth {
            return ZERO;
        }
        match word_index(word, self.dim) {
            Ok(i) => self.coeffs[i],
            Err(_) => ZERO,
        }
    }

    /// Sets the coefficient of `word`; words above the truncation are ignored.
    pub fn set(&mut self, word: &Word, value: C64) -> Result<()> {
        let idx = word_index(word, self.dim)?;
        if word.len() <= self.depth {
            self.coeffs[idx] = value;
        }
        Ok(())
    }

    pub fn level(&self, n: usize) -> &[C64] {
        let start = level_offset(self.dim, n);
        &self.coeffs[start..start + level_len(self.dim, n)]
    }

    pub fn level_mut(&mut self, n: usize) -> &mut [C64] {
        let start = level_offset(self.dim, n);
        let len = level_len(self.dim, n);
        &mut self.coeffs[start..start + len]
    }

    /// Coefficients of levels `>= 1`, i.e. `u - u_∅ e_∅`.
    pub fn without_constant(&self) -> Tensor {
        let mut t = self.clone();
        t.coeffs[0] = ZERO;
        t
    }

    /// Same element at another truncation depth (truncating or zero-padding).
    pub fn resized(&self, depth: usize) -> Tensor {
        let mut t = Tensor::zeros(self.dim, depth);
        let n = t.coeffs.len().min(self.coeffs.len());
        t.coeffs[..n].copy_from_slice(&self.coeffs[..n]);
        t
    }

    /// Zeroes every level above `depth` while keeping the storage size.
    pub fn truncated(&self, depth: usize) -> Tensor {
        let mut t = self.clone();
        if depth < self.depth {
            let start = level_offset(self.dim, depth + 1);
            t.coeffs[start..].iter_mut().for_each(|c| *c = ZERO);
        }
        t
    }

    pub fn scale(&self, c: C64) -> Tensor {
        Tensor {
            dim: self.dim,
            depth: self.depth,
            coeffs: self.coeffs.iter().map(|&x| x * c).collect(),
        }
    }

    pub fn scale_real(&self, c: f64) -> Tensor {
        self.scale(C64::new(c, 0.0))
    }

    /// Nonzero entries as `(word, coefficient)` pairs in storage order.
    pub fn nonzero_words(&self) -> impl Iterator<Item = (Word, C64)> + '_ {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != ZERO)
            .map(move |(i, &c)| (index_word(i, self.dim), c))
    }

    /// Largest coefficient length of a nonzero word, if any.
    pub fn support_depth(&self) -> Option<usize> {
        (0..=self.depth)
            .rev()
            .find(|&n| self.level(n).iter().any(|c| *c != ZERO))
    }

    /// Writes the text format: one `word=... re=... im=...` line per nonzero
    /// word, preceded by a `# dim=.. depth=..` header.
    pub fn to_text(&self) -> String {
        let mut out = format!("# dim={} depth={}\n", self.dim, self.depth);
        out.push_str(&self.to_text_body());
        out
    }

    /// Text format without the header line.
    pub fn to_text_body(&self) -> String {
        let mut out = String::new();
        for (w, c) in self.nonzero_words() {
            out.push_str(&format!("word={} re={} im={}\n", w.to_text(), c.re, c.im));
        }
        out
    }

    /// Parses the text format. The header determines the shape when present;
    /// otherwise `dim` is required and the depth defaults to the longest word.
    pub fn parse_text(text: &str, dim: Option<usize>, depth: Option<usize>) -> Result<Tensor> {
        let mut header_dim = None;
        let mut header_depth = None;
        let mut entries = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                for tok in rest.split_whitespace() {
                    if let Some(v) = tok.strip_prefix("dim=") {
                        header_dim = Some(parse_usize(v, lineno)?);
                    } else if let Some(v) = tok.strip_prefix("depth=") {
                        header_depth = Some(parse_usize(v, lineno)?);
                    }
                }
                continue;
            }
            entries.push(parse_entry(line, lineno + 1)?);
        }
        let dim = header_dim.or(dim).ok_or(Error::Parse {
            line: 0,
            msg: "alphabet size unknown: add a `# dim=..` header".into(),
        })?;
        let longest = entries.iter().map(|(w, _)| w.len()).max().unwrap_or(0);
        let depth = header_depth.or(depth).unwrap_or(longest);
        Tensor::from_words(dim, depth, entries)
    }

    /// In-place `self += alpha * other`.
    pub fn add_scaled(&mut self, alpha: C64, other: &Tensor) {
        assert!(self.same_shape(other), "tensor shape mismatch");
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += alpha * b;
        }
    }
}

fn parse_usize(v: &str, line: usize) -> Result<usize> {
    v.parse().map_err(|e| Error::Parse {
        line,
        msg: format!("{e}"),
    })
}

fn parse_entry(line: &str, lineno: usize) -> Result<(Word, C64)> {
    let mut word = None;
    let mut re = 0.0;
    let mut im = 0.0;
    for tok in line.split_whitespace() {
        let bad = |msg: String| Error::Parse { line: lineno, msg };
        if let Some(v) = tok.strip_prefix("word=") {
            word = Some(Word::parse(v).map_err(|e| bad(e.to_string()))?);
        } else if let Some(v) = tok.strip_prefix("re=") {
            re = v.parse().map_err(|e| bad(format!("{e}")))?;
        } else if let Some(v) = tok.strip_prefix("im=") {
            im = v.parse().map_err(|e| bad(format!("{e}")))?;
        } else {
            return Err(bad(format!("unexpected token {tok:?}")));
        }
    }
    let word = word.ok_or(Error::Parse {
        line: lineno,
        msg: "missing word=".into(),
    })?;
    Ok((word, C64::new(re, im)))
}

impl Coefficients for Tensor {
    fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    fn coeffs_mut(&mut self) -> &mut [C64] {
        &mut self.coeffs
    }
}

impl Add for &Tensor {
    type Output = Tensor;
    fn add(self, rhs: &Tensor) -> Tensor {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Sub for &Tensor {
    type Output = Tensor;
    fn sub(self, rhs: &Tensor) -> Tensor {
        let mut out = self.clone();
        out -= rhs;
        out
    }
}

impl AddAssign<&Tensor> for Tensor {
    fn add_assign(&mut self, rhs: &Tensor) {
        self.add_scaled(ONE, rhs);
    }
}

impl SubAssign<&Tensor> for Tensor {
    fn sub_assign(&mut self, rhs: &Tensor) {
        self.add_scaled(-ONE, rhs);
    }
}

impl Mul<C64> for &Tensor {
    type Output = Tensor;
    fn mul(self, rhs: C64) -> Tensor {
        self.scale(rhs)
    }
}

impl Neg for &Tensor {
    type Output = Tensor;
    fn neg(self) -> Tensor {
        self.scale(-ONE)
    }
}

// ---------------------------------------------------------------------------
// Shuffle tables

/// `e_I ⧢ e_J` for every pair of words of lengths `p`, `q`, stored as a
/// compressed sparse list of `(local target rank, multiplicity)`.
struct ShuffleBlock {
    q_len: usize,
    offsets: Vec<u32>,
    targets: Vec<u32>,
    weights: Vec<f64>,
}

impl ShuffleBlock {
    fn entries(&self, i: usize, j: usize) -> (&[u32], &[f64]) {
        let pair = i * self.q_len + j;
        let (s, e) = (self.offsets[pair] as usize, self.offsets[pair + 1] as usize);
        (&self.targets[s..e], &self.weights[s..e])
    }
}

/// Shuffle products of all word pairs with `|I| + |J| <= depth`.
pub struct ShuffleTable {
    depth: usize,
    blocks: Vec<ShuffleBlock>,
}

fn block_slot(p: usize, q: usize) -> usize {
    let n = p + q;
    n * (n + 1) / 2 + p
}

impl ShuffleTable {
    fn build(dim: usize, depth: usize) -> Self {
        let mut blocks: Vec<ShuffleBlock> = Vec::with_capacity(block_slot(0, depth + 1));
        for n in 0..=depth {
            for p in 0..=n {
                let q = n - p;
                let (p_len, q_len) = (level_len(dim, p), level_len(dim, q));
                let mut offsets = Vec::with_capacity(p_len * q_len + 1);
                let mut targets = Vec::new();
                let mut weights = Vec::new();
                offsets.push(0u32);
                let mut scratch: Vec<(u32, f64)> = Vec::new();
                for i in 0..p_len {
                    for j in 0..q_len {
                        scratch.clear();
                        if p == 0 {
                            scratch.push((j as u32, 1.0));
                        } else if q == 0 {
                            scratch.push((i as u32, 1.0));
                        } else {
                            // e_I ⧢ e_J = (e_I' ⧢ e_J) e_{i_p} + (e_I ⧢ e_J') e_{j_q}
                            let left = &blocks[block_slot(p - 1, q)];
                            let (t, w) = left.entries(i / dim, j);
                            let letter = (i % dim) as u32;
                            scratch.extend(
                                t.iter().zip(w).map(|(&t, &w)| (t * dim as u32 + letter, w)),
                            );
                            let right = &blocks[block_slot(p, q - 1)];
                            let (t, w) = right.entries(i, j / dim);
                            let letter = (j % dim) as u32;
                            scratch.extend(
                                t.iter().zip(w).map(|(&t, &w)| (t * dim as u32 + letter, w)),
                            );
                            scratch.sort_unstable_by_key(|e| e.0);
                        }
                        let mut last: Option<u32> = None;
                        for &(t, w) in scratch.iter() {
                            if last == Some(t) {
                                *weights.last_mut().unwrap() += w;
                            } else {
                                targets.push(t);
                                weights.push(w);
                                last = Some(t);
                            }
                        }
                        offsets.push(targets.len() as u32);
                    }
                }
                blocks.push(ShuffleBlock {
                    q_len,
                    offsets,
                    targets,
                    weights,
                });
            }
        }
        ShuffleTable { depth, blocks }
    }

    fn block(&self, p: usize, q: usize) -> &ShuffleBlock {
        debug_assert!(p + q <= self.depth);
        &self.blocks[block_slot(p, q)]
    }
}

/// Shared shuffle table for `(dim, depth)`, built once on first use.
pub fn shuffle_table(dim: usize, depth: usize) -> Arc<ShuffleTable> {
    static TABLES: OnceLock<Mutex<HashMap<(usize, usize), Arc<ShuffleTable>>>> = OnceLock::new();
    let tables = TABLES.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = tables.lock().expect("shuffle table cache poisoned");
    guard
        .entry((dim, depth))
        .or_insert_with(|| Arc::new(ShuffleTable::build(dim, depth)))
        .clone()
}

/// Largest violation of `x_I x_J = <e_I ⧢ e_J, x>` over all pairs with
/// `|I| + |J| <= depth`, relative to `max(1, |x_I x_J|)`, together with the
/// deviation of `x_∅` from one.
pub fn shuffle_defect(x: &Tensor) -> f64 {
    let (dim, depth) = (x.dim, x.depth);
    let table = shuffle_table(dim, depth);
    let mut worst = (x.coeffs[0] - ONE).norm();
    for p in 0..=depth {
        for q in 0..=depth - p {
            let block = table.block(p, q);
            let target = x.level(p + q);
            for (i, &xi) in x.level(p).iter().enumerate() {
                for (j, &xj) in x.level(q).iter().enumerate() {
                    let (t, w) = block.entries(i, j);
                    let rhs: C64 = t.iter().zip(w).map(|(&t, &w)| target[t as usize] * w).sum();
                    let lhs = xi * xj;
                    worst = worst.max((lhs - rhs).norm() / lhs.norm().max(1.0));
                }
            }
        }
    }
    worst
}

/// `e_I ⧢ e_J` as an element of `T^(depth)`; zero if `|I| + |J| > depth`.
pub fn shuffle_words(i: &Word, j: &Word, dim: usize, depth: usize) -> Result<Tensor> {
    let a = Tensor::basis(i, dim, depth)?;
    let b = Tensor::basis(j, dim, depth)?;
    if i.len() + j.len() > depth {
        return Ok(Tensor::zeros(dim, depth));
    }
    shuffle(&a, &b)
}

/// Shuffle product, truncated at the common depth.
pub fn shuffle(a: &Tensor, b: &Tensor) -> Result<Tensor> {
    a.check_shape(b)?;
    let (dim, depth) = (a.dim, a.depth);
    let table = shuffle_table(dim, depth);
    let mut out = Tensor::zeros(dim, depth);
    for p in 0..=depth {
        let la = a.level(p);
        if la.iter().all(|c| *c == ZERO) {
            continue;
        }
        for q in 0..=depth - p {
            let lb = b.level(q);
            if lb.iter().all(|c| *c == ZERO) {
                continue;
            }
            let block = table.block(p, q);
            let off = level_offset(dim, p + q);
            for (i, &ai) in la.iter().enumerate() {
                if ai == ZERO {
                    continue;
                }
                for (j, &bj) in lb.iter().enumerate() {
                    if bj == ZERO {
                        continue;
                    }
                    let c = ai * bj;
                    let (targets, weights) = block.entries(i, j);
                    for (&t, &w) in targets.iter().zip(weights) {
                        out.coeffs[off + t as usize] += c * w;
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Concatenation (tensor) product, truncated at the common depth.
pub fn concat(a: &Tensor, b: &Tensor) -> Result<Tensor> {
    a.check_shape(b)?;
    let (dim, depth) = (a.dim, a.depth);
    let mut out = Tensor::zeros(dim, depth);
    for n in 0..=depth {
        let off = level_offset(dim, n);
        for k in 0..=n {
            let la = a.level(k);
            let lb = b.level(n - k);
            let stride = lb.len();
            for (i, &ai) in la.iter().enumerate() {
                if ai == ZERO {
                    continue;
                }
                let base = off + i * stride;
                for (j, &bj) in lb.iter().enumerate() {
                    out.coeffs[base + j] += ai * bj;
                }
            }
        }
    }
    Ok(out)
}

/// `u^{⧢k}` with `u^{⧢0} = e_∅`.
pub fn shuffle_power(u: &Tensor, k: usize) -> Tensor {
    let mut acc = Tensor::unit(u.dim, u.depth);
    for _ in 0..k {
        acc = shuffle(&acc, u).expect("same shape");
    }
    acc
}

/// Shuffle exponential `exp(u_∅) Σ_k ū^{⧢k}/k!`.
pub fn shuffle_exp(u: &Tensor) -> Tensor {
    let bar = u.without_constant();
    let mut term = Tensor::unit(u.dim, u.depth);
    let mut sum = term.clone();
    for k in 1..=u.depth {
        term = shuffle(&term, &bar).expect("same shape").scale_real(1.0 / k as f64);
        sum += &term;
    }
    sum.scale(u.coeffs[0].exp())
}

/// Shuffle logarithm `Σ_k (-1)^{k-1}/k ū^{⧢k}`, inverse of [`shuffle_exp`] on
/// elements with unit constant term.
pub fn shuffle_log(u: &Tensor) -> Result<Tensor> {
    let c0 = u.coeffs[0];
    if (c0 - ONE).norm() > 1e-10 {
        return Err(Error::NotUnitLevelZero(c0));
    }
    let bar = u.without_constant();
    let mut power = Tensor::unit(u.dim, u.depth);
    let mut sum = Tensor::zeros(u.dim, u.depth);
    for k in 1..=u.depth {
        power = shuffle(&power, &bar).expect("same shape");
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        sum.add_scaled(C64::new(sign / k as f64, 0.0), &power);
    }
    Ok(sum)
}

/// First shift `u^(1)`: component `k` collects `u_I e_{I'}` over words ending
/// in letter `k`. Components live at depth `N - 1`.
pub fn shift1(u: &Tensor) -> Vec<Tensor> {
    let dim = u.dim;
    let depth = u.depth.saturating_sub(1);
    let mut out = vec![Tensor::zeros(dim, depth); dim];
    for n in 1..=u.depth {
        for (w, &c) in u.level(n).iter().enumerate() {
            if c == ZERO {
                continue;
            }
            let k = w % dim;
            let target = level_offset(dim, n - 1) + w / dim;
            out[k].coeffs[target] += c;
        }
    }
    out
}

/// Second shift `u^(2)`: entry `(i, j)` collects `u_I e_{I''}` over words
/// ending in letters `i, j`. Entries live at depth `N - 2`.
pub fn shift2(u: &Tensor) -> Vec<Vec<Tensor>> {
    let dim = u.dim;
    let depth = u.depth.saturating_sub(2);
    let mut out = vec![vec![Tensor::zeros(dim, depth); dim]; dim];
    for n in 2..=u.depth {
        for (w, &c) in u.level(n).iter().enumerate() {
            if c == ZERO {
                continue;
            }
            let j = w % dim;
            let i = (w / dim) % dim;
            let target = level_offset(dim, n - 2) + w / (dim * dim);
            out[i][j].coeffs[target] += c;
        }
    }
    out
}

/// Dilation `d_λ`: level `n` scaled by `λ^n`.
pub fn dilate(u: &Tensor, lambda: f64) -> Tensor {
    let mut out = u.clone();
    let mut factor = 1.0;
    for n in 0..=u.depth {
        for c in out.level_mut(n) {
            *c *= factor;
        }
        factor *= lambda;
    }
    out
}

/// Bilinear pairing `Σ_I u_I x_I` over the levels both elements carry.
///
/// Panics if the alphabets differ.
pub fn pair(u: &Tensor, x: &Tensor) -> C64 {
    assert_eq!(u.dim, x.dim, "pairing needs a common alphabet");
    let n = u.coeffs.len().min(x.coeffs.len());
    u.coeffs[..n]
        .iter()
        .zip(&x.coeffs[..n])
        .map(|(a, b)| a * b)
        .sum()
}

fn partition_sum(u: Option<&Tensor>, x: &Tensor, partition: Partition, from_level: usize) -> f64 {
    let dim = x.dim;
    let depth = match u {
        Some(u) => {
            assert_eq!(u.dim, dim, "semi-norm needs a common alphabet");
            u.depth.min(x.depth)
        }
        None => x.depth,
    };
    let weight = |idx: usize| -> C64 {
        match u {
            Some(u) => u.coeffs[idx] * x.coeffs[idx],
            None => x.coeffs[idx],
        }
    };
    let mut total = 0.0;
    for n in from_level..=depth {
        let off = level_offset(dim, n);
        let len = level_len(dim, n);
        match partition {
            Partition::Singleton => {
                total += (0..len).map(|w| weight(off + w).norm()).sum::<f64>();
            }
            Partition::ByLevel => {
                total += (0..len).map(|w| weight(off + w)).sum::<C64>().norm();
            }
            Partition::Ordered => {
                let mut classes: HashMap<Word, C64> = HashMap::new();
                for w in 0..len {
                    let word = index_word(off + w, dim).sorted();
                    *classes.entry(word).or_insert(ZERO) += weight(off + w);
                }
                total += classes.values().map(|c| c.norm()).sum::<f64>();
            }
        }
    }
    total
}

/// Truncated semi-norm `|u|_x = Σ_k |Σ_{I∈Π_k} u_I x_I|`.
pub fn seminorm(u: &Tensor, x: &Tensor, partition: Partition) -> f64 {
    partition_sum(Some(u), x, partition, 0)
}

/// Truncated `|x|_{ℓ¹} = Σ_k |Σ_{I∈Π_k} x_I|`; the empty word only counts
/// when `include_empty` is set.
pub fn l1_norm(x: &Tensor, partition: Partition, include_empty: bool) -> f64 {
    partition_sum(None, x, partition, if include_empty { 0 } else { 1 })
}
