//! Noncommutative polynomials in selfadjoint indeterminates `X_1..X_d`,
//! their noncommutative and cyclic derivatives, matrix evaluation, and a
//! Monte Carlo check of the Schwinger–Dyson equation for GUE tuples.
//!
//! Text form: terms `re+imi * x1.x2.x1` joined by ` + `, the empty word is
//! written `1` and the zero polynomial `0`. Floats use the shortest
//! round-trip representation, so parsing a printed polynomial is bit-exact.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use num_complex::Complex;

use crate::error::{GlbmError, Result};
use crate::matrix::Matrix;
use crate::montecarlo::parallel_mc_all;
use crate::sampling::sample_gue;
use crate::scalar::{cone, creal, czero, Real};
use crate::stats::MeanSe;

/// Word over indeterminate indices `1..=d`.
pub type Word = Vec<usize>;

/// Polynomial `Σ c_w X_w` with words in lexicographic order and no zero
/// coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct NCPoly<T: Real> {
    nvars: usize,
    terms: BTreeMap<Word, Complex<T>>,
}

/// Element of `P_d ⊗ P_d`: `Σ c (A ⊗ B)` keyed by `(A, B)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorPoly<T: Real> {
    nvars: usize,
    terms: BTreeMap<(Word, Word), Complex<T>>,
}

fn check_word(word: &[usize], nvars: usize) -> Result<()> {
    if let Some(bad) = word.iter().find(|i| **i == 0 || **i > nvars) {
        return Err(GlbmError::invalid(format!("index {bad} outside 1..={nvars}")));
    }
    Ok(())
}

fn accumulate<K: Ord, T: Real>(map: &mut BTreeMap<K, Complex<T>>, key: K, coef: Complex<T>) {
    if coef == czero() {
        return;
    }
    let entry = map.entry(key);
    match entry {
        std::collections::btree_map::Entry::Vacant(v) => {
            v.insert(coef);
        }
        std::collections::btree_map::Entry::Occupied(mut o) => {
            let sum = *o.get() + coef;
            if sum == czero() {
                o.remove();
            } else {
                *o.get_mut() = sum;
            }
        }
    }
}

impl<T: Real> NCPoly<T> {
    pub fn zero(nvars: usize) -> Self {
        Self { nvars, terms: BTreeMap::new() }
    }

    /// The constant `1`.
    pub fn one(nvars: usize) -> Self {
        Self::constant(nvars, cone())
    }

    pub fn constant(nvars: usize, coef: Complex<T>) -> Self {
        let mut p = Self::zero(nvars);
        accumulate(&mut p.terms, Vec::new(), coef);
        p
    }

    /// The indeterminate `X_i`.
    pub fn var(nvars: usize, i: usize) -> Result<Self> {
        Self::monomial(nvars, cone(), vec![i])
    }

    pub fn monomial(nvars: usize, coef: Complex<T>, word: Word) -> Result<Self> {
        check_word(&word, nvars)?;
        let mut p = Self::zero(nvars);
        accumulate(&mut p.terms, word, coef);
        Ok(p)
    }

    /// Builds a polynomial from `(coefficient, word)` pairs, merging repeats.
    pub fn from_terms(nvars: usize, terms: impl IntoIterator<Item = (Complex<T>, Word)>) -> Result<Self> {
        let mut p = Self::zero(nvars);
        for (coef, word) in terms {
            check_word(&word, nvars)?;
            accumulate(&mut p.terms, word, coef);
        }
        Ok(p)
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Word, &Complex<T>)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, word: &[usize]) -> Complex<T> {
        self.terms.get(word).copied().unwrap_or_else(czero)
    }

    /// Highest word length (0 for constants and for the zero polynomial).
    pub fn degree(&self) -> usize {
        self.terms.keys().map(|w| w.len()).max().unwrap_or(0)
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut p = Self { nvars: self.nvars.max(other.nvars), terms: self.terms.clone() };
        for (w, c) in &other.terms {
            accumulate(&mut p.terms, w.clone(), *c);
        }
        p
    }

    pub fn scale(&self, s: Complex<T>) -> Self {
        let mut p = Self::zero(self.nvars);
        for (w, c) in &self.terms {
            accumulate(&mut p.terms, w.clone(), *c * s);
        }
        p
    }

    /// Concatenation product.
    pub fn mul(&self, other: &Self) -> Self {
        let mut p = Self::zero(self.nvars.max(other.nvars));
        for (a, ca) in &self.terms {
            for (b, cb) in &other.terms {
                let mut w = a.clone();
                w.extend_from_slice(b);
                accumulate(&mut p.terms, w, *ca * cb);
            }
        }
        p
    }

    /// `P ⊗ 1`.
    pub fn tensor_one(&self) -> TensorPoly<T> {
        let mut t = TensorPoly::zero(self.nvars);
        for (w, c) in &self.terms {
            accumulate(&mut t.terms, (w.clone(), Vec::new()), *c);
        }
        t
    }

    /// `1 ⊗ P`.
    pub fn one_tensor(&self) -> TensorPoly<T> {
        let mut t = TensorPoly::zero(self.nvars);
        for (w, c) in &self.terms {
            accumulate(&mut t.terms, (Vec::new(), w.clone()), *c);
        }
        t
    }
}

impl<T: Real> TensorPoly<T> {
    pub fn zero(nvars: usize) -> Self {
        Self { nvars, terms: BTreeMap::new() }
    }

    pub fn from_terms(nvars: usize, terms: impl IntoIterator<Item = (Complex<T>, Word, Word)>) -> Result<Self> {
        let mut t = Self::zero(nvars);
        for (c, a, b) in terms {
            check_word(&a, nvars)?;
            check_word(&b, nvars)?;
            accumulate(&mut t.terms, (a, b), c);
        }
        Ok(t)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(Word, Word), &Complex<T>)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, left: &[usize], right: &[usize]) -> Complex<T> {
        self.terms.get(&(left.to_vec(), right.to_vec())).copied().unwrap_or_else(czero)
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut t = Self { nvars: self.nvars.max(other.nvars), terms: self.terms.clone() };
        for (k, c) in &other.terms {
            accumulate(&mut t.terms, k.clone(), *c);
        }
        t
    }

    /// Product in `P_d ⊗ P_d`: `(A⊗B)(C⊗D) = AC ⊗ BD`.
    pub fn mul(&self, other: &Self) -> Self {
        let mut t = Self::zero(self.nvars.max(other.nvars));
        for ((a, b), c1) in &self.terms {
            for ((cw, dw), c2) in &other.terms {
                let mut l = a.clone();
                l.extend_from_slice(cw);
                let mut r = b.clone();
                r.extend_from_slice(dw);
                accumulate(&mut t.terms, (l, r), *c1 * c2);
            }
        }
        t
    }

    /// `m(A ⊗ B) = BA`.
    pub fn flip_multiply(&self) -> NCPoly<T> {
        let mut p = NCPoly::zero(self.nvars);
        for ((a, b), c) in &self.terms {
            let mut w = b.clone();
            w.extend_from_slice(a);
            accumulate(&mut p.terms, w, *c);
        }
        p
    }
}

/// `∂_i P = Σ_{M = A X_i B} c_M · A ⊗ B`.
pub fn nc_derivative<T: Real>(p: &NCPoly<T>, i: usize) -> Result<TensorPoly<T>> {
    if i == 0 || i > p.nvars {
        return Err(GlbmError::invalid(format!("index {i} outside 1..={}", p.nvars)));
    }
    let mut t = TensorPoly::zero(p.nvars);
    for (w, c) in &p.terms {
        for (k, x) in w.iter().enumerate() {
            if *x == i {
                accumulate(&mut t.terms, (w[..k].to_vec(), w[k + 1..].to_vec()), *c);
            }
        }
    }
    Ok(t)
}

/// `D_i P = m ∘ ∂_i P` with `m(A ⊗ B) = BA`.
pub fn cyclic_derivative<T: Real>(p: &NCPoly<T>, i: usize) -> Result<NCPoly<T>> {
    Ok(nc_derivative(p, i)?.flip_multiply())
}

fn check_mats<T: Real>(nvars: usize, mats: &[Matrix<T>]) -> Result<usize> {
    if mats.len() < nvars {
        return Err(GlbmError::DimensionMismatch {
            expected: format!("{nvars} matrices"),
            found: format!("{}", mats.len()),
        });
    }
    let n = mats.first().map_or(0, |m| m.rows());
    if mats.iter().any(|m| !m.is_square() || m.rows() != n) {
        return Err(GlbmError::DimensionMismatch {
            expected: format!("square {n}x{n} matrices"),
            found: "mixed shapes".into(),
        });
    }
    if n == 0 {
        return Err(GlbmError::invalid("matrices must be nonempty"));
    }
    Ok(n)
}

/// Word products with prefix sharing.
struct WordEvaluator<'a, T: Real> {
    mats: &'a [Matrix<T>],
    n: usize,
    cache: HashMap<Word, Matrix<T>>,
}

impl<'a, T: Real> WordEvaluator<'a, T> {
    fn new(mats: &'a [Matrix<T>], n: usize) -> Self {
        Self { mats, n, cache: HashMap::new() }
    }

    fn product(&mut self, word: &[usize]) -> Matrix<T> {
        if word.is_empty() {
            return Matrix::identity(self.n);
        }
        if let Some(m) = self.cache.get(word) {
            return m.clone();
        }
        let m = if word.len() == 1 {
            self.mats[word[0] - 1].clone()
        } else {
            let prefix = self.product(&word[..word.len() - 1]);
            prefix.matmul(&self.mats[word[word.len() - 1] - 1])
        };
        self.cache.insert(word.to_vec(), m.clone());
        m
    }

    fn ts(&mut self, word: &[usize]) -> Complex<T> {
        if word.is_empty() {
            return cone();
        }
        if word.len() == 1 {
            return self.mats[word[0] - 1].normalized_trace();
        }
        let prefix = self.product(&word[..word.len() - 1]);
        prefix.ts_product(&self.mats[word[word.len() - 1] - 1])
    }
}

/// `P(X_1, …, X_d)` with words multiplied left to right.
pub fn eval_poly<T: Real>(p: &NCPoly<T>, mats: &[Matrix<T>]) -> Result<Matrix<T>> {
    let n = check_mats(p.nvars, mats)?;
    let mut ev = WordEvaluator::new(mats, n);
    let mut out = Matrix::zeros(n, n);
    for (w, c) in &p.terms {
        let m = ev.product(w);
        out.axpy(*c, &m);
    }
    Ok(out)
}

/// `ts_N(X_i · P(X))` without forming the final product.
pub fn ts_left_product<T: Real>(i: usize, p: &NCPoly<T>, mats: &[Matrix<T>]) -> Result<Complex<T>> {
    check_mats(p.nvars.max(i), mats)?;
    let q = eval_poly(p, mats)?;
    Ok(mats[i - 1].ts_product(&q))
}

/// `Σ c · ts_N(A(X)) · ts_N(B(X))`.
pub fn eval_tensor_tstrace<T: Real>(t: &TensorPoly<T>, mats: &[Matrix<T>]) -> Result<Complex<T>> {
    let n = check_mats(t.nvars, mats)?;
    let mut ev = WordEvaluator::new(mats, n);
    let mut traces: HashMap<Word, Complex<T>> = HashMap::new();
    let mut acc = czero::<T>();
    for ((a, b), c) in &t.terms {
        let ta = match traces.get(a) {
            Some(v) => *v,
            None => {
                let v = ev.ts(a);
                traces.insert(a.clone(), v);
                v
            }
        };
        let tb = match traces.get(b) {
            Some(v) => *v,
            None => {
                let v = ev.ts(b);
                traces.insert(b.clone(), v);
                v
            }
        };
        acc += *c * ta * tb;
    }
    Ok(acc)
}

/// Mean and standard error of a complex sample (componentwise errors
/// combined in quadrature).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexMeanSe {
    pub mean: Complex<f64>,
    pub se: f64,
}

impl ComplexMeanSe {
    fn from_samples(xs: &[Complex<f64>]) -> Self {
        let re: Vec<f64> = xs.iter().map(|z| z.re).collect();
        let im: Vec<f64> = xs.iter().map(|z| z.im).collect();
        let (r, i) = (MeanSe::from_slice(&re), MeanSe::from_slice(&im));
        Self { mean: Complex::new(r.mean, i.mean), se: r.se.hypot(i.se) }
    }
}

/// Both sides of `E ts(X_i Q(X)) = E ts⊗ts(∂_i Q(X))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SdCheck {
    pub lhs: ComplexMeanSe,
    pub rhs: ComplexMeanSe,
    pub trials: usize,
}

impl SdCheck {
    /// `sqrt(se_lhs² + se_rhs²)`.
    pub fn combined_se(&self) -> f64 {
        self.lhs.se.hypot(self.rhs.se)
    }

    /// `|lhs − rhs| ≤ k·combined_se`.
    pub fn agrees(&self, k: f64) -> bool {
        (self.lhs.mean - self.rhs.mean).norm() <= k * self.combined_se()
    }
}

/// Monte Carlo Schwinger–Dyson check over independent GUE(1) `d`-tuples;
/// trial `j` uses stream `(seed, j)`.
pub fn sd_check(q: &NCPoly<f64>, i: usize, n: usize, trials: usize, seed: u64, workers: usize) -> Result<SdCheck> {
    if n < 2 || trials < 2 {
        return Err(GlbmError::invalid("sd_check needs N ≥ 2 and at least 2 trials"));
    }
    let d = q.nvars.max(i);
    let dq = nc_derivative(&NCPoly { nvars: d, terms: q.terms.clone() }, i)?;
    let pairs = parallel_mc_all(seed, trials, workers, |_, rng| {
        let mats = (0..d).map(|_| sample_gue::<f64>(n, 1.0, rng)).collect::<Result<Vec<_>>>()?;
        let lhs = ts_left_product(i, q, &mats)?;
        let rhs = eval_tensor_tstrace(&dq, &mats)?;
        Ok((lhs, rhs))
    })?;
    let lhs: Vec<Complex<f64>> = pairs.iter().map(|p| p.0).collect();
    let rhs: Vec<Complex<f64>> = pairs.iter().map(|p| p.1).collect();
    Ok(SdCheck { lhs: ComplexMeanSe::from_samples(&lhs), rhs: ComplexMeanSe::from_samples(&rhs), trials })
}

fn fmt_coef<T: Real>(c: &Complex<T>) -> String {
    let sign = if c.im.is_sign_negative() { '-' } else { '+' };
    format!("{:?}{}{:?}i", c.re, sign, c.im.abs())
}

fn fmt_word(w: &[usize]) -> String {
    if w.is_empty() {
        return "1".into();
    }
    w.iter().map(|i| format!("x{i}")).collect::<Vec<_>>().join(".")
}

impl<T: Real> fmt::Display for NCPoly<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self.terms.iter().map(|(w, c)| format!("{} * {}", fmt_coef(c), fmt_word(w))).collect();
        write!(f, "{}", parts.join(" + "))
    }
}

impl<T: Real> fmt::Display for TensorPoly<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|((a, b), c)| format!("{} * {} (x) {}", fmt_coef(c), fmt_word(a), fmt_word(b)))
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

fn parse_coef<T: Real>(s: &str) -> Result<Complex<T>> {
    let bad = || GlbmError::Parse(format!("bad coefficient {s:?}"));
    let body = s.strip_suffix('i').ok_or_else(bad)?;
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'))
        .ok_or_else(bad)?;
    let re = T::from_str(&body[..split]).map_err(|_| bad())?;
    let im_abs = T::from_str(&body[split + 1..]).map_err(|_| bad())?;
    let im = if bytes[split] == b'-' { -im_abs } else { im_abs };
    Ok(Complex::new(re, im))
}

fn parse_word(s: &str) -> Result<Word> {
    if s == "1" {
        return Ok(Vec::new());
    }
    s.split('.')
        .map(|tok| {
            tok.strip_prefix('x')
                .and_then(|d| d.parse::<usize>().ok())
                .filter(|i| *i > 0)
                .ok_or_else(|| GlbmError::Parse(format!("bad indeterminate {tok:?}")))
        })
        .collect()
}

impl<T: Real> NCPoly<T> {
    /// Parses the text form; `nvars` bounds the admissible indices.
    pub fn parse(s: &str, nvars: usize) -> Result<Self> {
        let s = s.trim();
        if s == "0" {
            return Ok(Self::zero(nvars));
        }
        let mut p = Self::zero(nvars);
        for term in s.split(" + ") {
            let (coef, word) = term
                .split_once(" * ")
                .ok_or_else(|| GlbmError::Parse(format!("bad term {term:?}")))?;
            let word = parse_word(word.trim())?;
            check_word(&word, nvars).map_err(|e| GlbmError::Parse(e.to_string()))?;
            let c = parse_coef::<T>(coef.trim())?;
            if p.terms.contains_key(&word) {
                return Err(GlbmError::Parse(format!("duplicate word {}", fmt_word(&word))));
            }
            accumulate(&mut p.terms, word, c);
        }
        Ok(p)
    }
}

impl<T: Real> FromStr for NCPoly<T> {
    type Err = GlbmError;

    /// Parses with `d` set to the largest index that appears.
    fn from_str(s: &str) -> Result<Self> {
        let p = Self::parse(s, usize::MAX)?;
        let d = p.terms.keys().flatten().copied().max().unwrap_or(0);
        Ok(Self { nvars: d.max(1), terms: p.terms })
    }
}

/// `Σ_k c_k X_1^k`-style helper: `c·X_i^k`.
pub fn power<T: Real>(nvars: usize, i: usize, k: usize, coef: T) -> Result<NCPoly<T>> {
    NCPoly::monomial(nvars, creal(coef), vec![i; k])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::c;
    use proptest::prelude::*;

    fn x(i: usize) -> NCPoly<f64> {
        NCPoly::var(2, i).unwrap()
    }

    #[test]
    fn derivative_examples() {
        let d = nc_derivative(&x(1), 1).unwrap();
        assert_eq!(d, TensorPoly::from_terms(2, [(c(1.0, 0.0), vec![], vec![])]).unwrap());
        let d = nc_derivative(&x(1).mul(&x(1)), 1).unwrap();
        let expect = TensorPoly::from_terms(2, [(c(1.0, 0.0), vec![], vec![1]), (c(1.0, 0.0), vec![1], vec![])]).unwrap();
        assert_eq!(d, expect);
        assert!(nc_derivative(&x(2), 1).unwrap().is_zero());
        assert!(nc_derivative(&x(2), 3).is_err());
        assert!(nc_derivative(&x(2), 0).is_err());
    }

    #[test]
    fn cyclic_examples() {
        let d = cyclic_derivative(&x(1).mul(&x(1)), 1).unwrap();
        assert_eq!(d, x(1).scale(c(2.0, 0.0)));
        let m = x(2).mul(&x(1)).mul(&x(2));
        assert_eq!(cyclic_derivative(&m, 1).unwrap(), x(2).mul(&x(2)));
        assert!(cyclic_derivative(&x(2), 1).unwrap().is_zero());
    }

    #[test]
    fn canonical_form() {
        let p = NCPoly::from_terms(2, [(c(1.0, 0.0), vec![1, 2]), (c(-1.0, 0.0), vec![1, 2]), (c(2.0, 0.0), vec![2])]).unwrap();
        assert_eq!(p.len(), 1);
        assert_eq!(p.coefficient(&[2]), c(2.0, 0.0));
        assert!(NCPoly::<f64>::monomial(2, c(1.0, 0.0), vec![3]).is_err());
    }

    #[test]
    fn evaluation_examples() {
        let id = Matrix::<f64>::identity(3);
        assert_eq!(eval_poly(&NCPoly::var(1, 1).unwrap(), std::slice::from_ref(&id)).unwrap(), id);
        let one = TensorPoly::<f64>::from_terms(1, [(c(1.0, 0.0), vec![], vec![])]).unwrap();
        assert_eq!(eval_tensor_tstrace(&one, std::slice::from_ref(&id)).unwrap(), c(1.0, 0.0));
        let a = Matrix::from_rows(&[vec![c(1.0, 0.0), c(2.0, 0.0)], vec![c(0.0, 0.0), c(1.0, 0.0)]]).unwrap();
        let b = Matrix::from_rows(&[vec![c(0.0, 0.0), c(1.0, 0.0)], vec![c(1.0, 0.0), c(0.0, 0.0)]]).unwrap();
        let p = x(1).mul(&x(2));
        let got = eval_poly(&p, &[a.clone(), b.clone()]).unwrap();
        let expect = Matrix::from_rows(&[vec![c(2.0, 0.0), c(1.0, 0.0)], vec![c(1.0, 0.0), c(0.0, 0.0)]]).unwrap();
        assert_eq!(got, expect);
        // ts(A)·ts(B) for A ⊗ B
        let t = TensorPoly::from_terms(2, [(c(3.0, 0.0), vec![1], vec![2])]).unwrap();
        assert_eq!(eval_tensor_tstrace(&t, &[a, b]).unwrap(), c(0.0, 0.0));
        assert!(eval_poly(&p, &[id]).is_err());
    }

    #[test]
    fn text_round_trip_examples() {
        let p = NCPoly::from_terms(2, [(c(1.0, 0.0), vec![1, 2, 1]), (c(-0.5, -0.0), vec![]), (c(1e-7, 3.25), vec![2])]).unwrap();
        let s = p.to_string();
        assert!(s.contains("1.0+0.0i * x1.x2.x1"), "{s}");
        assert!(s.contains("-0.5-0.0i * 1"), "{s}");
        let q = NCPoly::<f64>::parse(&s, 2).unwrap();
        assert_eq!(q, p);
        for ((w1, c1), (w2, c2)) in p.terms().zip(q.terms()) {
            assert_eq!(w1, w2);
            assert_eq!((c1.re.to_bits(), c1.im.to_bits()), (c2.re.to_bits(), c2.im.to_bits()));
        }
        assert_eq!(NCPoly::<f64>::zero(2).to_string(), "0");
        assert!(NCPoly::<f64>::parse("0", 2).unwrap().is_zero());
        assert!(NCPoly::<f64>::parse("1.0+0.0i * x3", 2).is_err());
        assert!(NCPoly::<f64>::parse("garbage", 2).is_err());
        let r: NCPoly<f64> = "2.0+0.0i * x1.x3".parse().unwrap();
        assert_eq!(r.nvars(), 3);
    }

    #[test]
    fn trivial_sd_cases() {
        let one = NCPoly::<f64>::one(1);
        let r = sd_check(&one, 1, 8, 50, 3, 1).unwrap();
        assert_eq!(r.rhs.mean, c(0.0, 0.0));
        assert!(r.lhs.mean.norm() <= 4.0 * r.lhs.se);
        let x1 = NCPoly::<f64>::var(1, 1).unwrap();
        let r = sd_check(&x1, 1, 8, 200, 4, 1).unwrap();
        assert_eq!(r.rhs.mean, c(1.0, 0.0));
        assert_eq!(r.rhs.se, 0.0);
        assert!((r.lhs.mean - c(1.0, 0.0)).norm() <= 4.0 * r.lhs.se);
    }

    fn small_poly() -> impl Strategy<Value = NCPoly<f64>> {
        prop::collection::vec((-3i32..=3, -2i32..=2, prop::collection::vec(1usize..=2, 0..4)), 0..5).prop_map(|ts| {
            NCPoly::from_terms(2, ts.into_iter().map(|(re, im, w)| (c(re as f64, im as f64), w))).unwrap()
        })
    }

    proptest! {
        #[test]
        fn leibniz_rule(p in small_poly(), q in small_poly(), i in 1usize..=2) {
            let lhs = nc_derivative(&p.mul(&q), i).unwrap();
            let rhs = nc_derivative(&p, i).unwrap().mul(&q.one_tensor())
                .add(&p.tensor_one().mul(&nc_derivative(&q, i).unwrap()));
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn derivative_degree_drops_by_one(p in small_poly(), i in 1usize..=2) {
            let d = nc_derivative(&p, i).unwrap();
            for ((a, b), _) in d.terms() {
                prop_assert!(p.terms().any(|(w, _)| w.len() == a.len() + b.len() + 1));
            }
            for (w, c) in p.terms() {
                let occurrences = w.iter().filter(|x| **x == i).count();
                if occurrences > 0 && *c != czero() {
                    prop_assert!(d.terms().any(|((a, b), _)| a.len() + b.len() + 1 == w.len()));
                }
            }
        }

        #[test]
        fn text_round_trip(p in small_poly(), s in -1e6f64..1e6) {
            let p = p.scale(c(s, -s / 3.0));
            let q = NCPoly::<f64>::parse(&p.to_string(), 2).unwrap();
            prop_assert_eq!(q, p);
        }
    }
}
