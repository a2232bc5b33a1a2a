//! Arbitrary-precision numerical oracle.
//!
//! Multiple zeta values are evaluated by the Hölder convolution at 1/2, so
//! every sub-series converges geometrically like 2^{-k}; multiple
//! polylogarithms by power series with a proven coefficient bound |c_n| <= 1
//! (hence an explicit tail bound); the dilogarithm is extended to the closed
//! unit disk by the Landen, reflection and duplication transformations. The
//! period homomorphism sends L to 2πi, log(p) to log p, and words to their
//! regularized iterated integrals.
//!
//! Precision contract: values requested at `prec` decimal digits are correct
//! to at least `prec - 5` digits; internal arithmetic carries guard bits.

use std::cell::RefCell;
use std::fmt;

use astro_float::{BigFloat, Consts, RoundingMode};

use crate::exact::Rat;
use crate::motivic::{MotGen, MotivicExpr};
use crate::words::Word;

const RM: RoundingMode = RoundingMode::ToEven;

/// Evaluation errors.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EvalError {
    Divergent(String),
    OutOfDomain(String),
    Unevaluable(String),
}

impl fmt::Display for EvalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EvalError::Divergent(s) => write!(f, "divergent: {}", s),
            EvalError::OutOfDomain(s) => write!(f, "out of domain: {}", s),
            EvalError::Unevaluable(s) => write!(f, "unevaluable: {}", s),
        }
    }
}

impl std::error::Error for EvalError {}

/// Precision context: requested decimal digits plus working guard bits and a
/// shared constants cache. Passed explicitly, never global.
pub struct Ctx {
    pub digits: usize,
    bits: usize,
    cc: RefCell<Consts>,
}

impl Ctx {
    pub fn new(digits: usize) -> Self {
        let digits = digits.clamp(10, 250);
        // log2(10) ≈ 3.3220 plus generous guard bits
        let bits = digits * 3322 / 1000 + 96;
        Ctx { digits, bits, cc: RefCell::new(Consts::new().expect("constants cache")) }
    }

    pub fn zero(&self) -> Real {
        Real(BigFloat::from_i64(0, self.bits))
    }

    pub fn one(&self) -> Real {
        Real(BigFloat::from_i64(1, self.bits))
    }

    pub fn from_i64(&self, v: i64) -> Real {
        Real(BigFloat::from_i64(v, self.bits))
    }

    pub fn from_rat(&self, r: &Rat) -> Real {
        let num = BigFloat::parse(
            &r.numer().to_string(),
            astro_float::Radix::Dec,
            self.bits,
            RM,
            &mut self.cc.borrow_mut(),
        );
        let den = BigFloat::parse(
            &r.denom().to_string(),
            astro_float::Radix::Dec,
            self.bits,
            RM,
            &mut self.cc.borrow_mut(),
        );
        Real(num.div(&den, self.bits, RM))
    }

    pub fn pi(&self) -> Real {
        Real(self.cc.borrow_mut().pi(self.bits, RM))
    }

    pub fn ln2(&self) -> Real {
        Real(self.cc.borrow_mut().ln_2(self.bits, RM))
    }

    /// log of a positive integer.
    pub fn ln_u64(&self, n: u64) -> Real {
        assert!(n > 0);
        self.from_i64(n as i64).ln(self)
    }

    /// 10^(-k) as a comparison threshold.
    pub fn pow10_neg(&self, k: usize) -> Real {
        let ten = self.from_i64(10);
        let mut acc = self.one();
        for _ in 0..k {
            acc = acc.div(&ten, self);
        }
        acc
    }
}

/// Arbitrary-precision real number tied to a [`Ctx`].
#[derive(Clone, Debug)]
pub struct Real(BigFloat);

impl Real {
    pub fn add(&self, o: &Real, cx: &Ctx) -> Real {
        Real(self.0.add(&o.0, cx.bits, RM))
    }

    pub fn sub(&self, o: &Real, cx: &Ctx) -> Real {
        Real(self.0.sub(&o.0, cx.bits, RM))
    }

    pub fn mul(&self, o: &Real, cx: &Ctx) -> Real {
        Real(self.0.mul(&o.0, cx.bits, RM))
    }

    pub fn div(&self, o: &Real, cx: &Ctx) -> Real {
        Real(self.0.div(&o.0, cx.bits, RM))
    }

    pub fn neg(&self) -> Real {
        Real(self.0.neg())
    }

    pub fn abs(&self) -> Real {
        Real(self.0.abs())
    }

    pub fn sqrt(&self, cx: &Ctx) -> Real {
        Real(self.0.sqrt(cx.bits, RM))
    }

    pub fn ln(&self, cx: &Ctx) -> Real {
        Real(self.0.ln(cx.bits, RM, &mut cx.cc.borrow_mut()))
    }

    pub fn exp(&self, cx: &Ctx) -> Real {
        Real(self.0.exp(cx.bits, RM, &mut cx.cc.borrow_mut()))
    }

    pub fn atan(&self, cx: &Ctx) -> Real {
        Real(self.0.atan(cx.bits, RM, &mut cx.cc.borrow_mut()))
    }

    pub fn powi(&self, k: usize, cx: &Ctx) -> Real {
        Real(self.0.powi(k, cx.bits, RM))
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    /// Total order; NaN does not occur in this crate's usage.
    pub fn lt(&self, o: &Real) -> bool {
        matches!(self.0.cmp(&o.0), Some(c) if c < 0)
    }

    pub fn to_f64(&self) -> f64 {
        format!("{}", self.0).parse::<f64>().unwrap_or(f64::NAN)
    }

    /// Decimal string with the given number of significant digits.
    pub fn to_decimal(&self, digits: usize) -> String {
        if self.0.is_zero() {
            return "0.0".into();
        }
        let s = format!("{}", self.0);
        match s.split_once('e') {
            Some((mant, exp)) => {
                let neg = mant.starts_with('-');
                let digits_only: String = mant.chars().filter(|c| c.is_ascii_digit()).collect();
                let keep: String = digits_only.chars().take(digits.max(1)).collect();
                let mut out = String::new();
                if neg {
                    out.push('-');
                }
                out.push(keep.as_bytes()[0] as char);
                if keep.len() > 1 {
                    out.push('.');
                    out.push_str(&keep[1..]);
                }
                out.push('e');
                out.push_str(exp);
                out
            }
            None => s,
        }
    }
}

/// Complex number over [`Real`].
#[derive(Clone, Debug)]
pub struct Complex {
    pub re: Real,
    pub im: Real,
}

impl Complex {
    pub fn new(re: Real, im: Real) -> Self {
        Complex { re, im }
    }

    pub fn from_real(re: Real, cx: &Ctx) -> Self {
        Complex { re, im: cx.zero() }
    }

    pub fn zero(cx: &Ctx) -> Self {
        Complex { re: cx.zero(), im: cx.zero() }
    }

    pub fn one(cx: &Ctx) -> Self {
        Complex { re: cx.one(), im: cx.zero() }
    }

    pub fn add(&self, o: &Complex, cx: &Ctx) -> Complex {
        Complex { re: self.re.add(&o.re, cx), im: self.im.add(&o.im, cx) }
    }

    pub fn sub(&self, o: &Complex, cx: &Ctx) -> Complex {
        Complex { re: self.re.sub(&o.re, cx), im: self.im.sub(&o.im, cx) }
    }

    pub fn mul(&self, o: &Complex, cx: &Ctx) -> Complex {
        Complex {
            re: self.re.mul(&o.re, cx).sub(&self.im.mul(&o.im, cx), cx),
            im: self.re.mul(&o.im, cx).add(&self.im.mul(&o.re, cx), cx),
        }
    }

    pub fn div(&self, o: &Complex, cx: &Ctx) -> Complex {
        let d = o.re.mul(&o.re, cx).add(&o.im.mul(&o.im, cx), cx);
        let num = self.mul(&o.conj(), cx);
        Complex { re: num.re.div(&d, cx), im: num.im.div(&d, cx) }
    }

    pub fn scale(&self, r: &Real, cx: &Ctx) -> Complex {
        Complex { re: self.re.mul(r, cx), im: self.im.mul(r, cx) }
    }

    pub fn neg(&self) -> Complex {
        Complex { re: self.re.neg(), im: self.im.neg() }
    }

    pub fn conj(&self) -> Complex {
        Complex { re: self.re.clone(), im: self.im.neg() }
    }

    pub fn abs(&self, cx: &Ctx) -> Real {
        self.re.mul(&self.re, cx).add(&self.im.mul(&self.im, cx), cx).sqrt(cx)
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    /// Principal argument via atan with quadrant correction.
    pub fn arg(&self, cx: &Ctx) -> Real {
        let pi = cx.pi();
        if self.re.is_zero() {
            if self.im.is_zero() {
                return cx.zero();
            }
            let half_pi = pi.div(&cx.from_i64(2), cx);
            return if self.im.is_negative() { half_pi.neg() } else { half_pi };
        }
        let base = self.im.div(&self.re, cx).atan(cx);
        if self.re.is_negative() {
            if self.im.is_negative() {
                base.sub(&pi, cx)
            } else {
                base.add(&pi, cx)
            }
        } else {
            base
        }
    }

    /// Principal logarithm.
    pub fn ln(&self, cx: &Ctx) -> Complex {
        Complex { re: self.abs(cx).ln(cx), im: self.arg(cx) }
    }

    pub fn powi(&self, k: usize, cx: &Ctx) -> Complex {
        let mut acc = Complex::one(cx);
        for _ in 0..k {
            acc = acc.mul(self, cx);
        }
        acc
    }
}

// ---------------------------------------------------------------------------
// Power series of iterated integrals
// ---------------------------------------------------------------------------

/// Number of series terms for a target of `digits` digits at radius r < 1:
/// the coefficients satisfy |c_n| <= 1, so the tail is below r^{K+1}/(1-r).
fn terms_needed(digits: usize, radius: f64) -> usize {
    let radius = radius.min(0.995).max(1e-6);
    let per_digit = -(10f64).ln() / radius.ln();
    ((digits as f64 + 12.0) * per_digit).ceil() as usize + 8
}

/// Taylor coefficients c_0..c_k of the iterated integral from 0 of a word
/// with letters in {0, ±1, 2}, first letter nonzero. All coefficients are
/// bounded by 1 in absolute value.
fn iword_coeffs(word: &[i8], k: usize, cx: &Ctx) -> Vec<Real> {
    debug_assert!(!word.is_empty() && word[0] != 0);
    let mut c: Vec<Real> = vec![cx.zero(); k + 1];
    // first letter a: log(1 - t/a) = -Σ t^n/(n a^n)
    let inv_a = cx.one().div(&cx.from_i64(word[0] as i64), cx);
    let mut apow = cx.one();
    for n in 1..=k {
        apow = apow.mul(&inv_a, cx);
        c[n] = apow.div(&cx.from_i64(n as i64), cx).neg();
    }
    for &letter in &word[1..] {
        if letter == 0 {
            for n in 1..=k {
                c[n] = c[n].div(&cx.from_i64(n as i64), cx);
            }
            c[0] = cx.zero();
        } else {
            let inv_a = cx.one().div(&cx.from_i64(letter as i64), cx);
            let mut next = vec![cx.zero(); k + 1];
            // rolling sum s_m = Σ_{j<m} c_j a^{j-m}
            let mut s = cx.zero();
            for m in 1..=k {
                s = s.add(&c[m - 1], cx).mul(&inv_a, cx);
                next[m] = s.div(&cx.from_i64(m as i64), cx).neg();
            }
            c = next;
        }
    }
    c
}

/// Evaluates the iterated integral I(0; word; x) for |x| < 1, word not
/// starting with 0, letters in {0, ±1, 2}.
fn iword_series_at(word: &[i8], x: &Complex, digits: usize, cx: &Ctx) -> Complex {
    if word.is_empty() {
        return Complex::one(cx);
    }
    let radius = x.abs(cx).to_f64();
    let k = terms_needed(digits, radius);
    let coeffs = iword_coeffs(word, k, cx);
    let mut acc = Complex::zero(cx);
    for n in (1..=k).rev() {
        acc = acc.mul(x, cx);
        acc = acc.add(&Complex::from_real(coeffs[n].clone(), cx), cx);
    }
    acc.mul(x, cx)
}

/// Real-argument variant for the Hölder pieces at 1/2.
fn iword_series_at_half(word: &[i8], digits: usize, cx: &Ctx) -> Real {
    if word.is_empty() {
        return cx.one();
    }
    let k = terms_needed(digits, 0.5);
    let coeffs = iword_coeffs(word, k, cx);
    let half = cx.one().div(&cx.from_i64(2), cx);
    let mut acc = cx.zero();
    for n in (1..=k).rev() {
        acc = acc.mul(&half, cx);
        acc = acc.add(&coeffs[n], cx);
    }
    acc.mul(&half, cx)
}

/// I(0; w; 1) for an admissible word over {0, ±1} by the Hölder convolution:
/// I(0; w; 1) = Σ_{w=uv} I(0; u; 1/2) · (-1)^{|v|} I(0; rev(1-v); 1/2),
/// where 1-v maps letters 0 ↦ 1, 1 ↦ 0, -1 ↦ 2.
pub fn eval_iword_at_1(w: &Word, cx: &Ctx) -> Result<Real, EvalError> {
    if w.is_empty() {
        return Ok(cx.one());
    }
    for &a in &w.0 {
        if a != 0 && a != 1 && a != -1 {
            return Err(EvalError::Unevaluable(format!("letter e{}", a)));
        }
    }
    if w.0[0] == 0 || *w.0.last().unwrap() == 1 {
        return Err(EvalError::Divergent(format!("word {} is not admissible", w)));
    }
    let digits = cx.digits;
    let mut total = cx.zero();
    for split in 0..=w.len() {
        let u = &w.0[..split];
        let v = &w.0[split..];
        let left = iword_series_at_half(u, digits, cx);
        let mapped: Vec<i8> = v.iter().rev().map(|&a| 1 - a).collect();
        let right = iword_series_at_half(&mapped, digits, cx);
        let term = left.mul(&right, cx);
        if v.len() % 2 == 1 {
            total = total.sub(&term, cx);
        } else {
            total = total.add(&term, cx);
        }
    }
    Ok(total)
}

/// Multiple zeta value (or Euler sum) of an admissible composition at the
/// requested precision.
pub fn eval_mzv(c: &crate::words::Composition, prec: usize) -> Result<Real, EvalError> {
    if !c.is_admissible() {
        return Err(EvalError::Divergent(format!("{}", c)));
    }
    let cx = Ctx::new(prec);
    let w = crate::motivic::integral_word(c);
    let v = eval_iword_at_1(&w, &cx)?;
    Ok(if c.depth() % 2 == 1 { v.neg() } else { v })
}

/// Splits leading zeros off a family word: I(0; 0^a u; x) is a polynomial in
/// log(x) with iterated-integral coefficients. Returns (log-power, word)
/// pairs with rational weights.
fn strip_leading_zeros(w: &[i8]) -> crate::exact::LinComb<(u32, Word)> {
    use crate::exact::LinComb;
    if w.is_empty() {
        return LinComb::gen((0, Word::empty()));
    }
    if w[0] != 0 {
        return LinComb::gen((0, Word(w.to_vec())));
    }
    let a = w.iter().take_while(|&&x| x == 0).count();
    let stem = Word(w[1..].to_vec());
    let mut s = crate::words::shuffle(&Word(vec![0]), &stem);
    s.add_term(Word(w.to_vec()), Rat::from_int(-(a as i64)));
    let mut out = LinComb::zero();
    // I(0^a u) = (log(x)·I(0^{a-1}u) - Σ_inside I)/a
    for ((k, word), c) in strip_leading_zeros(&w[1..]).iter() {
        out.add_term((k + 1, word.clone()), c * &Rat::new(1, a as i64));
    }
    for (word, c) in s.iter() {
        for ((k, inner), d) in strip_leading_zeros(&word.0).iter() {
            out.add_term((*k, inner.clone()), &(&-c * d) * &Rat::new(1, a as i64));
        }
    }
    out
}

/// Multiple polylogarithm Li_w(x) for a word over the letters {e0, e1}
/// (encoded 0/1): the iterated integral from the tangential base point at 0
/// with the sign (-1)^{#e1}. Valid for |x| < 1, and at x = 1 only for
/// admissible words.
pub fn eval_li(w: &Word, x: &Complex, prec: usize) -> Result<Complex, EvalError> {
    let cx = Ctx::new(prec);
    for &a in &w.0 {
        if a != 0 && a != 1 {
            return Err(EvalError::Unevaluable(format!("letter e{}", a)));
        }
    }
    if w.is_empty() {
        return Ok(Complex::one(&cx));
    }
    let ones = w.0.iter().filter(|&&a| a == 1).count();
    let sign_neg = ones % 2 == 1;
    let one = Complex::one(&cx);
    let is_one = x.sub(&one, &cx).abs(&cx).to_f64() < 1e-30;
    if is_one {
        if *w.0.last().unwrap() == 1 || w.0[0] == 0 {
            return Err(EvalError::Divergent(format!("Li word {} at 1", w)));
        }
        let v = eval_iword_at_1(w, &cx)?;
        let v = if sign_neg { v.neg() } else { v };
        return Ok(Complex::from_real(v, &cx));
    }
    let r = x.abs(&cx).to_f64();
    if r >= 0.995 {
        return Err(EvalError::OutOfDomain(format!("|x| = {} too close to 1", r)));
    }
    if x.is_zero() {
        return Ok(Complex::zero(&cx));
    }
    // leading zeros become log(x) powers
    let pieces = strip_leading_zeros(&w.0);
    let logx = x.ln(&cx);
    let mut total = Complex::zero(&cx);
    for ((k, word), c) in pieces.iter() {
        let mut term = iword_series_at(&word.0, x, cx.digits, &cx);
        if *k > 0 {
            term = term.mul(&logx.powi(*k as usize, &cx), &cx);
        }
        total = total.add(&term.scale(&cx.from_rat(c), &cx), &cx);
    }
    if sign_neg {
        total = total.neg();
    }
    Ok(total)
}

/// The dilogarithm on the closed unit disk minus {1}: series for small
/// modulus, otherwise the Landen transformation z ↦ z/(z-1), the reflection
/// z ↦ 1-z, or the duplication formula.
pub fn li2(z: &Complex, cx: &Ctx) -> Result<Complex, EvalError> {
    li2_rec(z, cx, 0)
}

fn li2_series(z: &Complex, cx: &Ctx) -> Complex {
    // Li2 = -I(0; 1 0; z)
    iword_series_at(&[1, 0], z, cx.digits, cx).neg()
}

fn li2_rec(z: &Complex, cx: &Ctx, depth: usize) -> Result<Complex, EvalError> {
    let one = Complex::one(cx);
    if z.is_zero() {
        return Ok(Complex::zero(cx));
    }
    if z.sub(&one, cx).abs(cx).to_f64() < 1e-30 {
        let pi = cx.pi();
        return Ok(Complex::from_real(pi.mul(&pi, cx).div(&cx.from_i64(6), cx), cx));
    }
    if depth > 4 {
        return Err(EvalError::OutOfDomain("dilogarithm reduction did not converge".into()));
    }
    let r = z.abs(cx).to_f64();
    if r > 1.0 + 1e-12 {
        return Err(EvalError::OutOfDomain(format!("|z| = {} > 1", r)));
    }
    if r <= 0.8 {
        return Ok(li2_series(z, cx));
    }
    let zm1 = z.sub(&one, cx);
    let landen = z.div(&zm1, cx);
    if landen.abs(cx).to_f64() <= 0.8 {
        // Li2(z) = -Li2(z/(z-1)) - ln²(1-z)/2
        let ln1mz = one.sub(z, cx).ln(cx);
        let sq = ln1mz.mul(&ln1mz, cx);
        let half = cx.one().div(&cx.from_i64(2), cx);
        return Ok(li2_series(&landen, cx).neg().sub(&sq.scale(&half, cx), cx));
    }
    let omz = one.sub(z, cx);
    if omz.abs(cx).to_f64() <= 0.8 {
        // Li2(z) = π²/6 - ln(z)ln(1-z) - Li2(1-z)
        let pi = cx.pi();
        let pi2_6 = Complex::from_real(pi.mul(&pi, cx).div(&cx.from_i64(6), cx), cx);
        let cross = z.ln(cx).mul(&omz.ln(cx), cx);
        let rest = li2_rec(&omz, cx, depth + 1)?;
        return Ok(pi2_6.sub(&cross, cx).sub(&rest, cx));
    }
    // duplication: Li2(z) = Li2(z²)/2 - Li2(-z)
    let z2 = z.mul(z, cx);
    let a = li2_rec(&z2, cx, depth + 1)?;
    let b = li2_rec(&z.neg(), cx, depth + 1)?;
    let half = cx.one().div(&cx.from_i64(2), cx);
    Ok(a.scale(&half, cx).sub(&b, cx))
}

/// Bloch–Wigner function D(z) = Im Li2(z) + arg(1-z)·log|z|.
pub fn bloch_wigner(z: &Complex, prec: usize) -> Result<Real, EvalError> {
    let cx = Ctx::new(prec);
    let one = Complex::one(&cx);
    if z.is_zero() || z.sub(&one, &cx).is_zero() {
        return Err(EvalError::OutOfDomain("Bloch-Wigner is singular at 0 and 1".into()));
    }
    let li2v = li2(z, &cx)?;
    let arg1mz = one.sub(z, &cx).arg(&cx);
    let logabs = z.abs(&cx).ln(&cx);
    Ok(li2v.im.add(&arg1mz.mul(&logabs, &cx), &cx))
}

/// The period homomorphism: L ↦ 2πi, log(p) ↦ log p, words ↦ regularized
/// iterated integrals from 0 to 1.
pub fn per_eval(x: &MotivicExpr, prec: usize) -> Result<Complex, EvalError> {
    let cx = Ctx::new(prec);
    let two_pi = cx.pi().mul(&cx.from_i64(2), &cx);
    let mut total = Complex::zero(&cx);
    for (g, c) in x.0.iter() {
        let v = per_eval_gen(g, &two_pi, &cx)?;
        total = total.add(&v.scale(&cx.from_rat(c), &cx), &cx);
    }
    Ok(total)
}

fn per_eval_gen(g: &MotGen, two_pi: &Real, cx: &Ctx) -> Result<Complex, EvalError> {
    // (2πi)^lef
    let mag = two_pi.powi(g.lef as usize, cx);
    let mut v = match g.lef % 4 {
        0 => Complex::from_real(mag, cx),
        1 => Complex::new(cx.zero(), mag),
        2 => Complex::from_real(mag.neg(), cx),
        _ => Complex::new(cx.zero(), mag.neg()),
    };
    for &p in &g.logs {
        v = v.scale(&cx.ln_u64(p), cx);
    }
    if !g.word.is_empty() {
        let w = eval_iword_at_1(&g.word, cx)
            .map_err(|e| EvalError::Unevaluable(format!("{}: {}", g.word, e)))?;
        v = v.scale(&w, cx);
    }
    Ok(v)
}
