//! Motivic periods of mixed Tate type over Z as concrete data.
//!
//! Generators are products L^k · I(0; w; 1) · Π log(p), where w is a word
//! over {0, ±1} in shuffle-regularized normal form, L is the Lefschetz
//! period (2πi), and log(p) are logarithms of primes. The letter a stands
//! for the one-form dt/(t-a), so
//!
//!   zeta(n1,...,nr) = (-1)^r I(0; 1 0^{n1-1} ... 1 0^{nr-1}; 1)
//!
//! with the nested-sum convention k1 < ... < kr. The coaction lands in
//! (motivic ⊗ de Rham), de Rham on the right; its right factor carries the
//! Lefschetz power that restores the full weight of the input.

use std::cell::RefCell;
use std::collections::{BTreeMap, HashMap};
use std::fmt;

use crate::exact::{LinComb, Rat, SparseMat};
use crate::relations::{Mono, RelationTable};
use crate::words::{Composition, Word, shuffle, shuffle_lc};

/// Errors for motivic-period operations.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MotivicError {
    UnsupportedLetter(i8),
    Divergent(String),
    WeightOutOfRange(String),
    MissingRelationTable(String),
    EulerUnsupported(String),
    NotPrime(u64),
}

impl fmt::Display for MotivicError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MotivicError::UnsupportedLetter(a) => write!(f, "unsupported letter e{}", a),
            MotivicError::Divergent(s) => write!(f, "divergent: {}", s),
            MotivicError::WeightOutOfRange(s) => write!(f, "weight out of range: {}", s),
            MotivicError::MissingRelationTable(s) => write!(f, "missing relation table: {}", s),
            MotivicError::EulerUnsupported(s) => {
                write!(f, "unsupported for Euler-sum generators: {}", s)
            }
            MotivicError::NotPrime(p) => write!(f, "{} is not prime", p),
        }
    }
}

impl std::error::Error for MotivicError {}

/// A motivic generator: L^lef · I(0; word; 1) · Π_p log(p).
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct MotGen {
    pub lef: u32,
    pub word: Word,
    /// Multiset of primes, sorted.
    pub logs: Vec<u64>,
}

impl MotGen {
    pub fn one() -> Self {
        MotGen { lef: 0, word: Word::empty(), logs: Vec::new() }
    }

    pub fn from_word(word: Word) -> Self {
        MotGen { lef: 0, word, logs: Vec::new() }
    }

    /// Half the Hodge weight: lef + |word| + #logs.
    pub fn weight(&self) -> u32 {
        self.lef + self.word.len() as u32 + self.logs.len() as u32
    }

    pub fn is_scalar(&self) -> bool {
        self.lef == 0 && self.word.is_empty() && self.logs.is_empty()
    }
}

impl Ord for MotGen {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.weight(), self.lef, &self.word.0, &self.logs).cmp(&(
            other.weight(),
            other.lef,
            &other.word.0,
            &other.logs,
        ))
    }
}

impl PartialOrd for MotGen {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// A de Rham generator: (L^dr)^lef · I^dr(word) · Π ν_p. The Lefschetz
/// exponent may be negative in general (never in coaction output).
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct DrGen {
    pub lef: i64,
    pub word: Word,
    pub nus: Vec<u64>,
}

impl DrGen {
    pub fn one() -> Self {
        DrGen { lef: 0, word: Word::empty(), nus: Vec::new() }
    }

    pub fn weight(&self) -> i64 {
        self.lef + self.word.len() as i64 + self.nus.len() as i64
    }

    pub fn is_unit(&self) -> bool {
        self.word.is_empty() && self.nus.is_empty()
    }
}

impl Ord for DrGen {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.weight(), self.lef, &self.word.0, &self.nus).cmp(&(
            other.weight(),
            other.lef,
            &other.word.0,
            &other.nus,
        ))
    }
}

impl PartialOrd for DrGen {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// Exact rational combination of motivic generators.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct MotivicExpr(pub LinComb<MotGen>);

/// Combination of de Rham generators.
pub type DrExpr = LinComb<DrGen>;

/// Combination of (motivic ⊗ de Rham) generator pairs.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct CoactionTensor(pub LinComb<(MotGen, DrGen)>);

fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= p {
        if p % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

impl MotivicExpr {
    pub fn zero() -> Self {
        MotivicExpr(LinComb::zero())
    }

    pub fn one() -> Self {
        MotivicExpr(LinComb::gen(MotGen::one()))
    }

    pub fn scalar(c: Rat) -> Self {
        MotivicExpr(LinComb::term(MotGen::one(), c))
    }

    /// The Lefschetz period L (2πi) to the given power.
    pub fn lefschetz(k: u32) -> Self {
        MotivicExpr(LinComb::gen(MotGen { lef: k, word: Word::empty(), logs: Vec::new() }))
    }

    /// log(p) for a prime p.
    pub fn log_prime(p: u64) -> Result<Self, MotivicError> {
        if !is_prime(p) {
            return Err(MotivicError::NotPrime(p));
        }
        Ok(MotivicExpr(LinComb::gen(MotGen { lef: 0, word: Word::empty(), logs: vec![p] })))
    }

    /// zeta(n1,...,nr) with the nested-sum convention; the composition must
    /// be admissible.
    pub fn zeta(c: &Composition) -> Result<Self, MotivicError> {
        if !c.is_admissible() {
            return Err(MotivicError::Divergent(format!("{}", c)));
        }
        let word = integral_word(c);
        let sign = if c.depth() % 2 == 0 { Rat::one() } else { -Rat::one() };
        Ok(MotivicExpr(LinComb::term(MotGen::from_word(word), sign)))
    }

    /// A regularized iterated integral I(0; w; 1) as an expression.
    pub fn iterated_integral(w: &Word) -> Result<Self, MotivicError> {
        let reg = regularize(0, w, 1)?;
        Ok(MotivicExpr(reg.map_gens(|word| MotGen::from_word(word.clone()))))
    }

    pub fn add(&self, other: &Self) -> Self {
        MotivicExpr(self.0.add(&other.0))
    }

    pub fn sub(&self, other: &Self) -> Self {
        MotivicExpr(self.0.sub(&other.0))
    }

    pub fn scale(&self, c: &Rat) -> Self {
        MotivicExpr(self.0.scale(c))
    }

    /// Product: words multiply by shuffle, Lefschetz exponents add, log
    /// multisets merge.
    pub fn mul(&self, other: &Self) -> Self {
        let mut out = LinComb::zero();
        for (g, c) in self.0.iter() {
            for (h, d) in other.0.iter() {
                let words = shuffle(&g.word, &h.word);
                let mut logs = g.logs.clone();
                logs.extend_from_slice(&h.logs);
                logs.sort_unstable();
                for (w, cw) in words.iter() {
                    out.add_term(
                        MotGen { lef: g.lef + h.lef, word: w.clone(), logs: logs.clone() },
                        &(c * d) * cw,
                    );
                }
            }
        }
        MotivicExpr(out)
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = MotivicExpr::one();
        for _ in 0..k {
            acc = acc.mul(self);
        }
        acc
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    /// Half-Hodge weight when homogeneous.
    pub fn weight(&self) -> Option<u32> {
        let mut w = None;
        for (g, _) in self.0.iter() {
            match w {
                None => w = Some(g.weight()),
                Some(v) if v == g.weight() => {}
                _ => return None,
            }
        }
        w
    }

    pub fn max_weight(&self) -> u32 {
        self.0.iter().map(|(g, _)| g.weight()).max().unwrap_or(0)
    }

    /// True when every generator word uses only letters {0, 1} (no Euler
    /// letters) — the zeta/log subring.
    pub fn is_mzv_log(&self) -> bool {
        self.0
            .iter()
            .all(|(g, _)| g.word.0.iter().all(|&a| a == 0 || a == 1))
    }
}

/// The integral word of an admissible composition: blocks η_i 0^{n_i - 1}
/// with η_i the product of the signs of parts i..r.
pub fn integral_word(c: &Composition) -> Word {
    let mut letters = Vec::new();
    for (i, &(n, _)) in c.0.iter().enumerate() {
        let eta: i8 = c.0[i..].iter().map(|&(_, s)| s).product();
        letters.push(eta);
        for _ in 1..n {
            letters.push(0);
        }
    }
    Word(letters)
}

/// Inverse of [`integral_word`] on admissible words (first letter nonzero).
pub fn word_to_composition(w: &Word) -> Option<Composition> {
    if w.is_empty() {
        return Some(Composition(Vec::new()));
    }
    if w.0[0] == 0 {
        return None;
    }
    let mut etas: Vec<(i8, u32)> = Vec::new();
    for &a in &w.0 {
        if a == 0 {
            etas.last_mut()?.1 += 1;
        } else {
            etas.push((a, 1));
        }
    }
    let mut parts = Vec::with_capacity(etas.len());
    for i in 0..etas.len() {
        let (eta, n) = etas[i];
        let next = etas.get(i + 1).map(|&(e, _)| e).unwrap_or(1);
        parts.push((n, eta * next));
    }
    let comp = Composition(parts);
    if comp.is_admissible() { Some(comp) } else { None }
}

fn check_letters(w: &[i8]) -> Result<(), MotivicError> {
    for &a in w {
        if a != 0 && a != 1 && a != -1 {
            return Err(MotivicError::UnsupportedLetter(a));
        }
    }
    Ok(())
}

thread_local! {
    static REG01_CACHE: RefCell<HashMap<Word, LinComb<Word>>> = RefCell::new(HashMap::new());
    static REG_CACHE: RefCell<HashMap<(i8, Word, i8), LinComb<Word>>> = RefCell::new(HashMap::new());
    static COACT_CACHE: RefCell<HashMap<Word, LinComb<(Word, DrGen)>>> = RefCell::new(HashMap::new());
}

/// Shuffle regularization of I(0; w; 1): trailing letters equal to 1 and
/// leading letters equal to 0 are eliminated against the regulators
/// I(0;1;1) = I(0;0;1) = 0; admissible words pass through unchanged.
fn reg01(w: &Word) -> LinComb<Word> {
    if w.is_empty() {
        return LinComb::gen(Word::empty());
    }
    if let Some(hit) = REG01_CACHE.with(|c| c.borrow().get(w).cloned()) {
        return hit;
    }
    let n = w.len();
    let result = if *w.0.last().unwrap() == 1 {
        // w = u 1^b; shuffling a single 1 into u 1^{b-1} hits w exactly b times
        let b = w.0.iter().rev().take_while(|&&a| a == 1).count();
        let stem = Word(w.0[..n - 1].to_vec());
        let mut s = shuffle(&Word(vec![1]), &stem);
        s.add_term(w.clone(), Rat::from_int(-(b as i64)));
        s.scale(&-Rat::new(1, b as i64)).flat_map(reg01)
    } else if w.0[0] == 0 {
        let a = w.0.iter().take_while(|&&x| x == 0).count();
        let stem = Word(w.0[1..].to_vec());
        let mut s = shuffle(&Word(vec![0]), &stem);
        s.add_term(w.clone(), Rat::from_int(-(a as i64)));
        s.scale(&-Rat::new(1, a as i64)).flat_map(reg01)
    } else {
        LinComb::gen(w.clone())
    };
    REG01_CACHE.with(|c| c.borrow_mut().insert(w.clone(), result.clone()));
    result
}

/// Regularized iterated integral I(a0; w; a1) with endpoints in {0, ±1},
/// written as a combination of normal-form words I(0; ·; 1).
///
/// Reduction path: unit and equal-endpoint rules, path reversal
/// I(a0;w;a1) = (-1)^|w| I(a1; rev w; a0), the scaling t ↦ -t (negates every
/// letter), composition through 0 for the endpoint pairs {+1, -1}, then
/// shuffle regularization at (0, 1).
pub fn regularize(a0: i8, w: &Word, a1: i8) -> Result<LinComb<Word>, MotivicError> {
    check_letters(&[a0, a1])?;
    check_letters(&w.0)?;
    Ok(reg_general(a0, w, a1))
}

fn reg_general(a0: i8, w: &Word, a1: i8) -> LinComb<Word> {
    if w.is_empty() {
        return LinComb::gen(Word::empty());
    }
    if a0 == a1 {
        return LinComb::zero();
    }
    let key = (a0, w.clone(), a1);
    if let Some(hit) = REG_CACHE.with(|c| c.borrow().get(&key).cloned()) {
        return hit;
    }
    let neg = |v: &Word| Word(v.0.iter().map(|&a| -a).collect());
    let result = match (a0, a1) {
        (0, 1) => reg01(w),
        (1, 0) => {
            let r = reg01(&w.reversed());
            if w.len() % 2 == 1 { r.neg() } else { r }
        }
        (0, -1) => reg01(&neg(w)),
        (-1, 0) => {
            let r = reg01(&neg(&w.reversed()));
            if w.len() % 2 == 1 { r.neg() } else { r }
        }
        (1, -1) | (-1, 1) => {
            // route through 0: I(a; w; b) = Σ_{w=uv} I(a; u; 0) I(0; v; b)
            let mut acc = LinComb::zero();
            for k in 0..=w.len() {
                let u = Word(w.0[..k].to_vec());
                let v = Word(w.0[k..].to_vec());
                let left = reg_general(a0, &u, 0);
                if left.is_zero() {
                    continue;
                }
                let right = reg_general(0, &v, a1);
                acc.add_assign(&shuffle_lc(&left, &right));
            }
            acc
        }
        _ => unreachable!("endpoints validated"),
    };
    REG_CACHE.with(|c| c.borrow_mut().insert(key, result.clone()));
    result
}

/// The Goncharov coaction of a single normal-form word, as pairs
/// (left normal-form word, de Rham generator). The de Rham Lefschetz power
/// restores full weight.
fn coaction_word(w: &Word) -> LinComb<(Word, DrGen)> {
    if let Some(hit) = COACT_CACHE.with(|c| c.borrow().get(w).cloned()) {
        return hit;
    }
    let n = w.len();
    let mut out: LinComb<(Word, DrGen)> = LinComb::zero();
    for mask in 0u32..(1 << n) {
        let chosen: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
        let sub = Word(chosen.iter().map(|&i| w.0[i]).collect());
        let left = reg01(&sub);
        if left.is_zero() {
            continue;
        }
        // product of the gap integrals between consecutive chosen letters
        let mut right = LinComb::gen(Word::empty());
        let k = chosen.len();
        for p in 0..=k {
            let (lo, a_lo) = if p == 0 { (0, 0) } else { (chosen[p - 1] + 1, w.0[chosen[p - 1]]) };
            let (hi, a_hi) = if p == k { (n, 1) } else { (chosen[p], w.0[chosen[p]]) };
            if lo >= hi {
                continue;
            }
            let interior = Word(w.0[lo..hi].to_vec());
            let gap = reg_general(a_lo, &interior, a_hi);
            if gap.is_zero() {
                right = LinComb::zero();
                break;
            }
            right = shuffle_lc(&right, &gap);
        }
        if right.is_zero() {
            continue;
        }
        for (lw, lc) in left.iter() {
            for (rw, rc) in right.iter() {
                let dr = DrGen { lef: lw.len() as i64, word: rw.clone(), nus: Vec::new() };
                out.add_term((lw.clone(), dr), lc * rc);
            }
        }
    }
    COACT_CACHE.with(|c| c.borrow_mut().insert(w.clone(), out.clone()));
    out
}

/// The coaction Δ: motivic → motivic ⊗ de Rham.
///
/// Multiplicative; on a word generator it is the subsequence sum with both
/// factors regularized, on L it is L ⊗ L^dr, and on log(p) it is
/// log(p) ⊗ L^dr + 1 ⊗ ν_p.
pub fn coaction(x: &MotivicExpr) -> CoactionTensor {
    let mut out: LinComb<(MotGen, DrGen)> = LinComb::zero();
    for (g, c) in x.0.iter() {
        let word_part = coaction_word(&g.word);
        // distribute each log(p) to the motivic or the ν side
        let nlogs = g.logs.len();
        for logmask in 0u32..(1 << nlogs) {
            let mut kept = Vec::new();
            let mut nus = Vec::new();
            for (i, &p) in g.logs.iter().enumerate() {
                if logmask >> i & 1 == 0 {
                    kept.push(p);
                } else {
                    nus.push(p);
                }
            }
            nus.sort_unstable();
            for ((lw, dr), wc) in word_part.iter() {
                let mg = MotGen { lef: g.lef, word: lw.clone(), logs: kept.clone() };
                let dg = DrGen {
                    lef: dr.lef + g.lef as i64 + kept.len() as i64,
                    word: dr.word.clone(),
                    nus: nus.clone(),
                };
                out.add_term((mg, dg), c * wc);
            }
        }
    }
    CoactionTensor(out)
}

impl CoactionTensor {
    /// Applies the counit (evaluation at the identity) to the right factor:
    /// L^dr ↦ 1, nonempty words and ν's ↦ 0.
    pub fn counit_right(&self) -> MotivicExpr {
        let mut out = LinComb::zero();
        for ((m, d), c) in self.0.iter() {
            if d.is_unit() {
                out.add_term(m.clone(), c.clone());
            }
        }
        MotivicExpr(out)
    }
}

/// De Rham coproduct Δ': de Rham → de Rham ⊗ de Rham (the same subsequence
/// formula with both factors de Rham; L^dr is grouplike, and
/// Δ'ν_p = ν_p ⊗ L + 1 ⊗ ν_p).
pub fn dr_coproduct(d: &DrGen) -> LinComb<(DrGen, DrGen)> {
    let word_part = coaction_word(&d.word);
    let mut out = LinComb::zero();
    let nnus = d.nus.len();
    for numask in 0u32..(1 << nnus) {
        let mut kept = Vec::new();
        let mut moved = Vec::new();
        for (i, &p) in d.nus.iter().enumerate() {
            if numask >> i & 1 == 0 {
                kept.push(p);
            } else {
                moved.push(p);
            }
        }
        for ((lw, dr), wc) in word_part.iter() {
            let left = DrGen { lef: d.lef, word: lw.clone(), nus: kept.clone() };
            let right = DrGen {
                lef: d.lef + dr.lef + kept.len() as i64,
                word: dr.word.clone(),
                nus: moved.clone(),
            };
            out.add_term((left, right), wc.clone());
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Canonical coordinates modulo the relation table
// ---------------------------------------------------------------------------

/// Canonical motivic monomial: Lefschetz power, log multiset, basis monomial.
pub type MotCanon = (u32, Vec<u64>, Mono);

/// Canonical unipotent de Rham monomial: ν multiset and a ζ(2)-free basis
/// monomial (the Lefschetz bookkeeping is set to 1).
pub type DrUCanon = (Vec<u64>, Mono);

fn map_rel_err(e: crate::relations::RelationError) -> MotivicError {
    match e {
        crate::relations::RelationError::WeightTooLarge(w) => {
            MotivicError::WeightOutOfRange(format!("weight {} beyond table", w))
        }
        other => MotivicError::EulerUnsupported(other.to_string()),
    }
}

/// Reduces a motivic expression to canonical coordinates. Requires every
/// word to be a {0,1}-word within table range.
pub fn reduce_mot(
    x: &MotivicExpr,
    table: &RelationTable,
) -> Result<LinComb<MotCanon>, MotivicError> {
    let mut out = LinComb::zero();
    for (g, c) in x.0.iter() {
        let wordpart = table.reduce_word(&g.word).map_err(map_rel_err)?;
        for (mono, mc) in wordpart.iter() {
            out.add_term((g.lef, g.logs.clone(), mono.clone()), c * mc);
        }
    }
    Ok(out)
}

/// Reduces a de Rham word modulo relations and the ζ(2) ideal.
pub fn reduce_dr_word(w: &Word, table: &RelationTable) -> Result<LinComb<Mono>, MotivicError> {
    let full = table.reduce_word(w).map_err(map_rel_err)?;
    let mut out = LinComb::zero();
    for (mono, c) in full.iter() {
        if !mono.contains_zeta2() {
            out.add_term(mono.clone(), c.clone());
        }
    }
    Ok(out)
}

/// Rebuilds a motivic expression from a relation-basis monomial.
pub fn mono_to_expr(mono: &Mono) -> MotivicExpr {
    let mut acc = MotivicExpr::one();
    for comp in &mono.0 {
        let z = MotivicExpr::zeta(comp).expect("basis monomials are admissible");
        acc = acc.mul(&z);
    }
    acc
}

/// Rebuilds an expression from canonical coordinates.
pub fn canon_to_expr(coords: &LinComb<MotCanon>) -> MotivicExpr {
    let mut out = MotivicExpr::zero();
    for ((lef, logs, mono), c) in coords.iter() {
        let mut t = mono_to_expr(mono).scale(c);
        if *lef > 0 {
            t = t.mul(&MotivicExpr::lefschetz(*lef));
        }
        for &p in logs {
            t = t.mul(&MotivicExpr::log_prime(p).expect("stored primes are prime"));
        }
        out = out.add(&t);
    }
    out
}

// ---------------------------------------------------------------------------
// Derivations, unipotency degree, conjugates, projection
// ---------------------------------------------------------------------------

fn require_mzv(x: &MotivicExpr) -> Result<(), MotivicError> {
    if !x.is_mzv_log() {
        return Err(MotivicError::EulerUnsupported("words contain -1 letters".into()));
    }
    Ok(())
}

fn require_table(x: &MotivicExpr, table: &RelationTable) -> Result<(), MotivicError> {
    let need: u32 = x.0.iter().map(|(g, _)| g.word.len() as u32).max().unwrap_or(0);
    if table.max_weight() < need {
        return Err(MotivicError::MissingRelationTable(format!(
            "need weight {}, table has {}",
            need,
            table.max_weight()
        )));
    }
    Ok(())
}

/// The weight-r component of the reduced unipotent coaction, with the de
/// Rham factor projected onto the class of zeta(r) in the degree-r piece of
/// the Lie coalgebra. Defined for odd r with 3 ≤ r ≤ weight(x).
pub fn derivation_d(
    r: u32,
    x: &MotivicExpr,
    table: &RelationTable,
) -> Result<MotivicExpr, MotivicError> {
    if r % 2 == 0 || r < 3 {
        return Err(MotivicError::WeightOutOfRange(format!("r = {} must be odd and >= 3", r)));
    }
    if r > x.max_weight() {
        return Err(MotivicError::WeightOutOfRange(format!(
            "r = {} exceeds weight {}",
            r,
            x.max_weight()
        )));
    }
    require_mzv(x)?;
    require_table(x, table)?;
    let zr = Mono::generator(&Composition::from_parts(&[r as i64]));
    let delta = coaction(x);
    let mut out = MotivicExpr::zero();
    for ((m, d), c) in delta.0.iter() {
        if !d.nus.is_empty() || d.word.len() as u32 != r {
            continue;
        }
        let classes = reduce_dr_word(&d.word, table)?;
        let coeff = classes.coeff(&zr);
        if coeff.is_zero() {
            continue;
        }
        out = out.add(&MotivicExpr(LinComb::term(m.clone(), &coeff * c)));
    }
    Ok(canon_to_expr(&reduce_mot(&out, table)?))
}

/// One application of the reduced unipotent coaction in canonical
/// coordinates; memoized per relation-basis monomial.
fn delta_ur_mono(
    mono: &Mono,
    table: &RelationTable,
    cache: &mut HashMap<Mono, LinComb<(MotCanon, DrUCanon)>>,
) -> LinComb<(MotCanon, DrUCanon)> {
    if let Some(hit) = cache.get(mono) {
        return hit.clone();
    }
    let expr = mono_to_expr(mono);
    let delta = coaction(&expr);
    let mut out: LinComb<(MotCanon, DrUCanon)> = LinComb::zero();
    for ((m, d), c) in delta.0.iter() {
        // unipotent quotient: L^dr ↦ 1 and de Rham words mod the ζ(2) ideal
        let rw = reduce_dr_word(&d.word, table).expect("table covers coaction output");
        let left = reduce_mot(&MotivicExpr(LinComb::gen(m.clone())), table)
            .expect("table covers coaction output");
        for (lmono, lc) in left.iter() {
            for (rmono, rc) in rw.iter() {
                out.add_term((lmono.clone(), (d.nus.clone(), rmono.clone())), &(c * lc) * rc);
            }
        }
    }
    // subtract the identity term x ⊗ 1
    out.add_term(((0, Vec::new(), mono.clone()), (Vec::new(), Mono::one())), -Rat::one());
    cache.insert(mono.clone(), out.clone());
    out
}

/// Smallest i such that the (i+1)-fold reduced unipotent coaction kills x.
pub fn unipotency_degree(x: &MotivicExpr, table: &RelationTable) -> Result<usize, MotivicError> {
    require_mzv(x)?;
    require_table(x, table)?;
    type State = LinComb<(MotCanon, Vec<DrUCanon>)>;
    let mut cache = HashMap::new();
    let mut state: State = reduce_mot(x, table)?.map_gens(|k| (k.clone(), Vec::new()));
    let mut steps = 0usize;
    while !state.is_zero() {
        steps += 1;
        if steps > 64 {
            return Err(MotivicError::WeightOutOfRange("unipotency iteration runaway".into()));
        }
        let mut next: State = LinComb::zero();
        for (((lef, logs, mono), tail), c) in state.iter() {
            // Leibniz over the log multiset and the word monomial; the
            // Lefschetz factor is inert since L^u = 1.
            let nlogs = logs.len();
            let base = delta_ur_mono(mono, table, &mut cache);
            for logmask in 0u32..(1 << nlogs) {
                let mut kept = Vec::new();
                let mut nus = Vec::new();
                for (i, &p) in logs.iter().enumerate() {
                    if logmask >> i & 1 == 0 {
                        kept.push(p)
                    } else {
                        nus.push(p)
                    }
                }
                nus.sort_unstable();
                if logmask != 0 {
                    // logs moved, word part stays put
                    let mut tail_id = tail.clone();
                    tail_id.push((nus.clone(), Mono::one()));
                    next.add_term(((*lef, kept.clone(), mono.clone()), tail_id), c.clone());
                }
                // word part moves
                for (((llef, _llogs, lmono), (rnus, rmono)), bc) in base.iter() {
                    let mut tail2 = tail.clone();
                    let mut rn = rnus.clone();
                    rn.extend(nus.iter());
                    rn.sort_unstable();
                    tail2.push((rn, rmono.clone()));
                    next.add_term(((lef + llef, kept.clone(), lmono.clone()), tail2), c * bc);
                }
            }
        }
        state = next;
    }
    Ok(steps.saturating_sub(1))
}

/// Basis of the comodule generated by x under the full coaction: the span of
/// the left factors, closed under the coaction, returned as reduced
/// expressions. Its size is the rank of x.
pub fn galois_conjugates(
    x: &MotivicExpr,
    table: &RelationTable,
) -> Result<Vec<MotivicExpr>, MotivicError> {
    require_mzv(x)?;
    require_table(x, table)?;
    let delta = coaction(x);
    // group left factors by the canonical form of the right factor
    let mut groups: BTreeMap<(i64, Vec<u64>, Mono), LinComb<MotGen>> = BTreeMap::new();
    for ((m, d), c) in delta.0.iter() {
        let classes = reduce_dr_word(&d.word, table)?;
        for (rmono, rc) in classes.iter() {
            groups
                .entry((d.lef, d.nus.clone(), rmono.clone()))
                .or_default()
                .add_term(m.clone(), c * rc);
        }
    }
    // reduce every left factor and index the canonical coordinates
    let mut reduced_lefts: Vec<LinComb<MotCanon>> = Vec::new();
    for (_, left) in groups {
        let red = reduce_mot(&MotivicExpr(left), table)?;
        if !red.is_zero() {
            reduced_lefts.push(red);
        }
    }
    let mut keys: Vec<MotCanon> = Vec::new();
    for lc in &reduced_lefts {
        for (k, _) in lc.iter() {
            keys.push(k.clone());
        }
    }
    keys.sort();
    keys.dedup();
    let index: BTreeMap<&MotCanon, usize> = keys.iter().enumerate().map(|(i, k)| (k, i)).collect();
    let mut mat = SparseMat::new(keys.len());
    for lc in &reduced_lefts {
        mat.push_row(lc.iter().map(|(k, c)| (index[k], c.clone())).collect());
    }
    let rref = mat.rref();
    let mut out = Vec::new();
    for row in &rref.reduced.rows {
        let coords: LinComb<MotCanon> =
            row.iter().map(|(&i, c)| (keys[i].clone(), c.clone())).collect();
        out.push(canon_to_expr(&coords));
    }
    Ok(out)
}

/// The explicit normalization pass rewriting every ζ(2) factor as -L²/24.
/// Generators are first reduced to basis coordinates, so the rewrite applies
/// to products and non-basis words alike. This is the "L-form" used for
/// printing; it is never applied eagerly.
pub fn rewrite_zeta2_to_lefschetz(
    x: &MotivicExpr,
    table: &RelationTable,
) -> Result<MotivicExpr, MotivicError> {
    let coords = reduce_mot(x, table)?;
    let z2 = Composition::from_parts(&[2]);
    let mut out = MotivicExpr::zero();
    for ((lef, logs, mono), c) in coords.iter() {
        let k = mono.0.iter().filter(|&f| *f == z2).count() as u32;
        let rest = Mono(mono.0.iter().filter(|&f| *f != z2).cloned().collect());
        let scale = Rat::new(-1, 24).pow(k as i32);
        let mut t = mono_to_expr(&rest).scale(&(c * &scale));
        let total_lef = lef + 2 * k;
        if total_lef > 0 {
            t = t.mul(&MotivicExpr::lefschetz(total_lef));
        }
        for &p in logs {
            t = t.mul(&MotivicExpr::log_prime(p)?);
        }
        out = out.add(&t);
    }
    Ok(out)
}

/// Projection to de Rham periods: the scalar-left part of the coaction,
/// canonicalized modulo the ζ(2) ideal on zeta words. Kills L and ζ(2); a
/// ring homomorphism on the zeta/log subring. (Effectivity is built into the
/// generator type: Lefschetz exponents are non-negative.)
pub fn project_dr(x: &MotivicExpr, table: &RelationTable) -> Result<DrExpr, MotivicError> {
    let delta = coaction(x);
    let mut out: DrExpr = LinComb::zero();
    for ((m, d), c) in delta.0.iter() {
        if !m.is_scalar() {
            continue;
        }
        debug_assert_eq!(d.lef, 0);
        let is_mzv_word = d.word.0.iter().all(|&a| a == 0 || a == 1);
        if is_mzv_word && d.word.len() as u32 <= table.max_weight() {
            let classes = reduce_dr_word(&d.word, table)?;
            for (mono, mc) in classes.iter() {
                for (w, wc) in mono.to_word_combination().iter() {
                    out.add_term(
                        DrGen { lef: 0, word: w.clone(), nus: d.nus.clone() },
                        &(c * mc) * wc,
                    );
                }
            }
        } else {
            out.add_term(d.clone(), c.clone());
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Families over the thrice-punctured line
// ---------------------------------------------------------------------------

/// A de Rham factor in the coaction of a polylogarithm family element:
/// (L^dr)^lef · (constant de Rham word) · (de Rham family word toward x).
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub struct FamilyDr {
    pub lef: i64,
    pub constant: Word,
    pub family: Word,
}

/// Coaction of the family element I(0; w; x) for a word over {0, 1}.
///
/// Every subword is a valid family element (tangential base point at 0), so
/// the left factor needs no regularization; interior gaps are constant
/// regularized integrals, and the final gap (ending at x) is a de Rham
/// family word, shifted through 0 when it starts at the letter 1.
pub fn family_coaction(w: &Word) -> Result<LinComb<(Word, FamilyDr)>, MotivicError> {
    for &a in &w.0 {
        if a != 0 && a != 1 {
            return Err(MotivicError::UnsupportedLetter(a));
        }
    }
    let n = w.len();
    let mut out: LinComb<(Word, FamilyDr)> = LinComb::zero();
    for mask in 0u32..(1 << n) {
        let chosen: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
        let left = Word(chosen.iter().map(|&i| w.0[i]).collect());
        let k = chosen.len();
        // interior gaps (constant factors)
        let mut constant = LinComb::gen(Word::empty());
        for p in 0..k {
            let (lo, a_lo) = if p == 0 { (0, 0) } else { (chosen[p - 1] + 1, w.0[chosen[p - 1]]) };
            let hi = chosen[p];
            let a_hi = w.0[chosen[p]];
            if lo >= hi {
                continue;
            }
            let interior = Word(w.0[lo..hi].to_vec());
            let gap = reg_general(a_lo, &interior, a_hi);
            if gap.is_zero() {
                constant = LinComb::zero();
                break;
            }
            constant = shuffle_lc(&constant, &gap);
        }
        if constant.is_zero() {
            continue;
        }
        // final gap, from the last chosen letter (or the base point) to x
        let (lo, a_lo) = if k == 0 { (0, 0) } else { (chosen[k - 1] + 1, w.0[chosen[k - 1]]) };
        let tailword = Word(w.0[lo..].to_vec());
        // pairs (extra constant factor, family word)
        let mut finals: Vec<(LinComb<Word>, Word)> = Vec::new();
        if a_lo == 0 {
            finals.push((LinComb::gen(Word::empty()), tailword));
        } else {
            // I(1; u; x) = Σ_{u = vz} I(1; v; 0) I(0; z; x)
            for split in 0..=tailword.len() {
                let v = Word(tailword.0[..split].to_vec());
                let z = Word(tailword.0[split..].to_vec());
                let c = reg_general(1, &v, 0);
                if c.is_zero() {
                    continue;
                }
                finals.push((c, z));
            }
        }
        for (extra, fam) in finals {
            let full_const = shuffle_lc(&constant, &extra);
            for (cw, cc) in full_const.iter() {
                out.add_term(
                    (
                        left.clone(),
                        FamilyDr { lef: k as i64, constant: cw.clone(), family: fam.clone() },
                    ),
                    cc.clone(),
                );
            }
        }
    }
    Ok(out)
}

/// Evaluation of a family word at the tangential base point at 0: every
/// nonempty word vanishes.
pub fn eval_family_at_0(w: &Word) -> MotivicExpr {
    if w.is_empty() { MotivicExpr::one() } else { MotivicExpr::zero() }
}

/// Evaluation at the tangential base point at 1: the shuffle-regularized
/// constant I(0; w; 1).
pub fn eval_family_at_1(w: &Word) -> Result<MotivicExpr, MotivicError> {
    MotivicExpr::iterated_integral(w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::words::Composition;

    fn word(letters: &[i8]) -> Word {
        Word::letters(letters)
    }

    #[test]
    fn regularize_unit_and_equal_endpoints() {
        assert_eq!(regularize(0, &Word::empty(), 1).unwrap(), LinComb::gen(Word::empty()));
        assert!(regularize(0, &word(&[1, 0]), 0).unwrap().is_zero());
        assert!(regularize(1, &word(&[0]), 1).unwrap().is_zero());
    }

    #[test]
    fn regularize_rejects_unknown_letters() {
        assert_eq!(regularize(0, &word(&[2]), 1), Err(MotivicError::UnsupportedLetter(2)));
    }

    #[test]
    fn regularize_weight_two() {
        // I(0; 0 1; 1) = -I(0; 1 0; 1) from the shuffle of the regulators
        let r = regularize(0, &word(&[0, 1]), 1).unwrap();
        assert_eq!(r, LinComb::term(word(&[1, 0]), -Rat::one()));
    }

    #[test]
    fn regularize_single_letters() {
        assert!(regularize(0, &word(&[0]), 1).unwrap().is_zero());
        assert!(regularize(0, &word(&[1]), 1).unwrap().is_zero());
        // I(0; -1; 1) is already admissible (the value log 2)
        assert_eq!(regularize(0, &word(&[-1]), 1).unwrap(), LinComb::gen(word(&[-1])));
        // routed through 0: I(1; 0; -1) = 0
        assert!(regularize(1, &word(&[0]), -1).unwrap().is_zero());
    }

    #[test]
    fn integral_words() {
        assert_eq!(integral_word(&Composition::from_parts(&[2, 3])), word(&[1, 0, 1, 0, 0]));
        assert_eq!(integral_word(&Composition::from_parts(&[3])), word(&[1, 0, 0]));
        assert_eq!(integral_word(&Composition::from_parts(&[-1])), word(&[-1]));
        for parts in [vec![2i64], vec![2, 3], vec![1, 2], vec![-2, 3], vec![1, 1, 2]] {
            let c = Composition::from_parts(&parts);
            assert_eq!(word_to_composition(&integral_word(&c)), Some(c));
        }
    }

    #[test]
    fn zeta_rejects_divergent() {
        assert!(MotivicExpr::zeta(&Composition::from_parts(&[1])).is_err());
        assert!(MotivicExpr::zeta(&Composition::from_parts(&[2, 1])).is_err());
        assert!(MotivicExpr::zeta(&Composition::from_parts(&[-1])).is_ok());
    }

    #[test]
    fn coaction_of_unit_and_lefschetz() {
        let one = MotivicExpr::one();
        let d = coaction(&one);
        assert_eq!(d.0.len(), 1);
        assert_eq!(d.counit_right(), one);

        let l = MotivicExpr::lefschetz(1);
        let d = coaction(&l);
        assert_eq!(
            d.0,
            LinComb::gen((
                MotGen { lef: 1, word: Word::empty(), logs: vec![] },
                DrGen { lef: 1, word: Word::empty(), nus: vec![] }
            ))
        );
    }

    #[test]
    fn coaction_of_log_prime() {
        // Δ log(p) = log(p) ⊗ L + 1 ⊗ ν_p
        let lg = MotivicExpr::log_prime(3).unwrap();
        let d = coaction(&lg);
        let mut expected = LinComb::zero();
        expected.add_term(
            (
                MotGen { lef: 0, word: Word::empty(), logs: vec![3] },
                DrGen { lef: 1, word: Word::empty(), nus: vec![] },
            ),
            Rat::one(),
        );
        expected.add_term(
            (MotGen::one(), DrGen { lef: 0, word: Word::empty(), nus: vec![3] }),
            Rat::one(),
        );
        assert_eq!(d.0, expected);
    }

    #[test]
    fn coaction_of_zeta3() {
        // Δ ζ(3) = ζ(3) ⊗ L³ + 1 ⊗ ζ^dr(3); cross terms vanish under
        // regularization
        let z3 = MotivicExpr::zeta(&Composition::from_parts(&[3])).unwrap();
        let d = coaction(&z3);
        let w3 = word(&[1, 0, 0]);
        let mut expected = LinComb::zero();
        expected.add_term(
            (MotGen::from_word(w3.clone()), DrGen { lef: 3, word: Word::empty(), nus: vec![] }),
            -Rat::one(),
        );
        expected.add_term(
            (MotGen::one(), DrGen { lef: 0, word: w3, nus: vec![] }),
            -Rat::one(),
        );
        assert_eq!(d.0, expected);
        assert_eq!(d.counit_right(), z3);
    }

    #[test]
    fn coaction_multiplicative() {
        let z2 = MotivicExpr::zeta(&Composition::from_parts(&[2])).unwrap();
        let z3 = MotivicExpr::zeta(&Composition::from_parts(&[3])).unwrap();
        let lhs = coaction(&z2.mul(&z3));
        let a = coaction(&z2);
        let b = coaction(&z3);
        let mut rhs = LinComb::zero();
        for ((m1, d1), c1) in a.0.iter() {
            for ((m2, d2), c2) in b.0.iter() {
                let words = shuffle(&m1.word, &m2.word);
                let dwords = shuffle(&d1.word, &d2.word);
                for (mw, mc) in words.iter() {
                    for (dw, dc) in dwords.iter() {
                        let mg = MotGen { lef: m1.lef + m2.lef, word: mw.clone(), logs: vec![] };
                        let dg = DrGen { lef: d1.lef + d2.lef, word: dw.clone(), nus: vec![] };
                        rhs.add_term((mg, dg), &(&(c1 * c2) * mc) * dc);
                    }
                }
            }
        }
        assert_eq!(lhs.0, rhs);
    }

    /// Regularization is a shuffle homomorphism: regularizing a shuffle
    /// product equals the shuffle of the regularized values. Exhaustive over
    /// small {0,1}-words (including divergent ones) plus Euler samples.
    #[test]
    fn regularization_respects_shuffle() {
        let mut words: Vec<Word> = Vec::new();
        for len in 0..=3usize {
            for bits in 0..(1u32 << len) {
                words.push(Word((0..len).map(|i| ((bits >> i) & 1) as i8).collect()));
            }
        }
        words.push(word(&[-1, 0]));
        words.push(word(&[1, -1]));
        for u in &words {
            for v in &words {
                let lhs = shuffle(u, v).flat_map(|w| regularize(0, w, 1).unwrap());
                let rhs = shuffle_lc(
                    &regularize(0, u, 1).unwrap(),
                    &regularize(0, v, 1).unwrap(),
                );
                assert_eq!(lhs, rhs, "u = {}, v = {}", u, v);
            }
        }
    }

    #[test]
    fn euler_sum_coaction() {
        // Δ of the weight-one Euler word is log-shaped:
        // I(-1) ⊗ L + 1 ⊗ I(-1)
        let lg = MotivicExpr(LinComb::gen(MotGen::from_word(word(&[-1]))));
        let d = coaction(&lg);
        let mut expected = LinComb::zero();
        expected.add_term(
            (MotGen::from_word(word(&[-1])), DrGen { lef: 1, word: Word::empty(), nus: vec![] }),
            Rat::one(),
        );
        expected.add_term(
            (MotGen::one(), DrGen { lef: 0, word: word(&[-1]), nus: vec![] }),
            Rat::one(),
        );
        assert_eq!(d.0, expected);
        // counit and coassociativity hold on mixed-letter words, exercising
        // path reversal, scaling, and the composition through 0
        for letters in [vec![-1i8], vec![-1, 0], vec![1, -1], vec![1, 0, -1], vec![-1, 1, 0]] {
            let x = MotivicExpr(LinComb::gen(MotGen::from_word(word(&letters))));
            let delta = coaction(&x);
            assert_eq!(delta.counit_right(), x, "counit for {:?}", letters);
            let mut lhs: LinComb<(MotGen, DrGen, DrGen)> = LinComb::zero();
            for ((m, dr), c) in delta.0.iter() {
                for ((m2, d2), c2) in coaction(&MotivicExpr(LinComb::gen(m.clone()))).0.iter() {
                    lhs.add_term((m2.clone(), d2.clone(), dr.clone()), c * c2);
                }
            }
            let mut rhs: LinComb<(MotGen, DrGen, DrGen)> = LinComb::zero();
            for ((m, dr), c) in delta.0.iter() {
                for ((d1, d2), c2) in dr_coproduct(dr).iter() {
                    rhs.add_term((m.clone(), d1.clone(), d2.clone()), c * c2);
                }
            }
            assert_eq!(lhs, rhs, "coassociativity for {:?}", letters);
        }
    }

    #[test]
    fn family_coaction_of_dilog() {
        // Li2 corresponds to -I(0; 1 0; x):
        // Δ I(10) = I(10) ⊗ L² + I(1) ⊗ L·[0] + 1 ⊗ [1 0]
        let d = family_coaction(&word(&[1, 0])).unwrap();
        let mut expected = LinComb::zero();
        expected.add_term(
            (word(&[1, 0]), FamilyDr { lef: 2, constant: Word::empty(), family: Word::empty() }),
            Rat::one(),
        );
        expected.add_term(
            (word(&[1]), FamilyDr { lef: 1, constant: Word::empty(), family: word(&[0]) }),
            Rat::one(),
        );
        expected.add_term(
            (Word::empty(), FamilyDr { lef: 0, constant: Word::empty(), family: word(&[1, 0]) }),
            Rat::one(),
        );
        assert_eq!(d, expected);
    }

    #[test]
    fn family_evaluations() {
        assert!(eval_family_at_0(&word(&[1, 0])).is_zero());
        assert_eq!(eval_family_at_0(&Word::empty()), MotivicExpr::one());
        // ev_1 I(0; 1 0; 1) = -ζ(2)
        let z2 = MotivicExpr::zeta(&Composition::from_parts(&[2])).unwrap();
        assert_eq!(eval_family_at_1(&word(&[1, 0])).unwrap(), z2.scale(&-Rat::one()));
        // ev_1 I(0; 1; 1) = 0 (regularized)
        assert!(eval_family_at_1(&word(&[1])).unwrap().is_zero());
    }
}
